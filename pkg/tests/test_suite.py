import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pathsat import suite
from pathsat.campaign import CampaignConfig, CampaignReport, CampaignRow, PathSet, run_campaign
from pathsat.oracle import HeuristicEntry, predict
from pathsat.suite import (HeuristicTable, ReplayMismatch, SuiteEntry, TestSuite, export,
                           extract_suite, import_, verify_suite)


@pytest.fixture(scope="module")
def linear_run(linear):
    return run_campaign(linear, CampaignConfig(max_size=3, domain=3), stable_time=True)


def test_two_paths_two_entries(linear):
    paths = PathSet(linear.table)
    paths.insert("a -b -a", {"a": [0], "d": 1, "z": 7}, 1)
    paths.insert("a b -a", {"a": [7], "d": 1, "z": 7}, 1)
    s = extract_suite(paths, linear)
    assert [e.path for e in s.entries] == ["a -b -a", "a b -a"]


def test_empty_suite_is_valid(linear):
    s = extract_suite(PathSet(linear.table), linear)
    assert s.entries == []
    doc = json.loads(export(s, "json"))
    assert doc["entries"] == []


def test_saturated_campaign_suite_replays(linear, linear_run):
    _, paths = linear_run
    s = extract_suite(paths, linear, {"seed": 1})
    verify_suite(linear, s)
    assert len(s.entries) == len(paths)


def test_tampered_suite_fails_replay(linear, linear_run):
    _, paths = linear_run
    s = extract_suite(paths, linear)
    s.entries[0] = SuiteEntry(s.entries[1].path, s.entries[0].input, 0, 0, 0)
    with pytest.raises(ReplayMismatch):
        verify_suite(linear, s)


def test_digest_mismatch(linear, bubble):
    s = TestSuite(linear.name, bubble.schema.digest(), {}, None, [])
    with pytest.raises(ReplayMismatch):
        verify_suite(linear, s)


def test_export_is_deterministic(linear, linear_run):
    report, paths = linear_run
    s = extract_suite(paths, linear)
    assert export(s, "json") == export(s, "json")
    assert export(report, "csv") == export(report, "csv")


def test_report_csv_header(linear_run):
    report, _ = linear_run
    first = export(report, "csv").decode().splitlines()[0]
    assert first == "k,test_cases,ufp,nfp,llp,etime_ms"


def test_suite_json_round_trip(linear, linear_run):
    _, paths = linear_run
    s = extract_suite(paths, linear)
    assert import_(export(s, "json"), "suite") == s


row = st.builds(CampaignRow, st.integers(0, 500), st.integers(0, 10 ** 6), st.integers(0, 10 ** 4),
                st.integers(0, 100), st.integers(0, 1000),
                st.integers(0, 10 ** 7).map(lambda v: v / 1000))


@given(st.lists(row, max_size=8))
def test_report_round_trips(rows):
    report = CampaignReport("s", rows)
    assert import_(export(report, "csv"), "report", "csv").rows == rows
    assert import_(export(report, "json"), "report").rows == rows


def test_unsupported_format(linear_run):
    with pytest.raises(suite.UnsupportedFormat):
        export(linear_run[0], "xml")


# ----------------------------------------------------------- heuristic table

def test_predicted_and_measured_coexist():
    t = HeuristicTable()
    t.upsert(predict("linear", 10), "predicted")
    t.upsert(HeuristicEntry("linear", (10,), 10, 23, 21), "measured")
    assert len(t) == 2
    assert [src for src, _ in t.rows()] == ["measured", "predicted"]


def test_upsert_idempotent():
    t = HeuristicTable()
    t.upsert(predict("linear", 10), "predicted")
    t.upsert(predict("linear", 10), "predicted")
    assert len(t) == 1


def test_diff_zero_for_matching_matrix():
    t = HeuristicTable()
    t.upsert(predict("matrix", (2, 2, 2)), "predicted")
    t.upsert(HeuristicEntry("matrix", (2, 2, 2), 8, 9, 21), "measured")
    assert t.diff() == [{"construct": "matrix", "dims": [2, 2, 2], "k_l": 0, "k_s": 0, "l_max": 0}]


def test_bad_source():
    with pytest.raises(ValueError):
        HeuristicTable().upsert(predict("linear", 3), "guessed")


@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_heuristic_round_trip(fmt):
    t = HeuristicTable()
    t.upsert(predict("merge", 3), "predicted")
    t.upsert(predict("matrix", (5, 3, 8)), "predicted")
    t.upsert(HeuristicEntry("merge", (3, 3), 6, 9, 14), "measured")
    assert import_(export(t, fmt), "heuristics", fmt) == t
