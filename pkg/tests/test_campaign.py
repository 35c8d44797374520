import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pathsat.campaign import (CampaignConfig, CampaignReport, CampaignRow, ConfigError, PathSet,
                              Schedule, StopRule, detect_k_longest, detect_k_saturation,
                              input_rng, insert_path, plan_batch, run_campaign, shape_for_budget,
                              stream_seed)
from pathsat.schema import InfeasibleConstraint, InputSchema, ParamSpec, sample_input


def cfg(**kw):
    return CampaignConfig(**kw)


# ------------------------------------------------------------------ schedule

def test_linear_budget_3(linear):
    shapes = shape_for_budget(linear, 3, cfg(max_size=10))
    assert sorted(s["d"] for s in shapes) == [0, 1, 2, 3]


def test_matrix_budget_8_includes_2x2x2(matrix):
    shapes = shape_for_budget(matrix, 8, cfg(max_size=4))
    assert {"m": 2, "n": 2, "p": 2, "q": 2} in shapes
    assert all(s["m"] * s["n"] * s["q"] <= 8 for s in shapes)


@pytest.mark.parametrize("name", ["linear", "bubble", "matrix", "merge"])
def test_budget_zero_is_empty_shape_only(name, request):
    subject = request.getfixturevalue(name)
    shapes = shape_for_budget(subject, 0, cfg(max_size=3))
    assert len(shapes) == 1 and set(shapes[0].values()) == {0}


def test_fixed_mode_ignores_budget(linear):
    c = cfg(shape_mode="fixed", fixed_shape={"d": 4})
    assert shape_for_budget(linear, 0, c) == [{"d": 4}]
    assert shape_for_budget(linear, 50, c) == [{"d": 4}]


def test_schedule_complete(linear):
    s = Schedule(linear, cfg(max_size=5))
    assert not s.complete(4) and s.complete(5)


def test_plan_batch_half_largest_and_round_robin():
    shapes = [(0, {"d": 0}), (1, {"d": 1}), (2, {"d": 2})]
    plan, cursor = plan_batch(shapes, 6, 0)
    assert plan[0::2] == [{"d": 2}] * 3
    assert plan[1::2] == [{"d": 0}, {"d": 1}, {"d": 2}]
    plan, cursor = plan_batch(shapes, 2, cursor)
    assert plan == [{"d": 2}, {"d": 0}] and cursor == 4


# ------------------------------------------------------------------- sampler

def test_sampler_deterministic(linear):
    a = sample_input(linear.schema, {"d": 3}, 1000, input_rng(1, 3, 7))
    b = sample_input(linear.schema, {"d": 3}, 1000, input_rng(1, 3, 7))
    assert a == b and len(a["a"]) == 3 and all(0 <= v < 1000 for v in a["a"] + [a["z"]])


def test_stream_seeds_differ():
    seeds = {stream_seed(1, k, i) for k in range(20) for i in range(50)}
    assert len(seeds) == 1000


def test_sorted_constraint_small_domain(merge):
    seen = set()
    for i in range(200):
        inp = sample_input(merge.schema, {"n1": 2, "n2": 0}, 2, random.Random(i))
        seen.add(tuple(inp["x"]))
    assert seen == {(0, 0), (0, 1), (1, 1)}


def test_distinct_constraint_infeasible():
    schema = InputSchema((ParamSpec("a", "int[]", "array", ("n",), constraint="distinct-elements"),
                          ParamSpec("n", "int", "size")))
    with pytest.raises(InfeasibleConstraint):
        sample_input(schema, {"n": 3}, 2, random.Random(0))
    inp = sample_input(schema, {"n": 5}, 6, random.Random(0))
    assert len(set(inp["a"])) == 5


@given(st.integers(0, 2 ** 32), st.integers(1, 4), st.integers(1, 4))
def test_matrix_sample_shape(matrix, seed, m, q):
    shape = {"m": m, "n": 2, "p": 2, "q": q}
    inp = sample_input(matrix.schema, shape, 10, random.Random(seed))
    assert len(inp["a"]) == m and all(len(r) == 2 for r in inp["a"])
    assert len(inp["b"]) == 2 and all(len(r) == q for r in inp["b"])


# ------------------------------------------------------------------ path set

def test_insert_path_dedup(linear):
    paths = PathSet(linear.table)
    assert insert_path(paths, "a -b -a", {"a": [0], "d": 1, "z": 7}, 1)
    assert not insert_path(paths, "a -b -a", {"a": [3], "d": 1, "z": 4}, 2)
    assert paths["a -b -a"].input["a"] == [0] and paths["a -b -a"].first_k == 1


def test_same_decisions_same_key(linear):
    exe = linear.executable
    paths = PathSet(linear.table)
    keys = [exe.render(exe.run({"a": [v], "d": 1, "z": v})[0]) for v in (5, 9)]
    assert keys == ["a b -a", "a b -a"]
    assert paths.insert(keys[0], {}, 0)
    assert not paths.insert(keys[1], {}, 0)


# -------------------------------------------------------------------- config

def test_zero_batch_is_config_error(linear):
    with pytest.raises(ConfigError):
        run_campaign(linear, cfg(batch=0))


def test_unknown_config_key():
    with pytest.raises(ConfigError):
        CampaignConfig.from_dict({"batch": 5, "colour": "red"})


def test_config_round_trip():
    c = cfg(max_size={"n1": 2, "n2": 3}, stop_rule=StopRule("k-max", 5), include_partial=True)
    assert CampaignConfig.from_dict(c.to_dict()) == c


# ----------------------------------------------------------------- detectors

def test_k_longest_plateau_start():
    assert detect_k_longest([1, 3, 5, 5, 5]) == 2


def test_k_longest_still_rising():
    assert detect_k_longest([1, 3]) is None


def test_k_saturation_window():
    assert detect_k_saturation([1, 1, 1, 0, 0, 0], 3) == 3


def test_k_saturation_short_run():
    assert detect_k_saturation([1, 0, 1, 0, 0], 3) is None


def test_k_saturation_must_follow_k_longest():
    rows = [CampaignRow(k, 0, 0, nfp, llp, 0.0)
            for k, (nfp, llp) in enumerate([(1, 1), (0, 3), (0, 3), (0, 3), (0, 3), (0, 3)])]
    report = CampaignReport("x", rows)
    assert report.k_longest == 1
    assert report.k_saturation == 2


# ----------------------------------------------------------------- campaigns

def test_linear_five_campaign(linear):
    report, paths = run_campaign(linear, cfg(max_size=5, k_max=60))
    assert report.l_max == 11 and report.k_longest == 5
    assert paths.max_length() == 11


def test_matrix_2222_campaign(matrix):
    report, paths = run_campaign(matrix, cfg(max_size={"m": 2, "n": 2, "q": 2}, batch=16))
    assert report.l_max == 21
    assert report.k_longest == 8
    assert report.k_saturation == 9


def test_linear_100_k_longest(linear):
    c = cfg(max_size=100, k_max=150, batch=20, stop_rule=StopRule("longest-path"))
    report, _ = run_campaign(linear, c)
    assert report.k_longest == 100
    assert report.l_max == 201


@pytest.mark.parametrize("n", [3, 5])
def test_linear_saturates_right_after_k_longest_on_unit_domain(linear, n):
    """With one value per cell every shape has exactly one path."""
    report, paths = run_campaign(linear, cfg(max_size=n, domain=1))
    assert (report.k_longest, report.k_saturation) == (n, n + 1)
    assert len(paths) == n + 1


@pytest.mark.parametrize("n", [3, 4, 5])
def test_bubble_saturates_right_after_k_longest_on_unit_domain(bubble, n):
    report, _ = run_campaign(bubble, cfg(max_size=n, domain=1))
    k_l = n * (n - 1) // 2
    assert (report.k_longest, report.k_saturation) == (k_l, k_l + 1)


def test_campaign_is_seed_reproducible(bubble):
    c = cfg(max_size=4, seed=7)
    r1, p1 = run_campaign(bubble, c, stable_time=True)
    r2, p2 = run_campaign(bubble, c, stable_time=True)
    assert r1.rows == r2.rows and list(p1.items()) == list(p2.items())


def test_worker_count_does_not_change_results(bubble):
    c = cfg(max_size=4, seed=3)
    r1, p1 = run_campaign(bubble, c, stable_time=True)
    r2, p2 = run_campaign(bubble, c, workers=2, stable_time=True)
    assert r1.rows == r2.rows and list(p1.items()) == list(p2.items())


def test_faulting_inputs_are_skipped():
    from pathsat.subject import Subject
    schema = InputSchema((ParamSpec("a", "int[]", "array", ("n",)), ParamSpec("n", "int", "size")),
                         cost="n")
    subject = Subject.from_source(
        "fn f(a: int[], n: int) { let i; for (i = 0; i < n; i = i + 1) { a[i] = 10 / a[i]; } }",
        schema)
    report, paths = run_campaign(subject, cfg(max_size=2, domain=2, k_max=10,
                                              stop_rule=StopRule("k-max")))
    assert report.skipped > 0
    report_p, paths_p = run_campaign(subject, cfg(max_size=2, domain=2, k_max=10,
                                                  stop_rule=StopRule("k-max"), include_partial=True))
    assert report_p.skipped == 0 and len(paths_p) > len(paths)
