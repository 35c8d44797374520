"""Test suites (one input per unique path), report/table serialization and
the heuristic table store."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional

from .campaign import CampaignReport, CampaignRow, PathSet
from .interp import ExecutionError
from .oracle import HeuristicEntry
from .subject import Subject

REPORT_COLUMNS = ("k", "test_cases", "ufp", "nfp", "llp", "etime_ms")
HEURISTIC_COLUMNS = ("construct", "dims", "source", "k_l", "k_s", "l_max")
SUITE_COLUMNS = ("path", "input", "length", "cost", "first_k")
SOURCES = ("predicted", "measured")


class ReplayMismatch(AssertionError):
    pass


class UnsupportedFormat(ValueError):
    pass


@dataclass
class SuiteEntry:
    path: str
    input: dict
    length: int
    cost: int
    first_k: int


@dataclass
class TestSuite:
    __test__ = False  # not a pytest class

    subject: str
    schema_digest: str
    config: dict
    seed: Optional[int]
    entries: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "schema_digest": self.schema_digest,
            "config": self.config,
            "seed": self.seed,
            "entries": [
                {"path": e.path, "input": e.input, "length": e.length, "cost": e.cost,
                 "first_k": e.first_k}
                for e in self.entries
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TestSuite":
        return cls(d["subject"], d["schema_digest"], d.get("config", {}), d.get("seed"),
                   [SuiteEntry(**e) for e in d["entries"]])


def replay(subject: Subject, inp: dict, step_budget: Optional[int] = None) -> str:
    """Path string produced by ``inp``; partial path when the run faults."""
    exe = subject.executable
    try:
        trace, _ = exe.run(inp, step_budget or 10 ** 7)
    except ExecutionError as exc:
        if exc.trace is None:
            raise
        trace = exc.trace
    return exe.render(trace)


def verify_suite(subject: Subject, suite: TestSuite) -> None:
    if suite.schema_digest != subject.schema.digest():
        raise ReplayMismatch("suite was built against a different schema")
    seen = set()
    for e in suite.entries:
        if e.path in seen:
            raise ReplayMismatch(f"duplicate path in suite: {e.path!r}")
        seen.add(e.path)
        got = replay(subject, e.input)
        if got != e.path:
            raise ReplayMismatch(f"input {e.input} now covers {got!r}, not {e.path!r}")


def extract_suite(paths: PathSet, subject: Subject, config: Optional[dict] = None) -> TestSuite:
    """One entry per path, in first-seen order; every entry is replayed."""
    config = dict(config or {})
    suite = TestSuite(subject.name, subject.schema.digest(), config, config.get("seed"))
    for key, entry in paths.items():
        suite.entries.append(SuiteEntry(key, entry.input, entry.length, entry.cost, entry.first_k))
    verify_suite(subject, suite)
    return suite


# ------------------------------------------------------------ heuristic table

class HeuristicTable:
    """Rows keyed by (construct, dims, source); predicted and measured coexist."""

    def __init__(self):
        self._rows: dict[tuple, HeuristicEntry] = {}

    def upsert(self, entry: HeuristicEntry, source: str) -> "HeuristicTable":
        if source not in SOURCES:
            raise ValueError(f"source must be one of {SOURCES}")
        self._rows[(entry.construct, tuple(entry.dims), source)] = entry
        return self

    def __len__(self) -> int:
        return len(self._rows)

    def get(self, construct: str, dims, source: str) -> Optional[HeuristicEntry]:
        return self._rows.get((construct, tuple(dims), source))

    def rows(self) -> list[tuple[str, HeuristicEntry]]:
        keys = sorted(self._rows, key=lambda k: (k[0], k[1], k[2]))
        return [(k[2], self._rows[k]) for k in keys]

    def diff(self) -> list[dict]:
        """measured - predicted for every (construct, dims) holding both."""
        out = []
        for (construct, dims, source), pred in sorted(self._rows.items()):
            if source != "predicted":
                continue
            meas = self._rows.get((construct, dims, "measured"))
            if meas is None:
                continue
            out.append({
                "construct": construct,
                "dims": list(dims),
                "k_l": _delta(meas.k_l, pred.k_l),
                "k_s": _delta(meas.k_s, pred.k_s),
                "l_max": _delta(meas.l_max, pred.l_max),
            })
        return out

    def to_dict(self) -> dict:
        return {"rows": [dict(e.to_dict(), source=src) for src, e in self.rows()]}

    @classmethod
    def from_dict(cls, d: dict) -> "HeuristicTable":
        table = cls()
        for r in d["rows"]:
            table.upsert(HeuristicEntry(r["construct"], tuple(r["dims"]), r["k_l"], r["k_s"],
                                        r["l_max"]), r["source"])
        return table

    def __eq__(self, other) -> bool:
        return isinstance(other, HeuristicTable) and self._rows == other._rows


def _delta(a, b):
    return None if a is None or b is None else a - b


def upsert_heuristic(store: HeuristicTable, entry: HeuristicEntry, source: str) -> HeuristicTable:
    return store.upsert(entry, source)


# ---------------------------------------------------------------- serialization

def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, indent=2) + "\n").encode("utf-8")


def _csv_bytes(header, rows) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue().encode("utf-8")


def format_ms(x: float) -> str:
    return f"{x:.3f}"


def export(obj, fmt: str = "json") -> bytes:
    """Serialize a TestSuite, CampaignReport or HeuristicTable."""
    if fmt not in ("json", "csv"):
        raise UnsupportedFormat(fmt)
    if isinstance(obj, TestSuite):
        if fmt == "json":
            return _json_bytes(obj.to_dict())
        return _csv_bytes(SUITE_COLUMNS, [
            (e.path, json.dumps(e.input, separators=(",", ":")), e.length, e.cost, e.first_k)
            for e in obj.entries])
    if isinstance(obj, CampaignReport):
        if fmt == "json":
            return _json_bytes(obj.to_dict())
        return _csv_bytes(REPORT_COLUMNS, [
            (r.k, r.test_cases, r.ufp, r.nfp, r.llp, format_ms(r.etime_ms)) for r in obj.rows])
    if isinstance(obj, HeuristicTable):
        if fmt == "json":
            return _json_bytes(obj.to_dict())
        return _csv_bytes(HEURISTIC_COLUMNS, [
            (e.construct, "x".join(map(str, e.dims)), src, e.k_l,
             "" if e.k_s is None else e.k_s, e.l_max)
            for src, e in obj.rows()])
    raise TypeError(f"cannot export {type(obj).__name__}")


def read_report_csv(data, subject: str = "") -> CampaignReport:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != REPORT_COLUMNS:
        raise ValueError(f"unexpected report header {header}")
    rows = [CampaignRow(int(k), int(tc), int(u), int(n), int(l), float(t))
            for k, tc, u, n, l, t in reader]
    return CampaignReport(subject, rows)


def import_(data, kind: str, fmt: str = "json"):
    """Inverse of :func:`export`; ``kind`` is 'suite', 'report' or 'heuristics'."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    if fmt == "json":
        d = json.loads(text)
        if kind == "suite":
            return TestSuite.from_dict(d)
        if kind == "report":
            return CampaignReport.from_dict(d)
        if kind == "heuristics":
            return HeuristicTable.from_dict(d)
        raise ValueError(kind)
    if fmt != "csv":
        raise UnsupportedFormat(fmt)
    if kind == "report":
        return read_report_csv(text)
    rows = list(csv.DictReader(io.StringIO(text)))
    if kind == "heuristics":
        table = HeuristicTable()
        for r in rows:
            table.upsert(HeuristicEntry(
                r["construct"], tuple(int(x) for x in r["dims"].split("x")), int(r["k_l"]),
                None if r["k_s"] == "" else int(r["k_s"]), int(r["l_max"])), r["source"])
        return table
    raise UnsupportedFormat(f"{kind} cannot be read back from csv")
