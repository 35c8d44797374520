"""Generate-execute-filter campaigns over an increasing iteration budget k.

At step ``k`` only input shapes whose longest path costs at most ``k``
innermost-loop body executions are exercised (``shape_mode="cost-budget"``).
Each step draws ``batch`` random inputs, runs them, and adds every previously
unseen path string to the :class:`PathSet`.  One :class:`CampaignRow` is
recorded per step; :func:`detect_k_longest` and :func:`detect_k_saturation`
read the longest-path level k_L and saturation level k_S off those rows.

Randomness is per input: input ``i`` of step ``k`` draws from a stream seeded
by ``splitmix64`` mixing of ``(seed, k, i)``, so the result does not depend on
how inputs are spread over worker processes.
"""
from __future__ import annotations

import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .interp import DEFAULT_STEP_BUDGET, ExecutionError, eval_static, path_cost
from .schema import (InfeasibleConstraint, InputSchema, Shape, all_shapes, resolve_shape,
                     sample_input, shape_key, zero_shape)
from .subject import Subject

SHAPE_MODES = ("cost-budget", "fixed")
STOP_TYPES = ("saturation", "longest-path", "k-max")
_MASK64 = (1 << 64) - 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class StopRule:
    type: str = "saturation"
    window: int = 3

    def to_dict(self) -> dict:
        return {"type": self.type, "window": self.window}


@dataclass
class CampaignConfig:
    domain: int = 1000
    max_size: Union[int, dict] = 10
    k_max: int = 100
    batch: int = 100
    seed: int = 1
    shape_mode: str = "cost-budget"
    stop_rule: StopRule = field(default_factory=StopRule)
    step_budget: int = DEFAULT_STEP_BUDGET
    fixed_shape: Optional[dict] = None
    include_partial: bool = False

    def validate(self) -> None:
        problems = []
        for name in ("domain", "k_max", "batch", "step_budget"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                problems.append(f"{name} must be a positive integer, got {v!r}")
        sizes = self.max_size.values() if isinstance(self.max_size, dict) else [self.max_size]
        if not all(isinstance(v, int) and v >= 0 for v in sizes):
            problems.append(f"max_size must be non-negative, got {self.max_size!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed <= _MASK64:
            problems.append(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.shape_mode not in SHAPE_MODES:
            problems.append(f"unknown shape_mode {self.shape_mode!r}")
        if self.shape_mode == "fixed" and not self.fixed_shape:
            problems.append("shape_mode 'fixed' needs fixed_shape")
        if self.stop_rule.type not in STOP_TYPES:
            problems.append(f"unknown stop rule {self.stop_rule.type!r}")
        if not isinstance(self.stop_rule.window, int) or self.stop_rule.window < 1:
            problems.append("stop_rule window must be >= 1")
        if problems:
            raise ConfigError("; ".join(problems))

    def to_dict(self) -> dict:
        d = {
            "domain": self.domain,
            "max_size": self.max_size,
            "k_max": self.k_max,
            "batch": self.batch,
            "seed": self.seed,
            "shape_mode": self.shape_mode,
            "stop_rule": self.stop_rule.to_dict(),
            "step_budget": self.step_budget,
        }
        if self.fixed_shape is not None:
            d["fixed_shape"] = self.fixed_shape
        if self.include_partial:
            d["include_partial"] = True
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignConfig":
        known = {"domain", "max_size", "k_max", "batch", "seed", "shape_mode", "stop_rule",
                 "step_budget", "fixed_shape", "include_partial"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        if "stop_rule" in d:
            rule = d["stop_rule"]
            d["stop_rule"] = StopRule(rule) if isinstance(rule, str) else StopRule(**rule)
        return cls(**d)


# ------------------------------------------------------------------ path sets

@dataclass
class PathEntry:
    input: dict
    first_k: int
    length: int
    cost: int


class PathSet:
    """Unique path strings, each with the first input that produced it."""

    def __init__(self, table):
        self.table = table
        self._entries: dict[str, PathEntry] = {}
        self._max_length = 0

    def insert(self, key: str, inp: dict, k: int, cost: Optional[int] = None) -> bool:
        if key in self._entries:
            return False
        if cost is None:
            cost = path_cost(key, self.table)
        entry = PathEntry(inp, k, len(key.split()) if key else 0, cost)
        self._entries[key] = entry
        self._max_length = max(self._max_length, entry.length)
        return True

    def __contains__(self, key) -> bool:
        return key in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def __getitem__(self, key: str) -> PathEntry:
        return self._entries[key]

    def keys(self) -> set:
        return set(self._entries)

    def items(self):
        return self._entries.items()

    def max_length(self) -> int:
        return self._max_length


def insert_path(paths: PathSet, key: str, inp: dict, k: int) -> bool:
    return paths.insert(key, inp, k)


# ---------------------------------------------------------------------- rows

@dataclass
class CampaignRow:
    k: int
    test_cases: int
    ufp: int
    nfp: int
    llp: int
    etime_ms: float

    def astuple(self) -> tuple:
        return (self.k, self.test_cases, self.ufp, self.nfp, self.llp, self.etime_ms)


@dataclass
class CampaignReport:
    subject: str
    rows: list
    window: int = 3
    skipped: int = 0
    stop_reason: str = ""
    config: dict = field(default_factory=dict)

    @property
    def k_longest(self) -> Optional[int]:
        return detect_k_longest(self)

    @property
    def k_saturation(self) -> Optional[int]:
        return detect_k_saturation(self, self.window)

    @property
    def l_max(self) -> int:
        return self.rows[-1].llp if self.rows else 0

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "config": self.config,
            "window": self.window,
            "skipped": self.skipped,
            "stop_reason": self.stop_reason,
            "k_l": self.k_longest,
            "k_s": self.k_saturation,
            "rows": [asdict(r) for r in self.rows],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignReport":
        return cls(d["subject"], [CampaignRow(**r) for r in d["rows"]], d.get("window", 3),
                   d.get("skipped", 0), d.get("stop_reason", ""), d.get("config", {}))


def _series(source, attr: str) -> list[tuple[int, int]]:
    rows = source.rows if isinstance(source, CampaignReport) else source
    out = []
    for i, r in enumerate(rows):
        if isinstance(r, CampaignRow):
            out.append((r.k, getattr(r, attr)))
        else:
            out.append((i, int(r)))
    return out


def detect_k_longest(report) -> Optional[int]:
    """First k of the final llp plateau, or None if the plateau is unconfirmed.

    Accepts a report, a list of rows, or a bare llp column (k = position).
    """
    llp = _series(report, "llp")
    if len(llp) < 2 or llp[-1][1] != llp[-2][1]:
        return None
    final = llp[-1][1]
    for k, v in llp:
        if v == final:
            return k
    return None  # pragma: no cover


def detect_k_saturation(report, window: int = 3, k_longest=...) -> Optional[int]:
    """Smallest k after k_L starting ``window`` consecutive nfp == 0 steps.

    ``k_longest`` defaults to :func:`detect_k_longest` of the report; for a
    bare nfp column it defaults to None (no constraint).
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    nfp = _series(report, "nfp")
    if k_longest is ...:
        rows = report.rows if isinstance(report, CampaignReport) else report
        k_longest = detect_k_longest(report) if rows and isinstance(rows[0], CampaignRow) else None
    for start in range(len(nfp) - window + 1):
        k = nfp[start][0]
        if k_longest is not None and k <= k_longest:
            continue
        if all(v == 0 for _, v in nfp[start:start + window]):
            return k
    return None


# ------------------------------------------------------------------ schedule

def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def stream_seed(seed: int, k: int, index: int) -> int:
    h = splitmix64(seed & _MASK64)
    h = splitmix64(h ^ (k & _MASK64))
    return splitmix64(h ^ (index & _MASK64))


def input_rng(seed: int, k: int, index: int) -> random.Random:
    return random.Random(stream_seed(seed, k, index))


def shape_cost(subject: Subject, shape: Shape) -> int:
    """Cost of the longest path for a shape (schema formula, else a probe run)."""
    if subject.schema.cost is not None:
        return eval_static(subject.schema.cost, shape)
    probe = sample_input(subject.schema, shape, 1, random.Random(0))
    trace, _ = subject.executable.run(probe)
    return subject.executable.cost(trace)


class Schedule:
    """Admissible shapes per budget k, with their costs precomputed."""

    def __init__(self, subject: Subject, config: CampaignConfig):
        schema = subject.schema
        self.mode = config.shape_mode
        if self.mode == "fixed":
            shape = resolve_shape(schema, dict(config.fixed_shape))
            self.shapes = [(shape_cost(subject, shape), shape)]
        else:
            costed = [(shape_cost(subject, s), s) for s in all_shapes(schema, config.max_size)]
            costed.sort(key=lambda cs: (cs[0], shape_key(cs[1])))
            self.shapes = costed
        self.zero = zero_shape(schema)
        self.full_cost = max(c for c, _ in self.shapes)

    def admissible(self, k: int) -> list[tuple[int, Shape]]:
        if self.mode == "fixed":
            return list(self.shapes)
        if k == 0:
            return [(c, s) for c, s in self.shapes if s == self.zero]
        return [(c, s) for c, s in self.shapes if c <= k]

    def complete(self, k: int) -> bool:
        return len(self.admissible(k)) == len(self.shapes)


def shape_for_budget(subject: Subject, k: int, config: CampaignConfig) -> list[Shape]:
    """All shapes (capped by max_size) whose longest path costs at most k.

    k = 0 admits only the all-zero shape; fixed mode always yields the
    configured shape.
    """
    return [s for _, s in Schedule(subject, config).admissible(k)]


def plan_batch(shapes: Sequence[tuple[int, Shape]], batch: int, cursor: int):
    """Assign a shape to each input index of a step.

    Even indices go to the largest admissible shape (so it gets at least
    half the batch); odd indices walk round-robin over all admissible shapes,
    continuing from ``cursor`` across steps.  Returns ``(plan, cursor)``.
    """
    largest = max(shapes, key=lambda cs: (cs[0], shape_key(cs[1])))[1]
    plan = []
    for i in range(batch):
        if i % 2 == 0:
            plan.append(largest)
        else:
            plan.append(shapes[cursor % len(shapes)][1])
            cursor += 1
    return plan, cursor


# ----------------------------------------------------------------- execution

def _execute_batch(subject: Subject, config: CampaignConfig, k: int, jobs):
    """Run ``(index, shape)`` jobs; returns ``(index, key, input, cost)`` tuples
    with ``key`` None for skipped inputs."""
    exe = subject.executable
    out = []
    for index, shape in jobs:
        rng = input_rng(config.seed, k, index)
        try:
            inp = sample_input(subject.schema, shape, config.domain, rng)
        except InfeasibleConstraint:
            out.append((index, None, None, 0))
            continue
        try:
            trace, _ = exe.run(inp, config.step_budget)
        except ExecutionError as exc:
            if config.include_partial and exc.trace is not None:
                out.append((index, exe.render(exc.trace), inp, exe.cost(exc.trace)))
            else:
                out.append((index, None, None, 0))
            continue
        out.append((index, exe.render(trace), inp, exe.cost(trace)))
    return out


_WORKER = {}


def _worker_init(source: str, schema_dict: dict, name: str, config_dict: dict) -> None:
    _WORKER["subject"] = Subject.from_source(source, InputSchema.from_dict(schema_dict), name)
    _WORKER["config"] = CampaignConfig.from_dict(config_dict)


def _worker_run(k: int, jobs):
    return _execute_batch(_WORKER["subject"], _WORKER["config"], k, jobs)


def _chunks(seq: list, n: int) -> Iterable[list]:
    size = -(-len(seq) // n)
    for i in range(0, len(seq), size):
        yield seq[i:i + size]


def _should_stop(report: CampaignReport, rule: StopRule, k_complete: int) -> bool:
    # Stops only once every shape is admitted and the llp plateau is confirmed.
    k_l = detect_k_longest(report)
    if k_l is None:
        return False
    if rule.type == "longest-path":
        return True
    if rule.type == "saturation":
        k_s = detect_k_saturation(report, rule.window, max(k_l, k_complete - 1))
        return k_s is not None
    return False


def run_campaign(subject: Subject, config: CampaignConfig, *, workers: int = 1,
                 stable_time: bool = False, progress=None):
    """Run a campaign; returns ``(CampaignReport, PathSet)``.

    Per-input failures (sampler or interpreter) are counted in
    ``report.skipped``; only configuration problems raise.
    """
    config.validate()
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    schedule = Schedule(subject, config)
    paths = PathSet(subject.table)
    report = CampaignReport(subject.name, [], config.stop_rule.window, config=config.to_dict())
    pool = None
    if workers > 1:
        pool = ProcessPoolExecutor(
            max_workers=workers, initializer=_worker_init,
            initargs=(subject.source, subject.schema.to_dict(), subject.name, config.to_dict()))
    cursor = 0
    test_cases = 0
    k_complete = None
    try:
        for k in range(config.k_max + 1):
            t0 = time.perf_counter()
            shapes = schedule.admissible(k)
            plan, cursor = plan_batch(shapes, config.batch, cursor)
            jobs = list(enumerate(plan))
            if pool is None:
                results = _execute_batch(subject, config, k, jobs)
            else:
                futures = [pool.submit(_worker_run, k, chunk) for chunk in _chunks(jobs, workers)]
                results = [r for f in futures for r in f.result()]
            results.sort(key=lambda r: r[0])
            before = len(paths)
            for _, key, inp, cost in results:
                if key is None:
                    report.skipped += 1
                else:
                    paths.insert(key, inp, k, cost)
            test_cases += config.batch
            elapsed = 0.0 if stable_time else round((time.perf_counter() - t0) * 1000, 3)
            report.rows.append(CampaignRow(k, test_cases, len(paths), len(paths) - before,
                                           paths.max_length(), elapsed))
            if progress is not None:
                progress(report.rows[-1])
            if k_complete is None and schedule.complete(k):
                k_complete = k
            if k_complete is not None and _should_stop(report, config.stop_rule, k_complete):
                report.stop_reason = config.stop_rule.type
                break
        else:
            report.stop_reason = "k-max"
    finally:
        if pool is not None:
            pool.shutdown()
    return report, paths
