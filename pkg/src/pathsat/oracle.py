"""Exhaustive path enumeration on tiny domains, and closed-form predictions
of k_L, k_S and l_max for the bundled constructs."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .campaign import CampaignReport, PathSet
from .interp import DEFAULT_STEP_BUDGET, ExecutionError
from .schema import Shape, all_shapes, element_count, enumerate_inputs, resolve_shape
from .subject import Subject

DEFAULT_CAP = 10 ** 7
CONSTRUCTS = ("linear", "bubble", "matrix", "merge")


class OracleTooLarge(ValueError):
    pass


class UnknownConstruct(ValueError):
    pass


def enumerate_feasible_paths(subject: Subject, shape: Shape, d: int, *, cap: int = DEFAULT_CAP,
                             step_budget: int = DEFAULT_STEP_BUDGET,
                             paths: Optional[PathSet] = None) -> PathSet:
    """Run every input of ``shape`` over ``[0, d)`` and collect the distinct paths.

    Inputs that fault are not feasible complete paths and are skipped.
    """
    n = element_count(subject.schema, shape)
    if d ** n > cap:
        raise OracleTooLarge(f"{d}^{n} inputs exceeds the cap of {cap}")
    exe = subject.executable
    if paths is None:
        paths = PathSet(subject.table)
    for inp in enumerate_inputs(subject.schema, shape, d):
        try:
            trace, _ = exe.run(inp, step_budget)
        except ExecutionError:
            continue
        key = exe.render(trace)
        if key not in paths:
            paths.insert(key, inp, 0, exe.cost(trace))
    return paths


def enumerate_shape_space(subject: Subject, max_size, d: int, *, cap: int = DEFAULT_CAP) -> PathSet:
    """Union of :func:`enumerate_feasible_paths` over every shape within max_size."""
    shapes = all_shapes(subject.schema, max_size)
    total = sum(d ** element_count(subject.schema, s) for s in shapes)
    if total > cap:
        raise OracleTooLarge(f"{total} inputs exceeds the cap of {cap}")
    paths = PathSet(subject.table)
    for shape in shapes:
        enumerate_feasible_paths(subject, shape, d, cap=cap, paths=paths)
    return paths


def longest_feasible_path(subject: Subject, shape: Shape, d: int, *, cap: int = DEFAULT_CAP):
    """Maximum-length path for the shape (ties: lexicographically smallest)."""
    paths = enumerate_feasible_paths(subject, shape, d, cap=cap)
    if not len(paths):
        raise ValueError("no feasible path for this shape")
    key = min(paths, key=lambda p: (-paths[p].length, p))
    return key, paths[key].length


# ----------------------------------------------------------------- heuristics

@dataclass(frozen=True)
class HeuristicEntry:
    construct: str
    dims: tuple
    k_l: int
    k_s: Optional[int]  # None: no closed form (grows stochastically)
    l_max: int

    def to_dict(self) -> dict:
        return {"construct": self.construct, "dims": list(self.dims), "k_l": self.k_l,
                "k_s": self.k_s, "l_max": self.l_max}


def bubble_k_longest_recurrence(n: int) -> int:
    """k_L for bubble sort built up one element at a time:
    k_L(n) = k_L(n - 1) + (n - 1), with k_L(1) = 0."""
    k = 0
    for size in range(2, n + 1):
        k += size - 1
    return k


def predict(construct: str, dims) -> HeuristicEntry:
    """Closed-form k_L, k_S and l_max.

    ``dims`` is ``(n,)`` for linear and bubble (true element count),
    ``(m, n, q)`` for matrix (a is m x n, b is n x q) and ``(n,)`` or
    ``(n, n)`` for merge.  k_L is the cost of the longest path in
    innermost-loop body executions.
    """
    dims = tuple(int(x) for x in (dims if isinstance(dims, (tuple, list)) else (dims,)))
    if any(x < 1 for x in dims):
        raise ValueError(f"dims must be positive, got {dims}")
    if construct == "linear":
        (n,) = dims
        return HeuristicEntry("linear", dims, n, n + 1, 2 * n + 1)
    if construct == "bubble":
        (n,) = dims
        k_l = n * (n - 1) // 2
        return HeuristicEntry("bubble", dims, k_l, k_l + 1, (n - 1) * (n + 2) + 1)
    if construct == "matrix":
        m, n, q = dims
        k_l = m * n * q
        return HeuristicEntry("matrix", dims, k_l, k_l + 1, m * (2 + q * (n + 2)) + 1)
    if construct == "merge":
        if len(dims) == 2 and dims[0] != dims[1]:
            raise ValueError("merge predictions cover equal-length inputs only")
        n = dims[0]
        return HeuristicEntry("merge", (n, n), 2 * n, None, 4 * n + 2)
    raise UnknownConstruct(construct)


def measured_entry(report: CampaignReport, construct: str, dims) -> HeuristicEntry:
    dims = tuple(dims) if isinstance(dims, (tuple, list)) else (dims,)
    if construct == "merge" and len(dims) == 1:
        dims = (dims[0], dims[0])
    return HeuristicEntry(construct, dims, report.k_longest, report.k_saturation, report.l_max)


def shape_for_dims(subject: Subject, dims) -> Shape:
    """Translate construct dims into a concrete shape of the bundled schema."""
    construct = subject.construct
    free = subject.schema.free_sizes
    dims = tuple(dims)
    if construct == "matrix":
        m, n, q = dims
        values = {"m": m, "n": n, "q": q}
    elif construct == "merge":
        values = dict(zip(free, dims if len(dims) == 2 else dims * 2))
    else:
        values = dict(zip(free, dims))
    return resolve_shape(subject.schema, values)


def max_size_for_dims(subject: Subject, dims):
    """Per-parameter caps matching :func:`shape_for_dims`."""
    shape = shape_for_dims(subject, dims)
    return {name: shape[name] for name in subject.schema.free_sizes}
