"""Interpreter throughput harness."""
from __future__ import annotations

import time

from .campaign import input_rng
from .schema import resolve_shape, sample_input
from .subject import load_subject


def throughput(subject_ref: str = "bubble", size: int = 20, *, domain: int = 1000,
               min_seconds: float = 1.0, min_runs: int = 200, seed: int = 1) -> dict:
    """Executions per second, counting input sampling, execution and rendering."""
    subject = load_subject(subject_ref)
    exe = subject.executable
    shape = resolve_shape(subject.schema, {n: size for n in subject.schema.free_sizes})
    runs = 0
    total_events = 0
    start = time.perf_counter()
    while True:
        inp = sample_input(subject.schema, shape, domain, input_rng(seed, 0, runs))
        trace, _ = exe.run(inp)
        exe.render(trace)
        total_events += len(trace)
        runs += 1
        elapsed = time.perf_counter() - start
        if runs >= min_runs and elapsed >= min_seconds:
            break
    return {
        "subject": subject.name,
        "size": size,
        "runs": runs,
        "seconds": round(elapsed, 4),
        "executions_per_second": runs / elapsed,
        "mean_path_length": total_events / runs,
    }
