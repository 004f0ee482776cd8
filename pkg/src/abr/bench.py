"""Benchmark protocol and the materialize workflow.

Measurement follows a warm-cache discipline: a fixed number of unrecorded
warmup runs, then the measured trials.  Each measured latency is
compileTime + execTime for that run (compilation overhead is part of the
reported number).  The reference backend has no compile step; its
compileTime is reported as zero.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from . import compiled, reference
from .plan import LogicalPlan, QueryBuilder
from .result import ResultTable
from .store import Database

Z_95 = 1.959963984540054  # two-sided 95% normal quantile


def _as_plan(query, db: Database) -> LogicalPlan:
    if isinstance(query, QueryBuilder):
        return query.to_plan(db.schemas())
    return query


def run_query(query, db: Database, backend: str = "compiled"):
    """Execute once; returns (ResultTable, compile_seconds, exec_seconds)."""
    plan = _as_plan(query, db)
    if backend == "compiled":
        kernel = compiled.compile_plan(plan, db)
        result, exec_s = compiled.execute(kernel, db)
        return result, kernel.compile_time, exec_s
    if backend == "reference":
        t0 = time.perf_counter()
        result = reference.eval_plan(plan, db)
        return result, 0.0, time.perf_counter() - t0
    raise ValueError(f"unknown backend {backend!r}")


def materialize(query, db: Database, name: str, backend: str = "compiled"):
    """Run a query and save its result as table ``name`` in a successor
    sealed database; the original database is untouched.

    Returns (successor_db, row_count).
    """
    result, _, _ = run_query(query, db, backend)
    succ = db.copy_for_append()
    n = result.ingest_into(succ, name)
    return succ.seal(), n


@dataclass
class BenchReport:
    query_id: str
    backend: str
    warmup_runs: int
    runs: list[tuple[float, float]] = field(default_factory=list)  # seconds
    result_rows: int = 0

    @property
    def totals_ms(self) -> list[float]:
        return [(c + e) * 1000.0 for c, e in self.runs]

    @property
    def mean_ms(self) -> float:
        t = self.totals_ms
        return sum(t) / len(t)

    @property
    def std_ms(self) -> float:
        t = self.totals_ms
        if len(t) < 2:
            return 0.0
        m = self.mean_ms
        return math.sqrt(sum((x - m) ** 2 for x in t) / (len(t) - 1))

    @property
    def ci95_ms(self) -> float | None:
        """95% confidence half-width, normal approximation."""
        if len(self.runs) < 2:
            return None
        return Z_95 * self.std_ms / math.sqrt(len(self.runs))

    def to_json(self) -> dict:
        return {
            "query": self.query_id,
            "backend": self.backend,
            "warmupRuns": self.warmup_runs,
            "measuredRuns": len(self.runs),
            "runs": [
                {
                    "compileMs": c * 1000.0,
                    "execMs": e * 1000.0,
                    "totalMs": (c + e) * 1000.0,
                }
                for c, e in self.runs
            ],
            "meanMs": self.mean_ms,
            "stdMs": self.std_ms,
            "ci95Ms": self.ci95_ms,
            "rows": self.result_rows,
            "ciMethod": "normal approximation, 95%",
        }

    def to_text(self) -> str:
        lines = [
            f"query {self.query_id}  backend={self.backend}  "
            f"warmup={self.warmup_runs}  trials={len(self.runs)}  "
            f"rows={self.result_rows}",
            "latency = compile + execute; CI: normal approximation, 95%",
            f"{'run':>4} {'compile_ms':>12} {'exec_ms':>12} {'total_ms':>12}",
        ]
        for i, (c, e) in enumerate(self.runs, 1):
            lines.append(
                f"{i:>4} {c * 1000:>12.3f} {e * 1000:>12.3f} {(c + e) * 1000:>12.3f}"
            )
        ci = "n/a" if self.ci95_ms is None else f"{self.ci95_ms:.3f}"
        lines.append(
            f"mean {self.mean_ms:.3f} ms   std {self.std_ms:.3f} ms   ci95 +/- {ci} ms"
        )
        return "\n".join(lines)


def run_bench(
    query,
    db: Database,
    query_id: str,
    backend: str = "compiled",
    warmup: int = 5,
    trials: int = 5,
) -> BenchReport:
    """Warm-cache protocol: ``warmup`` unrecorded runs, then ``trials``
    measured runs, strictly sequential."""
    plan = _as_plan(query, db)
    report = BenchReport(query_id, backend, warmup)
    for _ in range(warmup):
        run_query(plan, db, backend)
    for _ in range(trials):
        result, compile_s, exec_s = run_query(plan, db, backend)
        report.runs.append((compile_s, exec_s))
        report.result_rows = result.row_count
    return report
