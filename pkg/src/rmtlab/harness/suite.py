"""Run every acceptance criterion and print a traceability table."""
from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field

from .criteria import CRITERIA, CriterionResult, PASS, FAIL
from .io import ResultRow

SUITE_RUNTIME_LIMIT = 30 * 60.0


@dataclass
class SuiteResult:
    criteria: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def rows(self) -> list:
        return [r for c in self.criteria for r in c.rows]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)

    def summary(self) -> dict:
        return {str(c.cid): {"title": c.title, "passed": c.passed, "rows": len(c.rows),
                             "seconds": round(c.seconds, 3)} for c in self.criteria}


def traceability_table(result: SuiteResult) -> str:
    lines = [f"{'#':>2}  {'verdict':7}  {'rows':>9}  {'time':>8}  statement -> check"]
    for c in result.criteria:
        ok = sum(r.verdict == PASS for r in c.rows)
        lines.append(f"{c.cid:>2}  {'PASS' if c.passed else 'FAIL':7}  {ok:>4}/{len(c.rows):<4}  "
                     f"{c.seconds:7.1f}s  {c.claim} -> {c.title}")
        for r in c.failing:
            lines.append(f"      failing: {r.check} (N={r.N}, a={r.a}, K={r.K}) measured={r.measured} "
                         f"formula={r.formula} residual={r.residual} budget={r.budget}")
    lines.append(f"total {result.seconds:.1f}s: {'ALL PASS' if result.passed else 'FAILURES'}")
    return "\n".join(lines)


def verify_suite(quick: bool = False, seed: int = 20_240_601, workers: int = 1,
                 only=None, stream=None) -> SuiteResult:
    """Run the criteria (all, or the ids in ``only``) and print the table to ``stream``."""
    stream = sys.stdout if stream is None else stream
    t0 = time.perf_counter()
    result = SuiteResult()
    for fn in CRITERIA:
        cid = CRITERIA.index(fn) + 1
        if only is not None and cid not in only:
            continue
        res = fn(quick=quick, seed=seed, workers=workers)
        result.criteria.append(res)
        print(f"criterion {cid}: {'PASS' if res.passed else 'FAIL'} ({res.seconds:.1f}s) {res.title}",
              file=stream, flush=True)
    result.seconds = time.perf_counter() - t0
    suite_row = next((c for c in result.criteria if c.cid == 9), None)
    if suite_row is not None and only is None:
        limit = 120.0 if quick else SUITE_RUNTIME_LIMIT
        suite_row.rows.append(ResultRow("criterion-9", f"full suite runtime <= {limit:g} s",
                                        PASS if result.seconds <= limit else FAIL))
    print(traceability_table(result), file=stream, flush=True)
    return result


__all__ = ["verify_suite", "SuiteResult", "CriterionResult", "traceability_table"]
