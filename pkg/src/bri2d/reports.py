"""Report records for scenario runs: estimates with confidence intervals,
comparators with provenance, and a pure verdict rule.

Proportions carry Wilson intervals, means carry normal intervals, both at
99%.  A report's verdict is a function of (estimate, interval, comparator,
tolerance) only, so re-running with the same numbers always reproduces the
same verdict, and the rule text rides along in the record.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass

Z99 = 2.5758293035489004  # two-sided 99% normal quantile

CSV_HEADER = ["scenario", "point", "estimate", "ci_low", "ci_high",
              "ci_kind", "comparator", "provenance", "tolerance", "rule",
              "verdict", "wall_time"]


@dataclass(frozen=True)
class EstimateReport:
    """One parameter point of one scenario."""

    scenario: str
    point: str
    estimate: float
    ci_low: float
    ci_high: float
    ci_kind: str
    comparator: float | None
    provenance: str
    tolerance: float | None
    rule: str
    verdict: str
    wall_time: float

    def __post_init__(self):
        if not (self.ci_low <= self.estimate <= self.ci_high):
            raise ValueError("estimate outside its own interval")
        if self.verdict not in ("pass", "fail", "indeterminate"):
            raise ValueError("verdict must be pass, fail or indeterminate")


def wilson_interval(successes: int, n: int, z: float = Z99):
    """Wilson score interval for a proportion."""
    if n <= 0:
        raise ValueError("need a positive sample count")
    if not 0 <= successes <= n:
        raise ValueError("successes outside [0, n]")
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = (z / denom) * math.sqrt(phat * (1 - phat) / n
                                   + z * z / (4 * n * n))
    return max(center - half, 0.0), min(center + half, 1.0)


def normal_interval(mean: float, sd: float, n: int, z: float = Z99):
    """Normal interval for a sample mean."""
    if n <= 0:
        raise ValueError("need a positive sample count")
    half = z * sd / math.sqrt(n)
    return mean - half, mean + half


def verdict_within(estimate: float, comparator: float,
                   tolerance: float) -> str:
    """pass iff the estimate sits within tolerance of the comparator."""
    if not math.isfinite(estimate) or not math.isfinite(comparator):
        return "indeterminate"
    return "pass" if abs(estimate - comparator) <= tolerance else "fail"


def verdict_flag(ok: bool | None) -> str:
    """pass/fail from a boolean check; None means indeterminate."""
    if ok is None:
        return "indeterminate"
    return "pass" if ok else "fail"


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def write_reports(reports: list[EstimateReport], out_dir: str) -> None:
    """Emit report.csv (flat, fixed header) and report.json (nested by
    scenario) into ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_HEADER)
        for r in reports:
            d = asdict(r)
            w.writerow([_fmt(d[k]) for k in CSV_HEADER])
    nested: dict[str, list[dict]] = {}
    for r in reports:
        d = asdict(r)
        nested.setdefault(d.pop("scenario"), []).append(d)
    with open(os.path.join(out_dir, "report.json"), "w") as f:
        json.dump({"scenarios": nested}, f, indent=1)
        f.write("\n")


def overall_exit_code(reports: list[EstimateReport]) -> int:
    """0 when everything passed, 2 on any fail, 3 on indeterminate-only
    deviations."""
    verdicts = {r.verdict for r in reports}
    if "fail" in verdicts:
        return 2
    if "indeterminate" in verdicts:
        return 3
    return 0
