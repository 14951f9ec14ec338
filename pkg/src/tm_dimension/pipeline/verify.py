"""Theorem and finding checks over a results directory.

Findings 0 to 5 are tallied. Universal assertions are theorems and must hold
for every machine; a single FAILS verdict on one of them is a violation:

    * d never exceeds the space-time bound 1 + liminf log s / log t
    * d >= 1 wherever s / t vanishes
    * an exact nonzero c_tau forces d to equal the bound
    * log N / log(s t) tends to 1 for machines with full models
    * measured s / t decreases on super-linear branches
    * counting the halting row in N leaves d unchanged

The (3,2) Busy Beaver pair is also checked against its exact recurrences,
and the tape-identity machine against the quadratic bound under the
alternative input coding.
"""

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import structlog

from tm_dimension.dimension.busy_beaver import BB_MACHINE, BB_TWIN, first_recurrence_mismatch
from tm_dimension.dimension.limits import UNKNOWN_LIMIT, agrees, parse_limit
from tm_dimension.dimension.report import Finding, FindingVerdict
from tm_dimension.models import DimensionRecord
from tm_dimension.pipeline.rho import RhoReport, rho_experiment
from tm_dimension.store.results import Results, load_results

logger = structlog.get_logger(__name__)

TALLIED = (Finding.F0, Finding.F1, Finding.F2, Finding.F3, Finding.F4, Finding.F5, Finding.LOG_RATIO_CONVERGENCE)
UNIVERSAL = (
    Finding.SPACE_TIME_THEOREM,
    Finding.VANISHING_RATIO_LOWER_BOUND,
    Finding.NONZERO_C_TAU_UPPER_BOUND,
    Finding.F2,
    Finding.MEASURED_RATIO_DECREASES,
)
COUNTING_CONVENTION = "counting_convention_invariance"
BB_RECURRENCE = "busy_beaver_recurrence"
BB_SPACE = "3,2"
RHO_BOUND = "rho_output_quadratic"


class Violation(NamedTuple):
    machine: int
    assertion: str
    detail: str


@dataclass
class VerifyReport:
    tallies: dict[str, Counter[str]] = field(default_factory=lambda: defaultdict(Counter))
    violations: list[Violation] = field(default_factory=list)
    checked: int = 0
    partial: bool = False
    rho: RhoReport | None = None

    @property
    def ok(self) -> bool:
        return not self.violations


def _convention_violation(record: DimensionRecord) -> Violation | None:
    d, alternative = parse_limit(record.d), parse_limit(record.d_final_row)
    if d is UNKNOWN_LIMIT or alternative is UNKNOWN_LIMIT or agrees(d, alternative) is not False:
        return None
    return Violation(record.machine, COUNTING_CONVENTION, f"d={record.d} but {record.d_final_row} with the halting row")


def _busy_beaver_violations(results: Results) -> list[Violation]:
    if results.manifest.job.space != BB_SPACE:
        return []
    violations = []
    runs_by_machine: dict[int, list[tuple[int, int, int, int]]] = defaultdict(list)
    for record in results.runs:
        if record.machine in (BB_MACHINE, BB_TWIN) and record.halted:
            runs_by_machine[record.machine].append((record.x, int(record.s), int(record.t), int(record.N)))
    for machine, rows in runs_by_machine.items():
        rows.sort()
        xs, space, time, boxes = (list(column) for column in zip(*rows, strict=True))
        mismatch = first_recurrence_mismatch(xs, space, time, boxes)
        if mismatch is not None:
            violations.append(Violation(machine, BB_RECURRENCE, f"t or N differs from the recurrence at x={mismatch}"))
    return violations


def _rho_violation(rho: RhoReport) -> Violation | None:
    if rho.ok:
        return None
    if not rho.injective:
        detail = "rho coding is not injective"
    elif not rho.identity:
        detail = "output differs from the input tape"
    else:
        detail = f"value > {rho.constant} * a**2 at a=" + ",".join(map(str, rho.exceeding))
    return Violation(rho.machine, RHO_BOUND, detail)


def verify_results(results: Results, rho: RhoReport | None = None) -> VerifyReport:
    """Tally findings and collect violations of universal assertions, weighted by twin-class size."""
    report = VerifyReport(partial=results.partial, rho=rho)
    for record in results.dimensions:
        if record.undefined:
            continue
        report.checked += record.class_size
        for finding in TALLIED:
            verdict = record.findings.get(finding.value, FindingVerdict.INDETERMINATE.value)
            report.tallies[finding.value][verdict] += record.class_size
        for finding in UNIVERSAL:
            if record.findings.get(finding.value) == FindingVerdict.FAILS.value:
                detail = f"d={record.d} bound={record.upper_bound}"
                report.violations.append(Violation(record.machine, finding.value, detail))
        violation = _convention_violation(record)
        if violation is not None:
            report.violations.append(violation)
    report.violations.extend(_busy_beaver_violations(results))
    if rho is not None and (violation := _rho_violation(rho)) is not None:
        report.violations.append(violation)
    for violation in report.violations:
        logger.error(
            "assertion_violated", machine=violation.machine, assertion=violation.assertion, detail=violation.detail
        )
    logger.info("verify_finished", checked=report.checked, violations=len(report.violations), partial=report.partial)
    return report


def run_verify(root: Path, rho: bool = True) -> VerifyReport:
    return verify_results(load_results(root), rho_experiment() if rho else None)
