"""Mining a machine space.

Every scheduled machine is simulated on the job's inputs, its t, s and N
sequences are fitted and its dimension report is computed. Workers share
nothing: each task carries the machine number, its twin class size and the
job, and returns plain records that only the parent writes.
"""

import os
from collections import Counter
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from multiprocessing import Pool
from pathlib import Path
from typing import NamedTuple

import structlog

from tm_dimension import __version__
from tm_dimension.analysis.guess import MIN_SEQUENCE_TERMS, FitReport, fit_sequence, with_ratio_fallback
from tm_dimension.analysis.sequence_models import Domain, PeriodicSplit
from tm_dimension.dimension.limits import format_limit
from tm_dimension.dimension.report import DimensionReport, dimension_report
from tm_dimension.machines.numbering import canonical_twin, decode, enumerate_space, sample_machines, twin_class
from tm_dimension.machines.table import TransitionTable
from tm_dimension.machines.tapes import unary_input
from tm_dimension.models import DimensionRecord, FitRecord, MiningJob, RunRecord
from tm_dimension.protocol.loader import (
    get_enclosure_width,
    get_fitting_rules,
    get_known_c_tau_values,
    get_quasi_rules,
    get_ratio_rules,
    protocol_version,
)
from tm_dimension.simulation.simulator import RunMetrics, RunStatus, metrics_series, run, series_from_runs
from tm_dimension.store.results import ResultStore

logger = structlog.get_logger(__name__)

SEQUENCES = ("t", "s", "N", "N_final_row")
CHUNKSIZE = 64


class MachineResult(NamedTuple):
    runs: list[RunRecord]
    fits: list[FitRecord]
    dimension: DimensionRecord


@dataclass
class MiningSummary:
    scheduled: int = 0
    processed: int = 0
    skipped: int = 0
    undefined: int = 0
    unclassified: int = 0
    dropped: Counter[str] = field(default_factory=Counter)

    def add(self, record: DimensionRecord) -> None:
        self.processed += 1
        self.undefined += record.undefined
        self.unclassified += record.bucket == "unclassified" and not record.undefined
        self.dropped.update(record.dropped)


def scheduled_machines(job: MiningJob) -> Iterator[tuple[int, int]]:
    """(machine, class size) pairs to analyze.

    Explicit ids stand for themselves; with twin reduction they collapse to
    their least class members, each weighted by the listed ids it covers.
    A sample draws ``job.sample`` machines with ``job.seed``; with twin
    reduction the draws are least class members weighted by their class
    size. Otherwise the whole space is enumerated and, with twin reduction,
    only the least member of each twin class is kept.
    """
    space = job.machine_space
    if job.ids is not None:
        listed = list(dict.fromkeys(job.ids))
        for machine in listed:
            decode(machine, space)
        if not job.twin_reduction:
            yield from ((machine, 1) for machine in listed)
            return
        yield from Counter(canonical_twin(machine, space) for machine in listed).items()
        return
    if job.sample is not None:
        for machine in sample_machines(space, job.sample, job.seed, canonical=job.twin_reduction):
            yield machine, len(twin_class(machine, space)) if job.twin_reduction else 1
        return
    for machine in enumerate_space(space):
        if not job.twin_reduction:
            yield machine, 1
            continue
        members = twin_class(machine, space)
        if members[0] == machine:
            yield machine, len(members)


def fit_domain(points: Sequence[tuple[int, RunMetrics]], runs: Sequence[tuple[int, RunMetrics]]) -> int:
    """Index into ``points`` where the fitted stretch starts.

    The stretch is the longest tail of halted inputs in arithmetic
    progression. Inputs skipped inside it must be proven divergent; an input
    that merely ran out of budget limits the stretch to consecutive inputs.
    """
    xs = [x for x, _ in points]
    if len(xs) < 2:
        return 0
    stride = xs[-1] - xs[-2]
    start = len(xs) - 2
    while start > 0 and xs[start] - xs[start - 1] == stride:
        start -= 1
    if stride > 1:
        span = set(range(xs[start], xs[-1] + 1))
        if any(m.status is RunStatus.BUDGET_EXCEEDED for x, m in runs if x in span):
            start = len(xs) - 1
            while start > 0 and xs[start] - xs[start - 1] == 1:
                start -= 1
    return start


def _failed(domain: Domain, reason: str) -> FitReport:
    return FitReport(model=None, domain=domain, fitted_length=0, holdout=(), verdict="failed", chain=(reason,))


class _Analysis(NamedTuple):
    xs: list[int]
    measured: dict[str, list[int]]
    fits: dict[str, FitReport]


def _analyze(runs: Sequence[tuple[int, RunMetrics]], job: MiningJob) -> _Analysis | None:
    series = series_from_runs(runs)
    if series.undefined:
        return None
    points = list(series.points)
    start = fit_domain(points, runs)
    points = points[start:]
    xs = [x for x, _ in points]
    domain = Domain(xs[0], xs[1] - xs[0] if len(xs) > 1 else 1)
    measured = {
        "t": [m.t for _, m in points],
        "s": [m.s for _, m in points],
        "N": [m.N for _, m in points],
        "N_final_row": [m.N + m.final_row_black for _, m in points],
    }
    protocol = job.protocol
    fitting, quasi, ratio = get_fitting_rules(protocol), get_quasi_rules(protocol), get_ratio_rules(protocol)
    cells = [s + 1 for s in measured["s"]]
    references = {
        "t": [m for m in ratio.monomials if m[0] > 0 and m[1] == 0],
        "s": [m for m in ratio.monomials if m[0] == 0 and m[1] > 0],
        "N": list(ratio.monomials),
        "N_final_row": list(ratio.monomials),
    }
    fits: dict[str, FitReport] = {}
    for name in SEQUENCES:
        values = measured[name]
        if len(values) < MIN_SEQUENCE_TERMS:
            fits[name] = _failed(domain, f"too-short[{len(values)}]")
            continue
        report = fit_sequence(values, domain, fitting, quasi)
        fits[name] = with_ratio_fallback(
            report, values, cells, measured["t"], ratio, fitting.period_candidates, references[name]
        )
    return _Analysis(xs, measured, fits)


def _wants_extension(analysis: _Analysis) -> bool:
    return any(f.needs_more_terms or isinstance(f.model, PeriodicSplit) for f in analysis.fits.values())


def _extend(table: TransitionTable, time: FitReport, first: int, job: MiningJob) -> list[tuple[int, RunMetrics]]:
    """Halted runs on the fitted domain past ``first``.

    Stops at the first input whose predicted runtime exceeds the budget or
    whose run does not halt.
    """
    runs = []
    for x in range(first, job.extended_inputs + 1):
        if time.domain.index(x) is None:
            continue
        predicted = time.predict(x)
        if predicted is not None and predicted > job.budget:
            break
        metrics = run(table, unary_input(x), job.budget, job.escape_check)
        if not metrics.halted:
            logger.debug("extension_stopped", x=x, status=metrics.status.value)
            break
        runs.append((x, metrics))
    return runs


def analyze_machine(machine: int, class_size: int, job: MiningJob) -> MachineResult:
    """Simulate, fit and report one machine."""
    space = job.machine_space
    table: TransitionTable = decode(machine, space)
    inputs = job.input_range
    series = metrics_series(table, inputs, job.budget, job.escape_check)
    runs = list(series.runs)
    run_records = [RunRecord.from_metrics(machine, x, m) for x, m in runs]
    analysis = _analyze(runs, job)
    if analysis is None:
        record = DimensionRecord(machine=machine, class_size=class_size, undefined=True, dropped=series.dropped)
        return MachineResult(run_records, [], record)

    extended = False
    if job.extended_inputs >= inputs.stop and _wants_extension(analysis):
        more = _extend(table, analysis.fits["t"], inputs.stop, job)
        if more:
            analysis = _analyze([*runs, *more], job) or analysis
            extended = True

    protocol = job.protocol
    fitting = get_fitting_rules(protocol)
    report = dimension_report(
        machine,
        analysis.fits,
        analysis.xs,
        analysis.measured,
        states=space.states,
        rules=get_ratio_rules(protocol),
        periods=fitting.period_candidates,
        width=get_enclosure_width(protocol),
        known_c_tau=get_known_c_tau_values(protocol),
        boxes_with_final_row=analysis.fits["N_final_row"],
    )
    fit_records = [_fit_record(machine, name, analysis.fits[name], extended) for name in SEQUENCES]
    dimension = _dimension_record(report, class_size, len(series.points), series.dropped)
    return MachineResult(run_records, fit_records, dimension)


def _fit_record(machine: int, name: str, report: FitReport, extended: bool) -> FitRecord:
    return FitRecord(
        machine=machine,
        sequence=name,
        model=report.notation(),
        verdict=report.verdict,
        fitted_length=report.fitted_length,
        dropped=[str(v) for v in report.dropped],
        holdout=list(report.holdout),
        chain=list(report.chain),
        refit=report.refit,
        extended=extended,
        closed_form=report.closed_form.notation() if report.closed_form is not None else None,
    )


def _dimension_record(
    report: DimensionReport, class_size: int, halted: int, dropped: dict[str, int]
) -> DimensionRecord:
    return DimensionRecord(
        machine=report.machine,
        class_size=class_size,
        halted_inputs=halted,
        dropped=dropped,
        classes={"t": str(report.time), "s": str(report.space), "N": str(report.boxes)},
        d=format_limit(report.d),
        upper_bound=format_limit(report.upper),
        d_final_row=format_limit(report.d_final_row),
        c_tau=str(report.c_tau),
        c_tau_exact=report.c_tau.exact,
        bucket=report.bucket.value,
        constant_time=report.constant_time,
        log_ratios=list(report.log_ratios),
        findings={k.value: v.value for k, v in report.findings.items()},
    )


def _task(args: tuple[int, int, MiningJob]) -> MachineResult:
    machine, class_size, job = args
    return analyze_machine(machine, class_size, job)


def mine(job: MiningJob, out: Path, workers: int = 0) -> MiningSummary:
    """Run a mining job into ``out``, resuming whatever is already complete there.

    Args:
        job: Space, inputs, budget and protocol.
        out: Results directory.
        workers: Worker processes; 0 uses one per CPU, 1 runs in-process.

    Returns:
        Tallies of processed, skipped, undefined and unclassified machines.

    Raises:
        ResultStoreError: ``out`` is unwritable or holds a different job.
    """
    store = ResultStore(out, job, protocol_version(job.protocol), __version__)
    machines = list(scheduled_machines(job))
    store.set_machine_count(len(machines))
    pending = [(m, size, job) for m, size in machines if m not in store.completed]
    summary = MiningSummary(scheduled=len(machines), skipped=len(machines) - len(pending))
    logger.info("mining_started", space=job.space, machines=len(machines), pending=len(pending), inputs=job.inputs)

    processes = workers or os.cpu_count() or 1
    if processes == 1 or len(pending) <= 1:
        results: Iterator[MachineResult] = map(_task, pending)
        for result in results:
            store.record(*result)
            summary.add(result.dimension)
    else:
        with Pool(processes) as pool:
            for result in pool.imap_unordered(_task, pending, chunksize=CHUNKSIZE):
                store.record(*result)
                summary.add(result.dimension)

    store.finalize()
    logger.info(
        "mining_finished",
        processed=summary.processed,
        skipped=summary.skipped,
        undefined=summary.undefined,
        unclassified=summary.unclassified,
        dropped=dict(summary.dropped),
    )
    return summary
