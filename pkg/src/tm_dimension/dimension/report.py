"""Dimension reports.

Turns the fitted t, s and N models of one machine into its box dimension
d, the space-time upper bound 1 + liminf log s / log t, the limit c_tau of
N / (cells * t), a complexity bucket and verdicts for the findings checked
against the data. Cell counts (s + 1) stand in for s wherever a ratio is
formed; the limits are the same.
"""

import logging
import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from tm_dimension._compat import StrEnum
from fractions import Fraction
from typing import Final

import mpmath
import sympy as sp
from sympy.polys.polyerrors import BasePolynomialError

from tm_dimension.analysis.fitters import closed_form, ratio_fallback
from tm_dimension.analysis.guess import FitReport
from tm_dimension.analysis.sequence_models import N as POSITION
from tm_dimension.analysis.sequence_models import CFinite, PeriodicSplit, to_fraction
from tm_dimension.dimension.growth import (
    UNKNOWN_GROWTH,
    Growth,
    GrowthClass,
    GrowthKind,
    aligned,
    combine,
    growth_class,
)
from tm_dimension.dimension.limits import (
    DEFAULT_WIDTH,
    INFINITY,
    UNKNOWN_LIMIT,
    Enclosure,
    Limit,
    agrees,
    at_most,
    format_limit,
    log_limit,
)
from tm_dimension.protocol.loader import RatioRules

logger = logging.getLogger(__name__)

MIN_RATIO_POINTS: Final = 10
CONVERGENCE_POINTS: Final = (10**3, 10**4, 10**5)
CONVERGENCE_TOLERANCE: Final = Fraction(1, 100)

_J = sp.Symbol("j", positive=True)
_BASE_TIE = sp.Float("1e-30", 60)


class Bucket(StrEnum):
    CONSTANT = "constant"
    LINEAR = "linear"
    QUADRATIC = "O(n^2) time, O(n) space"
    CUBIC = "O(n^3) time, O(n) space"
    EXP_LINEAR = "EXP time, linear space"
    EXP_EXP = "EXP time, EXP space"
    OTHER_SUPER_POLYNOMIAL = "other super-polynomial"
    OTHER_POLYNOMIAL = "other polynomial"
    UNCLASSIFIED = "unclassified"


class FindingVerdict(StrEnum):
    HOLDS = "holds"
    FAILS = "fails"
    INDETERMINATE = "indeterminate"
    NOT_APPLICABLE = "not_applicable"
    NOVEL_VALUE = "novel_value"


class Finding(StrEnum):
    """Keys of :attr:`DimensionReport.findings`."""

    F0 = "f0_lower_bound_and_vanishing_ratio"
    F1 = "f1_upper_bound_attained"
    F2 = "f2_boxes_fill_space_time"
    F3 = "f3_c_tau_in_unit_interval"
    F4 = "f4_dimension_one_iff_superpoly_time_poly_space"
    F5 = "f5_dimension_two_iff_linear_time"
    LOWER_BOUND = "dimension_at_least_one"
    SPACE_TIME_RATIO = "space_over_time_vanishes"
    SPACE_TIME_THEOREM = "dimension_within_space_time_bound"
    VANISHING_RATIO_LOWER_BOUND = "vanishing_ratio_implies_dimension_at_least_one"
    NONZERO_C_TAU_UPPER_BOUND = "nonzero_c_tau_implies_bound_attained"
    MEASURED_RATIO_DECREASES = "measured_space_over_time_decreases"
    LOG_RATIO_CONVERGENCE = "log_ratio_convergence"


def _verdict(value: bool | None) -> FindingVerdict:
    if value is None:
        return FindingVerdict.INDETERMINATE
    return FindingVerdict.HOLDS if value else FindingVerdict.FAILS


def _both(left: FindingVerdict, right: FindingVerdict) -> FindingVerdict:
    verdicts = {left, right} - {FindingVerdict.NOT_APPLICABLE}
    if FindingVerdict.FAILS in verdicts:
        return FindingVerdict.FAILS
    if FindingVerdict.INDETERMINATE in verdicts:
        return FindingVerdict.INDETERMINATE
    return FindingVerdict.HOLDS if verdicts else FindingVerdict.NOT_APPLICABLE


def _equals(limit: Limit, value: int) -> bool | None:
    """Enclosures only arise for irrational limits, so they never equal an integer."""
    if isinstance(limit, Fraction):
        return limit == value
    if isinstance(limit, Enclosure):
        return False
    return None if limit is UNKNOWN_LIMIT else False


# -----------------------------------------------------------------------------
# d and the space-time bound
# -----------------------------------------------------------------------------


def dimension(boxes: Growth, time: Growth, width: Fraction = DEFAULT_WIDTH) -> Limit:
    """d = liminf log N / log t, or 2 when t is eventually constant."""
    if time.all_constant():
        return Fraction(2)
    limit = log_limit(boxes, time, width)
    if limit is INFINITY:
        # N <= cells * t rules this out; a model disagreeing with it is not trusted.
        logger.warning("Box count outgrows runtime in %s / %s; dimension left unknown.", boxes, time)
        return UNKNOWN_LIMIT
    return limit


def upper_bound(cells: Growth, time: Growth, width: Fraction = DEFAULT_WIDTH) -> Limit:
    """1 + liminf log s / log t, capped at 2."""
    if time.all_constant():
        return Fraction(2)
    ratio = log_limit(cells, time, width)
    if ratio is UNKNOWN_LIMIT:
        return UNKNOWN_LIMIT
    if ratio is INFINITY:
        return Fraction(2)
    if isinstance(ratio, Fraction):
        return min(1 + ratio, Fraction(2))
    assert isinstance(ratio, Enclosure)
    bound = ratio.shifted(Fraction(1))
    if bound.lo >= 2:
        return Fraction(2)
    return Enclosure(bound.lo, min(bound.hi, Fraction(2)))


# -----------------------------------------------------------------------------
# c_tau
# -----------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class RatioLimit:
    """c_tau per residue branch. No branches means too few halted inputs."""

    branches: tuple[Fraction | Enclosure, ...]
    exact: bool

    @property
    def insufficient(self) -> bool:
        return not self.branches

    @property
    def value(self) -> Fraction | Enclosure | None:
        """The limit when every branch agrees, else None."""
        if self.insufficient or len(set(self.branches)) != 1:
            return None
        return self.branches[0]

    def __str__(self) -> str:
        if self.insufficient:
            return "insufficient"
        return "|".join(format_limit(b) for b in self.branches)


def _span(fit: FitReport) -> int:
    period = fit.model.period if isinstance(fit.model, PeriodicSplit) else 1
    return fit.domain.stride * period


def _branch_expression(fit: FitReport, x0: int, span: int) -> sp.Expr | None:
    """Model value at x = x0 + span * j as an expression in j."""
    model, index = fit.model, fit.domain.index(x0)
    if model is None or index is None:
        return None
    step = span // fit.domain.stride
    if isinstance(model, PeriodicSplit):
        model, index, step = model.branches[index % model.period], index // model.period, step // model.period
    if isinstance(model, CFinite):
        model = closed_form(model)
        if model is None:
            return None
    expression = model.expression()
    return None if expression is None else expression.subs(POSITION, index + step * _J)


def _limit_at_infinity(numerator: sp.Expr, denominator: sp.Expr) -> sp.Expr:
    try:
        top, bottom = sp.Poly(sp.expand(numerator), _J), sp.Poly(sp.expand(denominator), _J)
    except BasePolynomialError:
        return sp.limit(numerator / denominator, _J, sp.oo)
    if top.degree() < bottom.degree():
        return sp.Integer(0)
    if top.degree() > bottom.degree():
        return sp.oo
    return top.LC() / bottom.LC()


def exact_ratio_limit(boxes: FitReport, space: FitReport, time: FitReport) -> tuple[Fraction, ...] | None:
    """Branch-wise limit of N / ((s + 1) * t) from closed forms, or None."""
    fits = (boxes, space, time)
    if any(f.model is None for f in fits):
        return None
    span = math.lcm(*(_span(f) for f in fits))
    start = max(f.domain.start for f in fits)
    limits = []
    for x0 in range(start, start + span):
        if any(f.domain.index(x0) is None for f in fits):
            continue
        n_expr, s_expr, t_expr = (_branch_expression(f, x0, span) for f in fits)
        if n_expr is None or s_expr is None or t_expr is None:
            return None
        value = _limit_at_infinity(n_expr, (s_expr + 1) * t_expr)
        if not value.is_rational:
            return None
        limits.append(to_fraction(value))
    return tuple(limits) or None


def empirical_ratio_limit(
    boxes: Sequence[int],
    cells: Sequence[int],
    time: Sequence[int],
    rules: RatioRules,
    periods: Sequence[int],
) -> tuple[Enclosure, ...]:
    """Per-residue bands of N / (cells * t); a single last-terms band when no period is tight."""
    band = ratio_fallback(boxes, cells, time, ((1, 1),), periods, rules.window, rules.tolerance, rules.min_points)
    if band is not None:
        return tuple(Enclosure(lo, hi) for lo, hi in band.bands)
    tail = [Fraction(n, c * t) for n, c, t in zip(boxes, cells, time, strict=True)][-rules.window :]
    return (Enclosure(min(tail), max(tail)),)


def ratio_limit(
    fits: Mapping[str, FitReport],
    boxes: Sequence[int],
    cells: Sequence[int],
    time: Sequence[int],
    rules: RatioRules | None = None,
    periods: Sequence[int] = (1, 2, 3, 6),
) -> RatioLimit:
    """c_tau: exact from full models, else the empirical band.

    Args:
        fits: Fit reports keyed ``"t"``, ``"s"`` and ``"N"``.
        boxes: Measured N over the halted inputs.
        cells: Measured s + 1, aligned with ``boxes``.
        time: Measured t, aligned with ``boxes``.
        rules: Band window and tolerance.
        periods: Residue periods tried for the band.

    Returns:
        RatioLimit; insufficient below ten halted inputs.
    """
    rules = rules or RatioRules()
    if len(boxes) < MIN_RATIO_POINTS:
        return RatioLimit((), exact=False)
    exact = exact_ratio_limit(fits["N"], fits["s"], fits["t"])
    if exact is not None:
        return RatioLimit(exact, exact=True)
    return RatioLimit(empirical_ratio_limit(boxes, cells, time, rules, periods), exact=False)


# -----------------------------------------------------------------------------
# Buckets
# -----------------------------------------------------------------------------


def classify_bucket(time: Growth, space: Growth) -> Bucket:
    if not (time.known and space.known):
        return Bucket.UNCLASSIFIED
    if time.all_constant():
        return Bucket.CONSTANT
    t, s = time.dominant(), space.dominant()
    if t.is_at_most_linear():
        return Bucket.LINEAR
    if t.is_polynomial():
        if s.is_at_most_linear() and t.degree == 2:
            return Bucket.QUADRATIC
        if s.is_at_most_linear() and t.degree == 3:
            return Bucket.CUBIC
        return Bucket.OTHER_POLYNOMIAL
    if s.is_at_most_linear():
        return Bucket.EXP_LINEAR
    if s.kind is GrowthKind.EXP:
        return Bucket.EXP_EXP
    return Bucket.OTHER_SUPER_POLYNOMIAL


# -----------------------------------------------------------------------------
# Findings
# -----------------------------------------------------------------------------


def _vanishes(space: GrowthClass, time: GrowthClass) -> bool | None:
    """lim s / t = 0 on one branch."""
    if not (space.known and time.known):
        return None
    if time.kind is GrowthKind.CONSTANT:
        return False
    if space.kind is GrowthKind.CONSTANT:
        return True
    if time.kind is GrowthKind.POLY:
        return space.kind is GrowthKind.POLY and space.degree < time.degree
    if space.kind is GrowthKind.POLY:
        return True
    assert space.base is not None and time.base is not None
    s_base, t_base = space.base.value(), time.base.value()
    if abs(s_base - t_base) > _BASE_TIE:
        return bool(s_base < t_base)
    return space.degree < time.degree


def _super_linear_pairs(space: Growth, time: Growth) -> list[tuple[GrowthClass, GrowthClass]]:
    return [(s, t) for _, s, t in aligned(space, time) if not t.is_at_most_linear()]


def space_time_ratio(space: Growth, time: Growth) -> FindingVerdict:
    """s / t -> 0 on every branch where t is super-linear."""
    if not (space.known and time.known):
        return FindingVerdict.INDETERMINATE
    pairs = _super_linear_pairs(space, time)
    if not pairs:
        return FindingVerdict.NOT_APPLICABLE
    results = [_vanishes(s, t) for s, t in pairs]
    if False in results:
        return FindingVerdict.FAILS
    return FindingVerdict.INDETERMINATE if None in results else FindingVerdict.HOLDS


def measured_ratio_decreases(
    xs: Sequence[int], space: Sequence[int], time: Sequence[int], growth: Growth
) -> FindingVerdict:
    """Measured s / t at the last input of each super-linear branch is below its first value."""
    if not growth.known:
        return FindingVerdict.INDETERMINATE
    branches: dict[int, list[int]] = {}
    for k, x in enumerate(xs):
        index = growth.domain.index(x)
        if index is None or growth.classes[index % len(growth.classes)].is_at_most_linear():
            continue
        branches.setdefault(index % len(growth.classes), []).append(k)
    if not branches:
        return FindingVerdict.NOT_APPLICABLE
    for positions in branches.values():
        first, last = positions[0], positions[-1]
        if first != last and Fraction(space[last], time[last]) >= Fraction(space[first], time[first]):
            return FindingVerdict.FAILS
    return FindingVerdict.HOLDS


def _c_tau_verdict(c_tau: RatioLimit, known: frozenset[Fraction]) -> FindingVerdict:
    if c_tau.insufficient:
        return FindingVerdict.INDETERMINATE
    novel = False
    for branch in c_tau.branches:
        if isinstance(branch, Fraction):
            if not 0 < branch <= 1:
                return FindingVerdict.FAILS
            novel = novel or (bool(known) and branch not in known)
        elif branch.hi <= 0 or branch.lo > 1:
            return FindingVerdict.FAILS
    return FindingVerdict.NOVEL_VALUE if novel else FindingVerdict.HOLDS


@dataclass(frozen=True, slots=True)
class LogRatioCheck:
    values: tuple[float, ...]
    verdict: FindingVerdict


def _log(value: Fraction) -> mpmath.mpf:
    return mpmath.log(value.numerator) - mpmath.log(value.denominator)


def check_log_ratio_convergence(
    f: Callable[[int], Fraction | None],
    g: Callable[[int], Fraction | None],
    points: Sequence[int] = CONVERGENCE_POINTS,
    tolerance: Fraction = CONVERGENCE_TOLERANCE,
) -> LogRatioCheck:
    """log f / log g at growing inputs must approach 1 monotonically.

    For f / g -> 1 the log-ratio tends to 1 as well; the last point has to be
    within ``tolerance`` of it.
    """
    ratios: list[float] = []
    for x in points:
        fx, gx = f(x), g(x)
        if fx is None or gx is None or fx <= 1 or gx <= 1:
            return LogRatioCheck(tuple(ratios), FindingVerdict.INDETERMINATE)
        ratios.append(float(_log(fx) / _log(gx)))
    gaps = [abs(r - 1) for r in ratios]
    monotone = all(later <= earlier for earlier, later in zip(gaps, gaps[1:], strict=False))
    return LogRatioCheck(tuple(ratios), _verdict(monotone and gaps[-1] <= float(tolerance)))


def time_minus_space(time: FitReport, space: FitReport, states: int) -> Callable[[int], Fraction | None]:
    """x -> t(x) - states * (s(x) + 1) from the fitted models."""

    def evaluate(x: int) -> Fraction | None:
        t, s = time.predict(x), space.predict(x)
        return None if t is None or s is None else t - states * (s + 1)

    return evaluate


# -----------------------------------------------------------------------------
# Report
# -----------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class DimensionReport:
    machine: int
    time: Growth
    space: Growth
    boxes: Growth
    d: Limit
    upper: Limit
    c_tau: RatioLimit
    bucket: Bucket
    constant_time: bool = False
    undefined: bool = False
    d_final_row: Limit = UNKNOWN_LIMIT
    log_ratios: tuple[float, ...] = ()
    log_ratio_verdict: FindingVerdict = FindingVerdict.NOT_APPLICABLE
    findings: dict[Finding, FindingVerdict] = field(default_factory=dict)

    @classmethod
    def undefined_for(cls, machine: int) -> "DimensionReport":
        """Report for a machine that halted on no sampled input."""
        return cls(
            machine=machine,
            time=UNKNOWN_GROWTH,
            space=UNKNOWN_GROWTH,
            boxes=UNKNOWN_GROWTH,
            d=UNKNOWN_LIMIT,
            upper=UNKNOWN_LIMIT,
            c_tau=RatioLimit((), exact=False),
            bucket=Bucket.UNCLASSIFIED,
            undefined=True,
        )


def check_findings(
    report: DimensionReport,
    xs: Sequence[int],
    space: Sequence[int],
    time: Sequence[int],
    known_c_tau: frozenset[Fraction] = frozenset(),
    width: Fraction = DEFAULT_WIDTH,
) -> dict[Finding, FindingVerdict]:
    """Verdicts of every finding and theorem assertion for one machine.

    Unknown inputs give INDETERMINATE, never HOLDS. Findings that only speak
    about super-linear or non-constant machines are NOT_APPLICABLE elsewhere.
    """
    if report.undefined:
        return {finding: FindingVerdict.NOT_APPLICABLE for finding in Finding}
    d, upper = report.d, report.upper
    findings: dict[Finding, FindingVerdict] = {}

    lower = _verdict(at_most(Fraction(1), d))
    ratio = space_time_ratio(report.space, report.time)
    findings[Finding.LOWER_BOUND] = lower
    findings[Finding.SPACE_TIME_RATIO] = ratio
    findings[Finding.F0] = _both(lower, ratio)
    findings[Finding.SPACE_TIME_THEOREM] = _verdict(at_most(d, upper))

    all_vanish = [_vanishes(s, t) for _, s, t in aligned(report.space, report.time)] if report.time.known else [None]
    if None in all_vanish:
        findings[Finding.VANISHING_RATIO_LOWER_BOUND] = FindingVerdict.INDETERMINATE
    elif all(all_vanish):
        findings[Finding.VANISHING_RATIO_LOWER_BOUND] = lower
    else:
        findings[Finding.VANISHING_RATIO_LOWER_BOUND] = FindingVerdict.NOT_APPLICABLE

    findings[Finding.F1] = _verdict(agrees(d, upper))

    if report.constant_time:
        findings[Finding.F2] = FindingVerdict.NOT_APPLICABLE
        findings[Finding.F3] = FindingVerdict.NOT_APPLICABLE
    else:
        fill = log_limit(report.boxes, combine(report.space.plus(1), report.time), width)
        findings[Finding.F2] = _verdict(agrees(fill, Fraction(1)))
        findings[Finding.F3] = _c_tau_verdict(report.c_tau, known_c_tau)

    t_dominant, s_dominant = report.time.dominant(), report.space.dominant()
    d_is_one, d_is_two = _equals(d, 1), _equals(d, 2)
    if t_dominant.known and s_dominant.known and d_is_one is not None:
        superpoly_polyspace = not t_dominant.is_polynomial() and s_dominant.is_polynomial()
        findings[Finding.F4] = _verdict(d_is_one == superpoly_polyspace)
    else:
        findings[Finding.F4] = FindingVerdict.INDETERMINATE
    if t_dominant.known and d_is_two is not None:
        findings[Finding.F5] = _verdict(d_is_two == t_dominant.is_at_most_linear())
    else:
        findings[Finding.F5] = FindingVerdict.INDETERMINATE

    value = report.c_tau.value
    if report.c_tau.exact and isinstance(value, Fraction) and value != 0:
        findings[Finding.NONZERO_C_TAU_UPPER_BOUND] = findings[Finding.F1]
    else:
        findings[Finding.NONZERO_C_TAU_UPPER_BOUND] = FindingVerdict.NOT_APPLICABLE

    findings[Finding.MEASURED_RATIO_DECREASES] = measured_ratio_decreases(xs, space, time, report.time)

    findings[Finding.LOG_RATIO_CONVERGENCE] = report.log_ratio_verdict
    return findings


def dimension_report(
    machine: int,
    fits: Mapping[str, FitReport],
    xs: Sequence[int],
    measured: Mapping[str, Sequence[int]],
    *,
    states: int,
    rules: RatioRules | None = None,
    periods: Sequence[int] = (1, 2, 3, 6),
    width: Fraction = DEFAULT_WIDTH,
    known_c_tau: frozenset[Fraction] = frozenset(),
    boxes_with_final_row: FitReport | None = None,
) -> DimensionReport:
    """Full dimension report of one machine.

    Args:
        machine: Machine number.
        fits: Fit reports keyed ``"t"``, ``"s"`` and ``"N"``.
        xs: Halted inputs, ascending.
        measured: Measured ``"t"``, ``"s"`` and ``"N"`` aligned with ``xs``.
        states: Number of states, for the log-ratio convergence check.
        rules: Ratio band settings.
        periods: Residue periods tried for ratio bands.
        width: Enclosure width for irrational limits.
        known_c_tau: Published c_tau values; exact values outside it are novel.
        boxes_with_final_row: Fit of N counting the halting row as well.

    Returns:
        DimensionReport with findings filled in.
    """
    if not xs:
        return DimensionReport.undefined_for(machine)
    space = growth_class(fits["s"].model, fits["s"].domain)
    cells = space.plus(1)
    time = growth_class(fits["t"].model, fits["t"].domain, references=(cells, UNKNOWN_GROWTH))
    boxes = growth_class(fits["N"].model, fits["N"].domain, references=(cells, time))
    cell_counts = [s + 1 for s in measured["s"]]

    d_final_row: Limit = UNKNOWN_LIMIT
    if boxes_with_final_row is not None:
        alternative = growth_class(boxes_with_final_row.model, boxes_with_final_row.domain, references=(cells, time))
        d_final_row = dimension(alternative, time, width)

    check = LogRatioCheck((), FindingVerdict.NOT_APPLICABLE)
    if time.known and not time.dominant().is_at_most_linear():
        check = check_log_ratio_convergence(time_minus_space(fits["t"], fits["s"], states), fits["t"].predict)

    report = DimensionReport(
        machine=machine,
        time=time,
        space=space,
        boxes=boxes,
        d=dimension(boxes, time, width),
        upper=upper_bound(cells, time, width),
        c_tau=ratio_limit(fits, measured["N"], cell_counts, measured["t"], rules, periods),
        bucket=classify_bucket(time, space),
        constant_time=time.all_constant(),
        d_final_row=d_final_row,
        log_ratios=check.values,
        log_ratio_verdict=check.verdict,
    )
    findings = check_findings(report, xs, measured["s"], measured["t"], known_c_tau, width)
    logger.debug(
        "Machine %d: d=%s bound=%s bucket=%s",
        machine,
        format_limit(report.d),
        format_limit(report.upper),
        report.bucket,
    )
    return replace(report, findings=findings)
