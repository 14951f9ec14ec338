"""Exact fitters for integer sequences.

Each fitter either returns a model that reproduces every given term with
exact rational arithmetic, or None. Absence of a fit is a value.
"""

import cmath
import itertools
import logging
import math
from collections.abc import Sequence
from fractions import Fraction

import numpy as np
import sympy as sp

from tm_dimension.analysis.sequence_models import (
    N,
    Band,
    CFinite,
    ExpPoly,
    PeriodicSplit,
    PolynomialExact,
    QuasiCFinite,
    RatioFallback,
    SequenceModel,
    to_fraction,
)

logger = logging.getLogger(__name__)

MIN_POLYNOMIAL_TERMS = 4


def _differences(row: list[Fraction]) -> list[Fraction]:
    return [b - a for a, b in itertools.pairwise(row)]


def fit_polynomial(values: Sequence[int]) -> PolynomialExact | None:
    """Finite differences over the rationals.

    If the k-th differences are constant for some k < len - 2, returns the
    degree-k interpolating polynomial in the position n.
    """
    if len(values) < MIN_POLYNOMIAL_TERMS:
        return None
    row = [Fraction(v) for v in values]
    for degree in range(len(values) - 2):
        if all(v == row[0] for v in row):
            points = [(i, v) for i, v in enumerate(values[: degree + 1])]
            expr = sp.interpolate(points, N) if degree else sp.Integer(values[0])
            coefficients = sp.Poly(expr, N).all_coeffs()[::-1]
            return PolynomialExact(tuple(to_fraction(c) for c in coefficients))
        row = _differences(row)
    return None


def fit_cfinite(values: Sequence[int], max_order: int | None = None) -> CFinite | None:
    """Least-order constant-coefficient recurrence that fits every term.

    Solves the full Hankel system a(n) = c1 a(n-1) + ... + cr a(n-r),
    n = r..len-1, exactly for r = 1, 2, ... up to floor((len - 2) / 2).
    A solution with cr = 0 is a lower-order recurrence that ignores the
    first terms; those are left to the caller's prefix drop.
    """
    length = len(values)
    top = (length - 2) // 2
    if max_order is not None:
        top = min(top, max_order)
    for order in range(1, top + 1):
        system = sp.Matrix([[values[n - i] for i in range(1, order + 1)] for n in range(order, length)])
        rhs = sp.Matrix([values[n] for n in range(order, length)])
        try:
            solution, params = system.gauss_jordan_solve(rhs)
        except ValueError:
            continue
        if len(params):
            solution = solution.subs({p: 0 for p in params})
        if solution[order - 1] == 0:
            continue
        return CFinite(
            coefficients=tuple(to_fraction(c) for c in solution),
            initial=tuple(Fraction(v) for v in values[:order]),
        )
    return None


def closed_form(model: CFinite) -> ExpPoly | None:
    """P(n) * b**n + Q(n) form of a C-finite model.

    Only defined when every characteristic root is rational and, apart from
    the root 1, there is exactly one root b > 1.
    """
    poly = model.characteristic()
    roots = sp.roots(poly)
    if sum(roots.values()) != poly.degree() or not all(r.is_rational for r in roots):
        return None
    bases = [r for r in roots if r != 1]
    if len(bases) != 1 or not bases[0] > 1:
        return None
    base = bases[0]
    cofactor_terms = roots[base]
    additive_terms = roots.get(sp.Integer(1), 0)

    rows = [
        [sp.Integer(n) ** j * base**n for j in range(cofactor_terms)]
        + [sp.Integer(n) ** j for j in range(additive_terms)]
        for n in range(model.order)
    ]
    rhs = sp.Matrix([sp.Rational(v.numerator, v.denominator) for v in model.initial])
    solution = sp.Matrix(rows).LUsolve(rhs)
    coefficients = [to_fraction(c) for c in solution]
    form = ExpPoly(
        base=to_fraction(base),
        cofactor=tuple(coefficients[:cofactor_terms]),
        additive=tuple(coefficients[cofactor_terms:]),
    )
    if any(form.term(n) != model.term(n) for n in range(model.order + 2)):
        logger.debug("Closed form of %s failed its own check.", model)
        return None
    return form


def split_periods(model: CFinite, periods: Sequence[int]) -> list[int]:
    """Periods p > 1 under which the dominant characteristic roots are closed.

    Multiplying every root of largest modulus by a p-th root of unity gives
    another such root, so each residue class mod p may grow on its own.
    Recurrences that only use lags divisible by p always qualify.
    """
    roots = [complex(sp.N(r, 30)) for r in model.characteristic().all_roots()]
    if not roots:
        return []
    top = max(abs(r) for r in roots)
    tolerance = 1e-9 * max(top, 1.0)
    dominant = [r for r in roots if abs(abs(r) - top) < tolerance]
    found = []
    for period in sorted(periods):
        if period < 2:
            continue
        unity = [cmath.exp(2j * cmath.pi * k / period) for k in range(1, period)]
        if all(any(abs(r * u - q) < tolerance for q in dominant) for r in dominant for u in unity):
            found.append(period)
    return found


def split_cfinite(model: CFinite, period: int) -> PeriodicSplit | None:
    """The residue classes of ``model`` mod ``period``, each refitted to its least model.

    Branch terms are generated from ``model`` itself, so the split reproduces
    exactly what the recurrence does. None when a branch leaves the integers
    or admits no fit.
    """
    length = 2 * model.order + 4
    branches: list[SequenceModel] = []
    for residue in range(period):
        terms = [model.term(residue + period * m) for m in range(length)]
        if any(v.denominator != 1 for v in terms):
            return None
        branch = [int(v) for v in terms]
        fitted: SequenceModel | None = fit_polynomial(branch) or fit_cfinite(branch)
        if fitted is None:
            return None
        branches.append(fitted)
    return PeriodicSplit(period, tuple(branches))


def starved_periods(length: int, periods: Sequence[int], min_branch_terms: int) -> list[int]:
    """Period candidates whose smallest residue class would be too short to fit."""
    return [p for p in periods if length // p < min_branch_terms]


def fit_periodic(
    values: Sequence[int],
    periods: Sequence[int] = (1, 2, 3, 6),
    min_branch_terms: int = 4,
    max_order: int | None = None,
) -> PeriodicSplit | None:
    """Smallest period whose residue classes each admit a polynomial or C-finite fit."""
    for period in sorted(periods):
        if len(values) // period < min_branch_terms:
            continue
        branches: list[SequenceModel] = []
        for residue in range(period):
            branch = list(values[residue::period])
            model: SequenceModel | None = fit_polynomial(branch) or fit_cfinite(branch, max_order)
            if model is None:
                break
            branches.append(model)
        else:
            return PeriodicSplit(period, tuple(branches))
    return None


def _estimate_coefficients(values: Sequence[int], order: int) -> list[float] | None:
    try:
        rows = np.array([[float(values[n - i]) for i in range(1, order + 1)] for n in range(order, len(values))])
        rhs = np.array([float(values[n]) for n in range(order, len(values))])
    except OverflowError:
        return None
    scale = np.maximum(np.abs(rhs), 1.0)
    solution, *_ = np.linalg.lstsq(rows / scale[:, None], rhs / scale, rcond=None)
    if not np.all(np.isfinite(solution)):
        return None
    return [float(c) for c in solution]


def _grows_exponentially(coefficients: Sequence[Fraction]) -> bool:
    # A bounded correction on a root-1 recurrence fits any walk with small steps.
    roots = np.roots([1.0, *(-float(c) for c in coefficients)])
    return bool(np.max(np.abs(roots)) > 1 + 1e-9)


def _realized_corrections(
    values: Sequence[int], coefficients: Sequence[Fraction], denominator: int, allowed: frozenset[int]
) -> list[int] | None:
    order = len(coefficients)
    realized = []
    for n in range(order, len(values)):
        predicted = sum((c * values[n - i] for i, c in enumerate(coefficients, start=1)), Fraction(0))
        scaled = (values[n] - predicted) * denominator
        if scaled.denominator != 1 or scaled.numerator not in allowed:
            return None
        realized.append(scaled.numerator)
    return realized


def fit_quasi_cfinite(
    values: Sequence[int],
    corrections: Sequence[int] = (-1, 0, 1),
    max_order: int = 3,
    max_denominator: int = 8,
) -> QuasiCFinite | None:
    """Rational recurrence holding up to a bounded correction.

    Finds the least order r <= max_order and the least common denominator
    D <= max_denominator such that D * (a(n) - sum(c_i a(n-i))) lies in
    ``corrections`` for all n >= r. Coefficient candidates come from a
    least-squares estimate rounded to multiples of 1/D; the check itself
    is exact.
    """
    allowed = frozenset(corrections)
    for order in range(1, max_order + 1):
        if len(values) - order < order + 3:
            break
        estimate = _estimate_coefficients(values, order)
        if estimate is None:
            continue
        for denominator in range(1, max_denominator + 1):
            centers = [round(c * denominator) for c in estimate]
            for nudges in itertools.product((0, -1, 1), repeat=order):
                numerators = [c + d for c, d in zip(centers, nudges, strict=True)]
                coefficients = [Fraction(k, denominator) for k in numerators]
                if math.lcm(*(c.denominator for c in coefficients)) != denominator:
                    continue
                if not _grows_exponentially(coefficients):
                    continue
                realized = _realized_corrections(values, coefficients, denominator, allowed)
                if realized is not None:
                    return QuasiCFinite(
                        coefficients=tuple(coefficients),
                        denominator=denominator,
                        initial=tuple(values[:order]),
                        realized=tuple(realized),
                        corrections=tuple(sorted(allowed)),
                    )
    return None


def extend_quasi(model: QuasiCFinite, values: Sequence[int]) -> QuasiCFinite | None:
    """The same recurrence re-checked over a longer run of terms."""
    realized = _realized_corrections(values, model.coefficients, model.denominator, frozenset(model.corrections))
    if realized is None or tuple(values[: model.order]) != model.initial:
        return None
    return QuasiCFinite(model.coefficients, model.denominator, model.initial, tuple(realized), model.corrections)


def ratio_fallback(
    values: Sequence[int],
    space: Sequence[int],
    time: Sequence[int],
    monomials: Sequence[tuple[int, int]] = ((1, 1),),
    periods: Sequence[int] = (1, 2, 3, 6),
    window: int = 5,
    tolerance: float = 0.05,
    min_points: int = 10,
) -> RatioFallback | None:
    """Empirical constant band of values / (space**a * time**b), per residue class.

    ``space`` is the number of cells used (s + 1) and ``time`` the step count,
    aligned with ``values``. Takes the least period and the first monomial
    whose every residue-class band has relative spread at most ``tolerance``
    over its last ``window`` terms.
    """
    if len(values) < min_points or not len(values) == len(space) == len(time):
        return None
    limit = Fraction(tolerance).limit_denominator(10**6)
    for period in sorted(periods):
        for a, b in monomials:
            bands = []
            for residue in range(period):
                tail = list(range(residue, len(values), period))[-window:]
                if len(tail) < 3:
                    break
                ratios = [Fraction(values[i], space[i] ** a * time[i] ** b) for i in tail]
                lo, hi = min(ratios), max(ratios)
                if hi == 0 or (hi - lo) / hi > limit:
                    break
                bands.append(Band(lo, hi))
            else:
                return RatioFallback((a, b), period, tuple(bands))
    return None
