"""Limits of log-ratios between growth classes.

A limit is an exact Fraction, a certified Enclosure, INFINITY or UNKNOWN.
Ratios of exponential bases stay exact when both bases are rational
powers of a common rational; otherwise mpmath interval arithmetic
encloses them to the requested width.
"""

import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass
from fractions import Fraction
from typing import Final

import mpmath
import sympy as sp
from mpmath.libmp import to_rational

from tm_dimension.analysis.sequence_models import fmt_fraction, to_fraction
from tm_dimension.dimension.growth import ExpBase, Growth, GrowthClass, GrowthKind, aligned

logger = logging.getLogger(__name__)

DEFAULT_WIDTH: Final = Fraction(1, 10**6)
_DIGITS = 9
_SCALE = 10**_DIGITS


def _decimal(value: Fraction) -> str:
    """Exact decimal of a Fraction with denominator dividing 10**9."""
    sign = "-" if value < 0 else ""
    whole, rest = divmod(abs(value.numerator) * (_SCALE // value.denominator), _SCALE)
    return f"{sign}{whole}.{rest:0{_DIGITS}d}"


@dataclass(frozen=True, slots=True)
class Enclosure:
    """A certified interval [lo, hi] around an irrational limit."""

    lo: Fraction
    hi: Fraction

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, value: Fraction) -> bool:
        return self.lo <= value <= self.hi

    def shifted(self, offset: Fraction) -> "Enclosure":
        return Enclosure(self.lo + offset, self.hi + offset)

    def __str__(self) -> str:
        lo = Fraction(math.floor(self.lo * _SCALE), _SCALE)
        hi = Fraction(math.ceil(self.hi * _SCALE), _SCALE)
        return f"[{_decimal(lo)},{_decimal(hi)}]"


class _Marker:
    def __init__(self, name: str) -> None:
        self.name = name

    def __repr__(self) -> str:
        return self.name

    def __str__(self) -> str:
        return self.name


INFINITY: Final = _Marker("inf")
UNKNOWN_LIMIT: Final = _Marker("unknown")

Limit = Fraction | Enclosure | _Marker


def lower(limit: Limit) -> Fraction | None:
    """Lower end of a limit for ordering; None for markers."""
    if isinstance(limit, Fraction):
        return limit
    if isinstance(limit, Enclosure):
        return limit.lo
    return None


def limit_min(limits: Iterable[Limit]) -> Limit:
    """liminf over branches: the least branch limit. UNKNOWN if any branch is."""
    best: Limit | None = None
    for limit in limits:
        if limit is UNKNOWN_LIMIT:
            return UNKNOWN_LIMIT
        if best is None or best is INFINITY:
            best = limit
            continue
        if limit is INFINITY:
            continue
        current, candidate = lower(best), lower(limit)
        assert current is not None and candidate is not None
        if candidate < current or (candidate == current and isinstance(limit, Fraction)):
            best = limit
    return UNKNOWN_LIMIT if best is None else best


def agrees(left: Limit, right: Limit) -> bool | None:
    """Exact equality for Fractions, overlap for enclosures; None when undecidable."""
    if left is UNKNOWN_LIMIT or right is UNKNOWN_LIMIT:
        return None
    if isinstance(left, _Marker) or isinstance(right, _Marker):
        return left is right
    if isinstance(left, Fraction) and isinstance(right, Fraction):
        return left == right
    lo_l, hi_l = (left, left) if isinstance(left, Fraction) else (left.lo, left.hi)
    lo_r, hi_r = (right, right) if isinstance(right, Fraction) else (right.lo, right.hi)
    return lo_l <= hi_r and lo_r <= hi_l


def at_most(left: Limit, right: Limit) -> bool | None:
    """left <= right, certified; None when undecidable."""
    if left is UNKNOWN_LIMIT or right is UNKNOWN_LIMIT:
        return None
    if right is INFINITY:
        return True
    if left is INFINITY:
        return False
    assert isinstance(left, Fraction | Enclosure) and isinstance(right, Fraction | Enclosure)
    hi_l = left if isinstance(left, Fraction) else left.hi
    lo_r = right if isinstance(right, Fraction) else right.lo
    if hi_l <= lo_r:
        return True
    lo_l = left if isinstance(left, Fraction) else left.lo
    hi_r = right if isinstance(right, Fraction) else right.hi
    if lo_l > hi_r:
        return False
    return None


def _exponents(value: Fraction) -> dict[int, int]:
    exponents = {int(p): int(e) for p, e in sp.factorint(value.numerator).items()}
    for p, e in sp.factorint(value.denominator).items():
        exponents[int(p)] = exponents.get(int(p), 0) - int(e)
    return exponents


def _rational_log_ratio(numerator: Fraction, denominator: Fraction) -> Fraction | None:
    """log(numerator) / log(denominator) when it is rational, else None."""
    top, bottom = _exponents(numerator), _exponents(denominator)
    if not bottom or set(top) != set(bottom):
        return None
    ratios = {Fraction(top[p], bottom[p]) for p in bottom}
    return ratios.pop() if len(ratios) == 1 else None


def _interval(value: sp.Expr, digits: int) -> mpmath.iv.mpf:
    if value.is_rational:
        exact = to_fraction(value)
        return mpmath.iv.mpf(exact.numerator) / mpmath.iv.mpf(exact.denominator)
    center = sp.N(value, digits + 10)
    radius = sp.Float(10) ** (-digits)
    return mpmath.iv.mpf([str(center - radius), str(center + radius)])


def _enclose(numerator: ExpBase, denominator: ExpBase, width: Fraction) -> Enclosure:
    previous = mpmath.iv.prec
    try:
        for digits in (30, 60, 120, 240):
            mpmath.iv.prec = int(digits * 3.33) + 16
            top = mpmath.iv.log(_interval(numerator.radicand, digits)) / numerator.index
            bottom = mpmath.iv.log(_interval(denominator.radicand, digits)) / denominator.index
            ratio = top / bottom
            lo_raw, hi_raw = ratio._mpi_
            lo, hi = Fraction(*to_rational(lo_raw)), Fraction(*to_rational(hi_raw))
            if hi - lo <= width:
                break
        else:
            logger.warning(
                "Log-ratio enclosure of %s / %s wider than requested: %s", numerator, denominator, float(hi - lo)
            )
    finally:
        mpmath.iv.prec = previous
    return Enclosure(lo, hi)


def base_log_ratio(numerator: ExpBase, denominator: ExpBase, width: Fraction = DEFAULT_WIDTH) -> Fraction | Enclosure:
    """log(numerator) / log(denominator) for two exponential bases."""
    if numerator == denominator:
        return Fraction(1)
    if numerator.is_rational and denominator.is_rational:
        exact = _rational_log_ratio(to_fraction(numerator.radicand), to_fraction(denominator.radicand))
        if exact is not None:
            return exact * Fraction(denominator.index, numerator.index)
    return _enclose(numerator, denominator, width)


def class_log_limit(num: GrowthClass, den: GrowthClass, width: Fraction = DEFAULT_WIDTH) -> Limit:
    """lim log(num) / log(den) for one aligned pair of branch classes."""
    if not (num.known and den.known):
        return UNKNOWN_LIMIT
    if den.kind is GrowthKind.CONSTANT:
        if num.kind is not GrowthKind.CONSTANT:
            return INFINITY
        if num.value is None or den.value is None or den.value <= 1 or num.value <= 0:
            return UNKNOWN_LIMIT
        if num.value == 1:
            return Fraction(0)
        return base_log_ratio(ExpBase(sp.Rational(num.value.numerator, num.value.denominator)),
                              ExpBase(sp.Rational(den.value.numerator, den.value.denominator)), width)  # fmt: skip
    if num.kind is GrowthKind.CONSTANT:
        return Fraction(0)
    if num.kind is GrowthKind.POLY:
        return num.degree / den.degree if den.kind is GrowthKind.POLY else Fraction(0)
    if den.kind is GrowthKind.POLY:
        return INFINITY
    assert num.base is not None and den.base is not None
    return base_log_ratio(num.base, den.base, width)


def log_limit(num: Growth, den: Growth, width: Fraction = DEFAULT_WIDTH) -> Limit:
    """liminf over inputs of log(num) / log(den): the least limit over aligned branches."""
    if not (num.known and den.known):
        return UNKNOWN_LIMIT
    pairs = aligned(num, den)
    if not pairs:
        return UNKNOWN_LIMIT
    return limit_min(class_log_limit(a, b, width) for _, a, b in pairs)


def format_limit(limit: Limit) -> str:
    """``p/q`` for exact values, ``[lo,hi]`` for enclosures, ``inf`` or ``unknown``."""
    if isinstance(limit, Fraction):
        return fmt_fraction(limit)
    return str(limit)


def parse_limit(text: str) -> Limit:
    """Inverse of :func:`format_limit`; enclosure ends are read as exact decimals."""
    text = text.strip()
    if text == INFINITY.name:
        return INFINITY
    if text == UNKNOWN_LIMIT.name:
        return UNKNOWN_LIMIT
    if text.startswith("[") and text.endswith("]"):
        lo, _, hi = text[1:-1].partition(",")
        return Enclosure(Fraction(lo), Fraction(hi))
    return Fraction(text)
