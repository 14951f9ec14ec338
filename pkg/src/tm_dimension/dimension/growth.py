"""Growth classes of fitted sequence models.

A class says how a sequence grows per unit of input x: Constant,
Poly(d), Exp(base, cofactor degree) or Unknown. Exponential bases are
kept exact as radicand**(1/index) so that log-ratios of bases that are
rational powers of each other stay exact.
"""

import logging
import math
from dataclasses import dataclass, field
from tm_dimension._compat import StrEnum
from fractions import Fraction

import sympy as sp
from sympy.polys.polyerrors import NotAlgebraic, PolynomialError

from tm_dimension.analysis.sequence_models import (
    CFinite,
    Domain,
    ExpPoly,
    PeriodicSplit,
    PolynomialExact,
    QuasiCFinite,
    RatioFallback,
    SequenceModel,
)

logger = logging.getLogger(__name__)

_PRECISION = 60
_TIE = sp.Float("1e-40", _PRECISION)
_Y = sp.Symbol("y")


class GrowthKind(StrEnum):
    CONSTANT = "constant"
    POLY = "poly"
    EXP = "exp"
    UNKNOWN = "unknown"


@dataclass(frozen=True, slots=True)
class ExpBase:
    """radicand ** (1 / index); the radicand is an exact algebraic number."""

    radicand: sp.Expr
    index: int = 1

    @property
    def is_rational(self) -> bool:
        return bool(self.radicand.is_rational)

    def value(self, digits: int = _PRECISION) -> sp.Float:
        return sp.Float(sp.N(self.radicand, digits), digits) ** (sp.Rational(1, self.index))

    def times(self, other: "ExpBase") -> "ExpBase":
        index = math.lcm(self.index, other.index)
        radicand = self.radicand ** (index // self.index) * other.radicand ** (index // other.index)
        return ExpBase(radicand, index)

    def power(self, k: int) -> "ExpBase":
        return ExpBase(self.radicand**k, self.index)

    def __str__(self) -> str:
        if self.index == 1:
            return str(self.radicand)
        return f"{self.radicand}^(1/{self.index})"


@dataclass(frozen=True, slots=True)
class GrowthClass:
    kind: GrowthKind
    degree: Fraction = Fraction(0)
    base: ExpBase | None = None
    value: Fraction | None = None

    @classmethod
    def constant(cls, value: Fraction | None = None) -> "GrowthClass":
        return cls(GrowthKind.CONSTANT, value=value)

    @classmethod
    def poly(cls, degree: Fraction | int) -> "GrowthClass":
        return cls(GrowthKind.POLY, degree=Fraction(degree))

    @classmethod
    def exp(cls, base: ExpBase, degree: Fraction | int = 0) -> "GrowthClass":
        return cls(GrowthKind.EXP, degree=Fraction(degree), base=base)

    @property
    def known(self) -> bool:
        return self.kind is not GrowthKind.UNKNOWN

    def times(self, other: "GrowthClass") -> "GrowthClass":
        """Class of the product of two sequences."""
        if not (self.known and other.known):
            return UNKNOWN
        if self.kind is GrowthKind.CONSTANT and other.kind is GrowthKind.CONSTANT:
            if self.value is None or other.value is None:
                return GrowthClass.constant()
            return GrowthClass.constant(self.value * other.value)
        if self.kind is GrowthKind.CONSTANT:
            return other
        if other.kind is GrowthKind.CONSTANT:
            return self
        if self.kind is GrowthKind.POLY and other.kind is GrowthKind.POLY:
            return GrowthClass.poly(self.degree + other.degree)
        if self.base is not None and other.base is not None:
            return GrowthClass.exp(self.base.times(other.base), self.degree + other.degree)
        exp_side = self if self.base is not None else other
        assert exp_side.base is not None
        return GrowthClass.exp(exp_side.base, self.degree + other.degree)

    def power(self, k: int) -> "GrowthClass":
        if k == 0:
            return GrowthClass.constant(Fraction(1))
        if self.kind is GrowthKind.CONSTANT:
            return GrowthClass.constant(None if self.value is None else self.value**k)
        if self.kind is GrowthKind.POLY:
            return GrowthClass.poly(self.degree * k)
        if self.base is not None:
            return GrowthClass.exp(self.base.power(k), self.degree * k)
        return UNKNOWN

    def rank(self) -> tuple[int, sp.Float, Fraction]:
        """Sort key: faster growth compares greater."""
        order = {GrowthKind.CONSTANT: 0, GrowthKind.POLY: 1, GrowthKind.EXP: 2, GrowthKind.UNKNOWN: 3}
        base = self.base.value() if self.base is not None else sp.Float(0)
        return order[self.kind], base, self.degree

    def plus(self, offset: int) -> "GrowthClass":
        """Class of the sequence shifted by a constant; only a constant's value changes."""
        if self.kind is GrowthKind.CONSTANT and self.value is not None:
            return GrowthClass.constant(self.value + offset)
        return self

    def is_at_most_linear(self) -> bool:
        return self.kind is GrowthKind.CONSTANT or (self.kind is GrowthKind.POLY and self.degree <= 1)

    def is_polynomial(self) -> bool:
        return self.kind in (GrowthKind.CONSTANT, GrowthKind.POLY)

    def __str__(self) -> str:
        if self.kind is GrowthKind.CONSTANT:
            return "Constant"
        if self.kind is GrowthKind.POLY:
            return f"Poly({self.degree})"
        if self.kind is GrowthKind.EXP:
            return f"Exp({self.base},{self.degree})"
        return "Unknown"


UNKNOWN = GrowthClass(GrowthKind.UNKNOWN)


@dataclass(frozen=True, slots=True)
class Growth:
    """One class per residue branch; input x uses branch index(x) mod len(classes)."""

    classes: tuple[GrowthClass, ...]
    domain: Domain = field(default_factory=Domain)

    @property
    def known(self) -> bool:
        return all(c.known for c in self.classes)

    @property
    def span(self) -> int:
        """Inputs covered by one cycle of branches."""
        return len(self.classes) * self.domain.stride

    def at(self, x: int) -> GrowthClass | None:
        index = self.domain.index(x)
        return None if index is None else self.classes[index % len(self.classes)]

    def dominant(self) -> GrowthClass:
        if not self.known:
            return UNKNOWN
        return max(self.classes, key=GrowthClass.rank)

    def all_constant(self) -> bool:
        return self.known and all(c.kind is GrowthKind.CONSTANT for c in self.classes)

    def plus(self, offset: int) -> "Growth":
        return Growth(tuple(c.plus(offset) for c in self.classes), self.domain)

    def __str__(self) -> str:
        return "|".join(str(c) for c in self.classes)


UNKNOWN_GROWTH = Growth((UNKNOWN,))


def _exp_base(root: sp.Expr, per: int) -> ExpBase:
    """``root`` per ``per`` inputs, as a rational radicand when some power of the root is rational."""
    if root.is_rational:
        return ExpBase(root, per)
    try:
        minimal = sp.minimal_polynomial(root, _Y, polys=True)
    except (NotAlgebraic, NotImplementedError, PolynomialError):
        return ExpBase(root, per)
    terms = dict(minimal.terms())
    degree = minimal.degree()
    if set(terms) == {(degree,), (0,)}:
        radicand = -terms[(0,)] / terms[(degree,)]
        if radicand > 0:
            return ExpBase(sp.Rational(radicand), per * degree)
    return ExpBase(root, per)


def _recurrence_class(characteristic: sp.Poly, per: int) -> GrowthClass:
    roots = characteristic.all_roots()
    if not roots:
        return GrowthClass.constant()
    moduli = [sp.N(sp.Abs(r), _PRECISION) for r in roots]
    top = max(moduli)
    if top > 1 + _TIE:
        dominant = [r for r, m in zip(roots, moduli, strict=True) if abs(m - top) < _TIE]
        positive = [r for r in dominant if r.is_real and r.is_positive]
        root = positive[0] if positive else sp.Abs(dominant[0])
        multiplicity = sum(1 for r in roots if sp.simplify(r - root) == 0) or 1
        return GrowthClass.exp(_exp_base(root, per), multiplicity - 1)
    unit = [r for r, m in zip(roots, moduli, strict=True) if abs(m - 1) < _TIE]
    if not unit:
        return GrowthClass.constant()
    multiplicity = max(sum(1 for r in roots if sp.simplify(r - u) == 0) for u in unit)
    return GrowthClass.poly(multiplicity - 1) if multiplicity > 1 else GrowthClass.constant()


def _single(model: SequenceModel, per: int, references: tuple[Growth, Growth] | None) -> GrowthClass:
    if isinstance(model, PolynomialExact):
        degree = model.degree
        return GrowthClass.poly(degree) if degree else GrowthClass.constant(model.coefficients[0])
    if isinstance(model, ExpPoly):
        if any(model.cofactor) and model.base > 1:
            cofactor = PolynomialExact(model.cofactor)
            base = sp.Rational(model.base.numerator, model.base.denominator)
            return GrowthClass.exp(ExpBase(base, per), cofactor.degree)
        return _single(PolynomialExact(model.additive or (Fraction(0),)), per, references)
    if isinstance(model, CFinite | QuasiCFinite):
        return _recurrence_class(model.characteristic(), per)
    if isinstance(model, RatioFallback):
        if references is None:
            return UNKNOWN
        space, time = references
        a, b = model.monomial
        return space.dominant().power(a).times(time.dominant().power(b))
    return UNKNOWN


def growth_class(
    model: SequenceModel | None,
    domain: Domain | None = None,
    references: tuple[Growth, Growth] | None = None,
) -> Growth:
    """Growth per residue branch of a fitted model.

    Args:
        model: The fitted model, or None when fitting failed.
        domain: Inputs covered by the model.
        references: Growth of the space and time sequences, needed to
            classify a ratio-band model.

    Returns:
        Growth with one class per branch. Unknown is propagated, never guessed.
    """
    domain = domain or Domain()
    if model is None:
        return Growth((UNKNOWN,), domain)
    if isinstance(model, PeriodicSplit):
        per = domain.stride * model.period
        return Growth(tuple(_single(b, per, references) for b in model.branches), domain)
    return Growth((_single(model, domain.stride, references),), domain)


def aligned(left: Growth, right: Growth) -> list[tuple[int, GrowthClass, GrowthClass]]:
    """(x, left class, right class) over one full cycle of inputs covered by both."""
    start = max(left.domain.start, right.domain.start)
    span = math.lcm(left.span, right.span)
    pairs = []
    for x in range(start, start + span):
        a, b = left.at(x), right.at(x)
        if a is not None and b is not None:
            pairs.append((x, a, b))
    return pairs


def combine(left: Growth, right: Growth) -> Growth:
    """Growth of the product sequence, aligned by input."""
    if not (left.known and right.known):
        return UNKNOWN_GROWTH
    pairs = aligned(left, right)
    if not pairs:
        return UNKNOWN_GROWTH
    stride = pairs[1][0] - pairs[0][0] if len(pairs) > 1 else math.lcm(left.span, right.span)
    return Growth(tuple(a.times(b) for _, a, b in pairs), Domain(pairs[0][0], stride))
