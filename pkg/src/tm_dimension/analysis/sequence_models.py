"""Exact models of integer sequences.

Every model is indexed by a position n >= 0 inside the data it was fitted
on. A :class:`Domain` maps positions back to machine inputs,
x = start + stride * n. Arithmetic is exact: coefficients are Fractions and
evaluation never touches floating point.
"""

from abc import ABC, abstractmethod
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import ClassVar, NamedTuple

import sympy as sp
from sympy.discrete.recurrences import linrec

X = sp.Symbol("x", integer=True)
N = sp.Symbol("n", integer=True, nonnegative=True)


def fmt_fraction(value: Fraction | int) -> str:
    """Rationals are written ``p/q``; integers without a denominator."""
    value = Fraction(value)
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def to_fraction(value: sp.Expr) -> Fraction:
    rational = sp.Rational(value)
    return Fraction(int(rational.p), int(rational.q))


def _seq(values: Sequence[Fraction | int]) -> str:
    return "(" + " ".join(fmt_fraction(v) for v in values) + ")"


class Domain(NamedTuple):
    """Inputs covered by a model: x = start + stride * n."""

    start: int = 1
    stride: int = 1

    def x(self, n: int) -> int:
        return self.start + self.stride * n

    def index(self, x: int) -> int | None:
        offset = x - self.start
        if offset < 0 or offset % self.stride:
            return None
        return offset // self.stride

    def shifted(self, dropped: int) -> "Domain":
        return Domain(self.x(dropped), self.stride)


class SequenceModel(ABC):
    """An exact description of a sequence a(0), a(1), ..."""

    kind: ClassVar[str]

    @abstractmethod
    def term(self, n: int) -> Fraction | None:
        """Value at position n, or None when the model cannot say exactly."""

    @abstractmethod
    def notation(self) -> str:
        """Canonical prefix notation, stable across runs."""

    def terms(self, count: int, start: int = 0) -> list[Fraction | None]:
        return [self.term(n) for n in range(start, start + count)]

    def reproduces(self, values: Sequence[int], start: int = 0) -> bool:
        return all(self.term(start + i) == v for i, v in enumerate(values))

    def expression(self) -> sp.Expr | None:
        """Closed form in the position symbol ``N``, when one is known."""
        return None

    def __str__(self) -> str:
        return self.notation()


@dataclass(frozen=True, slots=True)
class PolynomialExact(SequenceModel):
    """sum(coefficients[i] * n**i)."""

    kind: ClassVar[str] = "poly"
    coefficients: tuple[Fraction, ...]

    @property
    def degree(self) -> int:
        for i in range(len(self.coefficients) - 1, -1, -1):
            if self.coefficients[i] != 0:
                return i
        return 0

    def term(self, n: int) -> Fraction:
        total = Fraction(0)
        for c in reversed(self.coefficients):
            total = total * n + c
        return total

    def expression(self) -> sp.Expr:
        return sum((sp.Rational(c.numerator, c.denominator) * N**i for i, c in enumerate(self.coefficients)), sp.S.Zero)

    def notation(self) -> str:
        return f"(poly {_seq(self.coefficients)})"


@dataclass(frozen=True, slots=True)
class CFinite(SequenceModel):
    """a(n) = sum(coefficients[i-1] * a(n-i)) for n >= order, seeded by ``initial``."""

    kind: ClassVar[str] = "cfinite"
    coefficients: tuple[Fraction, ...]
    initial: tuple[Fraction, ...]

    @property
    def order(self) -> int:
        return len(self.coefficients)

    def characteristic(self) -> sp.Poly:
        """x^r - c1 x^(r-1) - ... - cr."""
        coeffs = [sp.Integer(1)] + [-sp.Rational(c.numerator, c.denominator) for c in self.coefficients]
        return sp.Poly(coeffs, X)

    def term(self, n: int) -> Fraction:
        if n < self.order:
            return self.initial[n]
        if n < 64:
            window = list(self.initial)
            for _ in range(self.order, n + 1):
                window.append(sum((c * window[-i] for i, c in enumerate(self.coefficients, start=1)), Fraction(0)))
            return window[-1]
        coeffs = [sp.Rational(c.numerator, c.denominator) for c in self.coefficients]
        init = [sp.Rational(v.numerator, v.denominator) for v in self.initial]
        return to_fraction(linrec(coeffs=coeffs, init=init, n=n))

    def notation(self) -> str:
        return f"(cfinite {_seq(self.coefficients)} {_seq(self.initial)})"


@dataclass(frozen=True, slots=True)
class ExpPoly(SequenceModel):
    """P(n) * base**n + Q(n), with P the cofactor and Q the additive polynomial."""

    kind: ClassVar[str] = "exppoly"
    base: Fraction
    cofactor: tuple[Fraction, ...]
    additive: tuple[Fraction, ...]

    def term(self, n: int) -> Fraction:
        return PolynomialExact(self.cofactor).term(n) * self.base**n + PolynomialExact(self.additive).term(n)

    def expression(self) -> sp.Expr:
        base = sp.Rational(self.base.numerator, self.base.denominator)
        return PolynomialExact(self.cofactor).expression() * base**N + PolynomialExact(self.additive).expression()

    def notation(self) -> str:
        return f"(exppoly {fmt_fraction(self.base)} {_seq(self.cofactor)} {_seq(self.additive)})"


@dataclass(frozen=True, slots=True)
class PeriodicSplit(SequenceModel):
    """Residue class r (positions r, r+p, ...) follows ``branches[r]``."""

    kind: ClassVar[str] = "periodic"
    period: int
    branches: tuple[SequenceModel, ...]

    def term(self, n: int) -> Fraction | None:
        return self.branches[n % self.period].term(n // self.period)

    def notation(self) -> str:
        return f"(periodic {self.period} " + " ".join(b.notation() for b in self.branches) + ")"


@dataclass(frozen=True, slots=True)
class QuasiCFinite(SequenceModel):
    """a(n) = sum(c_i * a(n-i)) + g(n)/denominator with g(n) drawn from a bounded set.

    ``realized`` holds g(order), g(order+1), ... for the fitted terms. Terms
    past the realized corrections are not determined exactly.
    """

    kind: ClassVar[str] = "quasi"
    coefficients: tuple[Fraction, ...]
    denominator: int
    initial: tuple[int, ...]
    realized: tuple[int, ...]
    corrections: tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.coefficients)

    def characteristic(self) -> sp.Poly:
        return CFinite(self.coefficients, tuple(Fraction(v) for v in self.initial)).characteristic()

    def term(self, n: int) -> Fraction | None:
        if n < self.order:
            return Fraction(self.initial[n])
        if n - self.order >= len(self.realized):
            return None
        window = [Fraction(v) for v in self.initial]
        for g in self.realized[: n - self.order + 1]:
            nxt = sum((c * window[-i] for i, c in enumerate(self.coefficients, start=1)), Fraction(0))
            window.append(nxt + Fraction(g, self.denominator))
        return window[-1]

    def notation(self) -> str:
        return (
            f"(quasi {self.denominator} {_seq(self.coefficients)} {_seq(self.initial)} "
            f"{_seq(self.realized)} {_seq(self.corrections)})"
        )


class Band(NamedTuple):
    lo: Fraction
    hi: Fraction

    def __str__(self) -> str:
        return f"[{float(self.lo):.6g},{float(self.hi):.6g}]"


@dataclass(frozen=True, slots=True)
class RatioFallback(SequenceModel):
    """a(n) / (s(n)**a * t(n)**b) stays inside an empirical band on each residue class."""

    kind: ClassVar[str] = "ratio"
    monomial: tuple[int, int]
    period: int
    bands: tuple[Band, ...]

    def term(self, n: int) -> None:
        return None

    def band(self, n: int) -> Band:
        return self.bands[n % self.period]

    def notation(self) -> str:
        a, b = self.monomial
        bands = " ".join(f"({float(lo):.9g} {float(hi):.9g})" for lo, hi in self.bands)
        return f"(ratio ({a} {b}) {self.period} {bands})"
