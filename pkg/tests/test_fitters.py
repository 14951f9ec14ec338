"""Tests for the exact and empirical sequence fitters.

Covers: finite differences, least-order recurrences, closed forms,
periodic splits, interleaved recurrences, quasi-recurrences and ratio
bands.
"""

import random
from fractions import Fraction

from tm_dimension.analysis.cascade import CFiniteFitter, exact_cascade
from tm_dimension.analysis.fitters import (
    closed_form,
    extend_quasi,
    fit_cfinite,
    fit_periodic,
    fit_polynomial,
    fit_quasi_cfinite,
    ratio_fallback,
    split_cfinite,
    split_periods,
    starved_periods,
)
from tm_dimension.analysis.sequence_models import Band, CFinite, ExpPoly, PeriodicSplit, PolynomialExact
from tm_dimension.protocol.loader import FittingRules

# a(n) = ceil(3 a(n-1) / 2), a(0) = 3
CEILING_SEQUENCE = [3, 5, 8, 12, 18, 27, 41, 62, 93, 140, 210, 315, 473, 710, 1065, 1598]


def alternating_runtime(x):
    """Linear on even x, exponential on odd x."""
    if x % 2 == 0:
        return 2 * (x - 2) + 9
    return 2 * (x - 1) + 3 * 2 ** ((x - 1) // 2 + 1) + 5


def interleaved(count):
    """Even positions 3n + 1, odd positions 2**n."""
    return [3 * n + 1 if n % 2 == 0 else 2**n for n in range(count)]


class TestFitPolynomial:
    def test_quadratic(self):
        model = fit_polynomial([n * n + 1 for n in range(10)])
        assert model == PolynomialExact((Fraction(1), Fraction(0), Fraction(1)))
        assert model.degree == 2

    def test_constant(self):
        model = fit_polynomial([7] * 6)
        assert model is not None
        assert model.degree == 0
        assert model.term(100) == 7

    def test_rational_coefficients(self):
        model = fit_polynomial([n * (n + 1) // 2 for n in range(8)])
        assert model is not None
        assert model.coefficients == (0, Fraction(1, 2), Fraction(1, 2))

    def test_no_fit_for_exponentials(self):
        assert fit_polynomial([2**n for n in range(12)]) is None

    def test_needs_four_terms(self):
        assert fit_polynomial([1, 2, 3]) is None


class TestFitCFinite:
    def test_exponential_plus_linear(self):
        model = fit_cfinite([2**n + n for n in range(15)])
        assert model is not None
        assert model.coefficients == (4, -5, 2)
        assert model.initial == (1, 3, 6)
        assert model.term(30) == 2**30 + 30

    def test_fibonacci(self):
        fib = [0, 1]
        while len(fib) < 14:
            fib.append(fib[-1] + fib[-2])
        model = fit_cfinite(fib)
        assert model is not None
        assert model.coefficients == (1, 1)

    def test_far_terms_are_exact(self):
        model = CFinite((Fraction(2),), (Fraction(1),))
        assert model.term(100) == 2**100

    def test_anomalous_first_term_is_not_absorbed(self):
        # A recurrence with a zero last coefficient would ignore the 5.
        assert fit_cfinite([5] + [2**n for n in range(9)]) is None

    def test_least_order_on_random_exponential_sums(self):
        rng = random.Random(77)
        for _ in range(30):
            roots = rng.sample([1, 2, 3, 4, 5, 7], rng.randint(1, 4))
            weights = [rng.randint(1, 9) for _ in roots]
            model = fit_cfinite([sum(w * r**n for w, r in zip(weights, roots, strict=True)) for n in range(21)])
            assert model is not None
            assert model.order == len(roots)
            assert sorted(int(r) for r in model.characteristic().all_roots()) == sorted(roots)

    def test_no_fit_for_irregular_sequences(self):
        assert fit_cfinite([3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7, 9]) is None


class TestClosedForm:
    def test_exponential_plus_linear(self):
        model = fit_cfinite([2**n + n for n in range(15)])
        form = closed_form(model)
        assert form == ExpPoly(Fraction(2), (Fraction(1),), (Fraction(0), Fraction(1)))
        assert form.notation() == "(exppoly 2 (1) (0 1))"

    def test_pure_exponential_has_no_additive_part(self):
        form = closed_form(CFinite((Fraction(3),), (Fraction(2),)))
        assert form == ExpPoly(Fraction(3), (Fraction(2),), ())
        assert form.term(4) == 162

    def test_undefined_for_irrational_roots(self):
        fib = CFinite((Fraction(1), Fraction(1)), (Fraction(0), Fraction(1)))
        assert closed_form(fib) is None


class TestFitPeriodic:
    def test_two_branches(self):
        model = fit_periodic(interleaved(20), (2,))
        assert model == PeriodicSplit(
            2,
            (PolynomialExact((Fraction(1), Fraction(6))), CFinite((Fraction(4),), (Fraction(2),))),
        )
        assert model.term(21) == 2**21

    def test_skips_periods_with_short_branches(self):
        assert fit_periodic(interleaved(10), (6,)) is None

    def test_starved_periods(self):
        assert starved_periods(18, (1, 2, 3, 6), 4) == [6]
        assert starved_periods(30, (1, 2, 3, 6), 4) == []


class TestInterleavedRecurrences:
    def test_interleave_is_split(self):
        model = fit_cfinite(interleaved(15))
        assert model is not None
        assert model.coefficients == (0, 6, 0, -9, 0, 4)
        assert split_periods(model, (1, 2, 3, 6)) == [2]

    def test_no_split_for_a_single_dominant_root(self):
        model = CFinite((Fraction(4), Fraction(-5), Fraction(2)), (Fraction(1), Fraction(3), Fraction(6)))
        assert split_periods(model, (1, 2, 3, 6)) == []

    def test_mixed_lags_with_mirrored_dominant_roots(self):
        # (x - 1)(x^2 - 1)(x^2 - 2) uses lags 1 and 3 but grows by +-sqrt(2)
        values = [alternating_runtime(x) for x in range(3, 16)]
        model = fit_cfinite(values)
        assert model is not None
        assert model.coefficients == (1, 3, -3, -2, 2)
        assert split_periods(model, (1, 2, 3, 6)) == [2]

    def test_split_branches_are_least_models(self):
        values = [alternating_runtime(x) for x in range(3, 16)]
        model = fit_cfinite(values)
        assert model is not None
        split = split_cfinite(model, 2)
        assert split is not None
        odd, even = split.branches
        assert even == PolynomialExact((Fraction(13), Fraction(4)))
        assert isinstance(odd, CFinite)
        assert odd.order == 3
        assert split.reproduces([alternating_runtime(x) for x in range(3, 41)])

    def test_cfinite_stage_returns_the_split(self):
        model = CFiniteFitter(periods=(1, 2, 3, 6)).fit(interleaved(15))
        assert isinstance(model, PeriodicSplit)
        assert model.period == 2

    def test_cfinite_stage_splits_mixed_lags(self):
        model = CFiniteFitter(periods=(1, 2, 3, 6)).fit([alternating_runtime(x) for x in range(3, 16)])
        assert isinstance(model, PeriodicSplit)
        assert model.period == 2

    def test_cfinite_stage_keeps_plain_recurrences(self):
        model = CFiniteFitter(periods=(1, 2, 3, 6)).fit([2**n + n for n in range(15)])
        assert isinstance(model, CFinite)

    def test_cascade_order(self):
        assert [f.name for f in exact_cascade(FittingRules())] == ["poly", "cfinite", "periodic"]


class TestFitQuasiCFinite:
    def test_ceiling_recurrence(self):
        model = fit_quasi_cfinite(CEILING_SEQUENCE)
        assert model is not None
        assert model.coefficients == (Fraction(3, 2),)
        assert model.denominator == 2
        assert set(model.realized) <= {0, 1}
        assert model.reproduces(CEILING_SEQUENCE)

    def test_terms_past_the_corrections_are_unknown(self):
        model = fit_quasi_cfinite(CEILING_SEQUENCE)
        assert model.term(len(CEILING_SEQUENCE)) is None

    def test_extends_over_more_terms(self):
        model = fit_quasi_cfinite(CEILING_SEQUENCE[:10])
        extended = extend_quasi(model, CEILING_SEQUENCE)
        assert extended is not None
        assert len(extended.realized) == len(CEILING_SEQUENCE) - 1

    def test_extension_fails_on_a_broken_term(self):
        model = fit_quasi_cfinite(CEILING_SEQUENCE[:10])
        assert extend_quasi(model, [*CEILING_SEQUENCE[:12], 10_000]) is None


class TestRatioFallback:
    def test_constant_band(self):
        space = [n + 2 for n in range(12)]
        time = [2 * (n + 1) ** 2 for n in range(12)]
        values = [s * t // 2 for s, t in zip(space, time, strict=True)]
        model = ratio_fallback(values, space, time)
        assert model is not None
        assert model.monomial == (1, 1)
        assert model.period == 1
        assert model.bands == (Band(Fraction(1, 2), Fraction(1, 2)),)
        assert model.term(3) is None

    def test_too_few_points(self):
        assert ratio_fallback([1, 2, 3], [1, 2, 3], [1, 2, 3]) is None

    def test_wide_spread_has_no_band(self):
        space = [1] * 12
        time = [1] * 12
        assert ratio_fallback([1, 10] * 6, space, time, periods=(1,)) is None
