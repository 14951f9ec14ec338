"""Tests for function guessing with holdout validation.

Covers: fit and holdout windows, prefix drops, refits, interleaved
sequences, failed fits, predictions of seeded random models, ratio bands
and the bounded-correction check.
"""

import random
from fractions import Fraction

import pytest

from tm_dimension.analysis.guess import (
    QuasiTemplate,
    check_quasi_recurrence,
    fit_sequence,
    with_ratio_fallback,
)
from tm_dimension.analysis.sequence_models import CFinite, Domain, ExpPoly, PeriodicSplit, PolynomialExact
from tm_dimension.errors import SequenceLengthError
from tm_dimension.protocol.loader import RatioRules

BB_SPACE = [3, 7, 13, 22, 36, 57, 88, 135, 205, 310]
BB_TEMPLATE = QuasiTemplate((Fraction(5, 2), Fraction(-3, 2)), 2, frozenset({-1, 0, 1}))
IRREGULAR = [3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7, 9, 3, 2, 3, 8, 4, 6]


def random_polynomial(rng, degree=3):
    coefficients = [rng.randint(0, 6) for _ in range(rng.randint(1, degree + 1))]
    return lambda n: sum(c * n**i for i, c in enumerate(coefficients))


def random_recurrence(rng):
    roots = rng.sample([1, 2, 3, 4, 5], rng.randint(1, 3))
    weights = [rng.randint(1, 4) for _ in roots]
    return lambda n: sum(w * r**n for w, r in zip(weights, roots, strict=True))


def random_interleave(rng):
    period = rng.choice([2, 3])
    branches = [random_polynomial(rng, degree=2) for _ in range(period)]
    return lambda n: branches[n % period](n // period)


MODEL_FAMILIES = (random_polynomial, random_recurrence, random_interleave)


class TestFitSequence:
    def test_polynomial_on_first_fifteen(self):
        report = fit_sequence([(x - 1) ** 2 + 1 for x in range(1, 22)])
        assert isinstance(report.model, PolynomialExact)
        assert report.verdict == "exact"
        assert report.fitted_length == 15
        assert report.holdout == (16, 17, 18, 19, 20, 21)
        assert report.chain[-1] == "poly[0:15]"
        assert not report.refit
        assert report.predict(30) == 29**2 + 1

    def test_domain_maps_inputs(self):
        report = fit_sequence([2 * x for x in range(2, 43, 2)], Domain(2, 2))
        assert report.predict(50) == 100
        assert report.predict(51) is None
        assert report.notation() == "(at 2 2 (poly (4 4)))"

    def test_cfinite_with_closed_form(self):
        report = fit_sequence([2**n + n for n in range(21)])
        assert isinstance(report.model, CFinite)
        assert report.closed_form == ExpPoly(Fraction(2), (Fraction(1),), (Fraction(0), Fraction(1)))

    def test_drops_anomalous_prefix(self):
        report = fit_sequence([5] + [2**n for n in range(20)])
        assert report.model == CFinite((Fraction(2),), (Fraction(1),))
        assert report.dropped == (5,)
        assert report.domain == Domain(2, 1)
        assert report.predict(2) == 1
        assert "cfinite[1:15]" in report.chain

    def test_interleaved_runtimes_split_by_parity(self):
        report = fit_sequence([3 * n + 1 if n % 2 == 0 else 2**n for n in range(21)])
        assert isinstance(report.model, PeriodicSplit)
        assert report.model.period == 2
        assert report.closed_form is None
        assert report.predict(30) == 2**29

    def test_failure_is_a_value(self):
        report = fit_sequence(IRREGULAR)
        assert report.model is None
        assert report.verdict == "failed"
        assert report.refit
        assert report.fitted_length == 18
        assert report.holdout == (19, 20, 21)
        assert report.needs_more_terms
        assert report.notation() == "(none)"

    def test_short_series_scale_the_windows(self):
        report = fit_sequence([x * x for x in range(1, 15)])
        assert report.fitted_length == 10
        assert report.holdout == (11, 12, 13, 14)

    def test_rejects_short_sequences(self):
        with pytest.raises(SequenceLengthError, match="at least 5"):
            fit_sequence([1, 2, 3, 4])


class TestRandomModels:
    def test_fits_on_21_terms_predict_the_next_19(self):
        rng = random.Random(2023)
        for i in range(100):
            family = MODEL_FAMILIES[i % len(MODEL_FAMILIES)]
            truth = family(rng)
            report = fit_sequence([truth(n) for n in range(21)])
            assert report.model is not None, family.__name__
            for x in range(22, 41):
                assert report.predict(x) == truth(x - 1), (family.__name__, x)


class TestRatioFallback:
    def test_attaches_band_to_failed_fit(self):
        cells = [x + 1 for x in range(1, 22)]
        time = [x * x for x in range(1, 22)]
        values = [c * t * (2 + x % 2) // 4 for x, c, t in zip(range(1, 22), cells, time, strict=True)]
        failed = fit_sequence(IRREGULAR)
        report = with_ratio_fallback(failed, values, cells, time, RatioRules(), (1, 2), ((1, 1),))
        assert report.verdict == "band"
        assert report.model.period == 2
        assert report.chain[-1] == "ratio[1,1]"

    def test_exact_fits_are_left_alone(self):
        exact = fit_sequence([x * x for x in range(1, 22)])
        assert with_ratio_fallback(exact, [1] * 21, [1] * 21, [1] * 21, RatioRules(), (1,), ((1, 1),)) is exact

    def test_records_spread_failure(self):
        failed = fit_sequence(IRREGULAR)
        report = with_ratio_fallback(failed, IRREGULAR, [1] * 21, [1] * 21, RatioRules(), (1,), ((1, 1),))
        assert report.model is None
        assert report.chain[-1] == "ratio!spread"


class TestQuasiRecurrence:
    def test_busy_beaver_space(self):
        verdict = check_quasi_recurrence(BB_SPACE, BB_TEMPLATE)
        assert verdict.holds
        assert verdict.realized == (0, 0, 1, 0, -1, 1, -1, 0)

    def test_nonzero_corrections_at_known_inputs(self):
        verdict = check_quasi_recurrence(BB_SPACE, BB_TEMPLATE)
        inputs = [x for x, g in zip(range(3, 11), verdict.realized, strict=True) if g]
        assert inputs == [5, 7, 8, 9]

    def test_reports_offending_position(self):
        broken = [*BB_SPACE[:6], 100, *BB_SPACE[7:]]
        verdict = check_quasi_recurrence(broken, BB_TEMPLATE)
        assert not verdict.holds
        assert verdict.offending == 6
