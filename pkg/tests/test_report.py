"""Tests for dimension reports.

Covers: d and the space-time bound, c_tau from closed forms, buckets,
the finding verdicts on a synthetic quadratic machine, novel c_tau values,
undefined machines and the log-ratio convergence check.
"""

from fractions import Fraction

import pytest
import sympy as sp

from tm_dimension.analysis.guess import fit_sequence
from tm_dimension.dimension.growth import UNKNOWN_GROWTH, ExpBase, Growth, GrowthClass
from tm_dimension.dimension.limits import UNKNOWN_LIMIT
from tm_dimension.dimension.report import (
    Bucket,
    Finding,
    FindingVerdict,
    check_log_ratio_convergence,
    classify_bucket,
    dimension,
    dimension_report,
    measured_ratio_decreases,
    upper_bound,
)

XS = list(range(1, 22))


def poly(degree):
    return Growth((GrowthClass.poly(degree),))


def exp(base):
    return Growth((GrowthClass.exp(ExpBase(sp.Integer(base))),))


CONSTANT = Growth((GrowthClass.constant(Fraction(5)),))


@pytest.fixture
def quadratic_machine():
    """t = (x+1)^2, s = x, N = x (x+1)^2: boxes fill the whole space-time rectangle."""
    measured = {
        "t": [(x + 1) ** 2 for x in XS],
        "s": list(XS),
        "N": [x * (x + 1) ** 2 for x in XS],
    }
    fits = {name: fit_sequence(values) for name, values in measured.items()}
    return fits, measured


class TestDimension:
    def test_ratio_of_degrees(self):
        assert dimension(poly(3), poly(2)) == Fraction(3, 2)

    def test_constant_time_is_two(self):
        assert dimension(CONSTANT, CONSTANT) == 2
        assert upper_bound(CONSTANT, CONSTANT) == 2

    def test_boxes_outgrowing_time_are_not_trusted(self):
        assert dimension(exp(2), poly(2)) is UNKNOWN_LIMIT

    def test_upper_bound(self):
        assert upper_bound(poly(1), poly(2)) == Fraction(3, 2)
        assert upper_bound(poly(1), exp(2)) == 1
        assert upper_bound(poly(1), poly(1)) == 2


class TestBuckets:
    @pytest.mark.parametrize(
        ("time", "space", "bucket"),
        [
            (CONSTANT, CONSTANT, Bucket.CONSTANT),
            (poly(1), poly(1), Bucket.LINEAR),
            (poly(2), poly(1), Bucket.QUADRATIC),
            (poly(3), poly(1), Bucket.CUBIC),
            (poly(2), poly(2), Bucket.OTHER_POLYNOMIAL),
            (poly(4), poly(1), Bucket.OTHER_POLYNOMIAL),
            (exp(2), poly(1), Bucket.EXP_LINEAR),
            (exp(4), exp(2), Bucket.EXP_EXP),
            (exp(2), poly(2), Bucket.OTHER_SUPER_POLYNOMIAL),
        ],
    )
    def test_classify(self, time, space, bucket):
        assert classify_bucket(time, space) is bucket

    def test_unknown_growth_is_unclassified(self):
        assert classify_bucket(Growth((GrowthClass.poly(1),)), UNKNOWN_GROWTH) is Bucket.UNCLASSIFIED


class TestDimensionReport:
    def test_quadratic_machine(self, quadratic_machine):
        fits, measured = quadratic_machine
        report = dimension_report(7, fits, XS, measured, states=2)
        assert report.d == Fraction(3, 2)
        assert report.upper == Fraction(3, 2)
        assert report.c_tau.exact
        assert report.c_tau.value == 1
        assert report.bucket is Bucket.QUADRATIC
        assert not report.constant_time

    def test_all_findings_hold(self, quadratic_machine):
        fits, measured = quadratic_machine
        report = dimension_report(7, fits, XS, measured, states=2)
        assert set(report.findings) == set(Finding)
        assert set(report.findings.values()) == {FindingVerdict.HOLDS}

    def test_unlisted_c_tau_is_novel(self, quadratic_machine):
        fits, measured = quadratic_machine
        report = dimension_report(7, fits, XS, measured, states=2, known_c_tau=frozenset({Fraction(1, 2)}))
        assert report.findings[Finding.F3] is FindingVerdict.NOVEL_VALUE

    def test_few_inputs_leave_c_tau_insufficient(self, quadratic_machine):
        fits, measured = quadratic_machine
        short = {name: values[:8] for name, values in measured.items()}
        report = dimension_report(7, fits, XS[:8], short, states=2)
        assert report.c_tau.insufficient
        assert report.findings[Finding.F3] is FindingVerdict.INDETERMINATE

    def test_undefined_machine(self):
        report = dimension_report(9, {}, [], {}, states=2)
        assert report.undefined
        assert report.bucket is Bucket.UNCLASSIFIED
        assert report.d is UNKNOWN_LIMIT
        assert str(report.c_tau) == "insufficient"


class TestMeasuredRatio:
    def test_decreasing_ratio_holds(self):
        xs = [1, 2, 3, 4]
        assert measured_ratio_decreases(xs, xs, [x * x for x in xs], poly(2)) is FindingVerdict.HOLDS

    def test_growing_ratio_fails(self):
        xs = [1, 2, 3, 4]
        assert measured_ratio_decreases(xs, [x * x for x in xs], [x + 1 for x in xs], poly(2)) is FindingVerdict.FAILS

    def test_linear_time_is_not_applicable(self):
        xs = [1, 2, 3]
        assert measured_ratio_decreases(xs, xs, xs, poly(1)) is FindingVerdict.NOT_APPLICABLE


class TestLogRatioConvergence:
    def test_converges_to_one(self):
        check = check_log_ratio_convergence(lambda x: Fraction(x * x - 4 * x), lambda x: Fraction(x * x))
        assert check.verdict is FindingVerdict.HOLDS
        assert len(check.values) == 3

    def test_other_limit_fails(self):
        check = check_log_ratio_convergence(lambda x: Fraction(x), lambda x: Fraction(x * x))
        assert check.verdict is FindingVerdict.FAILS

    def test_missing_prediction_is_indeterminate(self):
        check = check_log_ratio_convergence(lambda x: None, lambda x: Fraction(x))
        assert check.verdict is FindingVerdict.INDETERMINATE
        assert check.values == ()
