"""The fitters tried by the guessing protocol, in order."""

from collections.abc import Sequence

from tm_dimension.analysis.base import BaseFitter
from tm_dimension.analysis.fitters import (
    extend_quasi,
    fit_cfinite,
    fit_periodic,
    fit_polynomial,
    fit_quasi_cfinite,
    split_cfinite,
    split_periods,
)
from tm_dimension.analysis.sequence_models import QuasiCFinite, SequenceModel
from tm_dimension.protocol.loader import FittingRules, QuasiRules


class PolynomialFitter(BaseFitter):
    name = "poly"

    def fit(self, values: Sequence[int]) -> SequenceModel | None:
        return fit_polynomial(values)


class CFiniteFitter(BaseFitter):
    """Least-order recurrences.

    When the dominant characteristic roots are closed under a candidate
    period, the recurrence is returned as the periodic split of that period
    so each residue class keeps its own growth.
    """

    name = "cfinite"

    def __init__(self, max_order: int | None = None, periods: Sequence[int] = ()) -> None:
        self.max_order = max_order
        self.periods = tuple(periods)

    def fit(self, values: Sequence[int]) -> SequenceModel | None:
        model = fit_cfinite(values, self.max_order)
        if model is None:
            return None
        for period in split_periods(model, self.periods):
            split = split_cfinite(model, period)
            if split is not None:
                return split
        return model


class PeriodicFitter(BaseFitter):
    name = "periodic"

    def __init__(self, periods: Sequence[int], min_branch_terms: int, max_order: int | None = None) -> None:
        self.periods = tuple(periods)
        self.min_branch_terms = min_branch_terms
        self.max_order = max_order

    def fit(self, values: Sequence[int]) -> SequenceModel | None:
        return fit_periodic(values, self.periods, self.min_branch_terms, self.max_order)


class QuasiFitter(BaseFitter):
    """Recurrences that hold up to a bounded correction.

    Validation re-checks the same coefficients on the held-out terms, so the
    reported model carries the corrections realized over all terms.
    """

    name = "quasi"

    def __init__(self, rules: QuasiRules) -> None:
        self.rules = rules

    def fit(self, values: Sequence[int]) -> SequenceModel | None:
        return fit_quasi_cfinite(values, self.rules.corrections, self.rules.max_order, self.rules.max_denominator)

    def validate(self, model: SequenceModel, values: Sequence[int]) -> SequenceModel | None:
        if not isinstance(model, QuasiCFinite):
            return None
        return extend_quasi(model, values)


def exact_cascade(rules: FittingRules) -> list[BaseFitter]:
    """polynomial -> C-finite -> periodic."""
    return [
        PolynomialFitter(),
        CFiniteFitter(rules.max_cfinite_order, rules.period_candidates),
        PeriodicFitter(rules.period_candidates, rules.min_branch_terms, rules.max_cfinite_order),
    ]


def quasi_cascade(rules: QuasiRules) -> list[BaseFitter]:
    return [QuasiFitter(rules)]
