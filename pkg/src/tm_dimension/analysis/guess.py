"""Function guessing with holdout validation.

A measured sequence is fitted on its first terms (15 of 21 by default) and
the model must reproduce the remaining terms exactly. On failure up to
three leading terms may be dropped, then the fit is repeated on a longer
segment (18 of 21). Exact models are preferred: the quasi-recurrence
search only runs once every exact attempt has failed.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Literal, NamedTuple

from tm_dimension.analysis.base import BaseFitter
from tm_dimension.analysis.cascade import exact_cascade, quasi_cascade
from tm_dimension.analysis.fitters import closed_form, ratio_fallback, starved_periods
from tm_dimension.analysis.sequence_models import CFinite, Domain, ExpPoly, SequenceModel
from tm_dimension.errors import SequenceLengthError
from tm_dimension.protocol.loader import FittingRules, QuasiRules, RatioRules

logger = logging.getLogger(__name__)

MIN_SEQUENCE_TERMS = 5
MIN_FIT_TERMS = 4

Verdict = Literal["exact", "band", "failed"]


@dataclass(frozen=True, slots=True)
class FitReport:
    """Outcome of :func:`fit_sequence`.

    ``domain`` maps model positions to inputs after the dropped prefix;
    ``holdout`` lists the inputs the model was validated on.
    """

    model: SequenceModel | None
    domain: Domain
    fitted_length: int
    holdout: tuple[int, ...]
    verdict: Verdict
    chain: tuple[str, ...]
    dropped: tuple[int, ...] = ()
    refit: bool = False
    closed_form: ExpPoly | None = None
    needs_more_terms: bool = False

    def predict(self, x: int) -> Fraction | None:
        """Model value at input x, or None outside the model's domain."""
        if self.model is None:
            return None
        index = self.domain.index(x)
        return None if index is None else self.model.term(index)

    def notation(self) -> str:
        if self.model is None:
            return "(none)"
        return f"(at {self.domain.start} {self.domain.stride} {self.model.notation()})"


def _windows(length: int, rules: FittingRules) -> list[int]:
    scale = Fraction(length, rules.holdout_end)
    windows: list[int] = []
    for size in (rules.prefix_length, rules.refit_length):
        window = min(max(round(size * scale), MIN_FIT_TERMS), length - 1)
        if window not in windows:
            windows.append(window)
    return windows


def fit_sequence(
    values: Sequence[int],
    domain: Domain | None = None,
    rules: FittingRules | None = None,
    quasi: QuasiRules | None = None,
) -> FitReport:
    """Fit a measured sequence following the holdout protocol.

    Args:
        values: Measured terms; ``values[i]`` belongs to input ``domain.x(i)``.
        domain: Inputs the terms were measured on.
        rules: Window, drop and period settings.
        quasi: Bounds of the quasi-recurrence search.

    Returns:
        FitReport. ``model`` is None when every attempt failed, so the caller
        can fall back to a ratio band.

    Raises:
        SequenceLengthError: fewer than five terms.
    """
    domain = domain or Domain()
    rules = rules or FittingRules()
    quasi = quasi or QuasiRules()
    length = len(values)
    if length < MIN_SEQUENCE_TERMS:
        msg = f"need at least {MIN_SEQUENCE_TERMS} terms to fit and validate, got {length}"
        raise SequenceLengthError(msg)

    windows = _windows(length, rules)
    chain: list[str] = []
    stages: list[tuple[str, list[BaseFitter]]] = [("exact", exact_cascade(rules)), ("quasi", quasi_cascade(quasi))]
    for stage, fitters in stages:
        for attempt, window in enumerate(windows):
            for drop in range(rules.max_dropped_prefix + 1):
                fitted = list(values[drop:window])
                if len(fitted) < MIN_FIT_TERMS:
                    break
                chain.append(f"{stage}[{drop}:{window}]")
                for fitter in fitters:
                    model = fitter.fit(fitted)
                    if model is None:
                        continue
                    validated = fitter.validate(model, values[drop:])
                    if validated is None:
                        chain.append(f"{fitter.name}[{drop}:{window}]!holdout")
                        continue
                    chain.append(f"{fitter.name}[{drop}:{window}]")
                    if drop:
                        logger.debug("Dropped %d leading terms before fitting.", drop)
                    return FitReport(
                        model=validated,
                        domain=domain.shifted(drop),
                        fitted_length=len(fitted),
                        holdout=tuple(domain.x(i) for i in range(window, length)),
                        verdict="exact",
                        chain=tuple(chain),
                        dropped=tuple(values[:drop]),
                        refit=attempt > 0,
                        closed_form=closed_form(validated) if isinstance(validated, CFinite) else None,
                    )

    refit_window = windows[-1]
    return FitReport(
        model=None,
        domain=domain,
        fitted_length=refit_window,
        holdout=tuple(domain.x(i) for i in range(refit_window, length)),
        verdict="failed",
        chain=tuple(chain),
        refit=len(windows) > 1,
        needs_more_terms=bool(starved_periods(refit_window, rules.period_candidates, rules.min_branch_terms)),
    )


def with_ratio_fallback(
    report: FitReport,
    values: Sequence[int],
    space: Sequence[int],
    time: Sequence[int],
    rules: RatioRules,
    periods: Sequence[int],
    monomials: Sequence[tuple[int, int]],
) -> FitReport:
    """Attach an empirical ratio band to a failed fit.

    ``space`` holds cell counts (s + 1) and ``time`` step counts, aligned with
    ``values``. Exact fits and series without a tight band come back unchanged
    apart from the chain entry.
    """
    if report.model is not None or not monomials:
        return report
    model = ratio_fallback(values, space, time, monomials, periods, rules.window, rules.tolerance, rules.min_points)
    if model is None:
        return replace(report, chain=(*report.chain, "ratio!spread"))
    a, b = model.monomial
    return replace(report, model=model, verdict="band", chain=(*report.chain, f"ratio[{a},{b}]"))


class QuasiTemplate(NamedTuple):
    """a(n) = sum(coefficients[i-1] * a(n-i)) + g/denominator with g in ``corrections``."""

    coefficients: tuple[Fraction, ...]
    denominator: int
    corrections: frozenset[int]


@dataclass(frozen=True, slots=True)
class QuasiVerdict:
    holds: bool
    realized: tuple[Fraction, ...] = ()
    offending: int | None = None


def check_quasi_recurrence(values: Sequence[int], template: QuasiTemplate) -> QuasiVerdict:
    """Check every term past the initial ones against ``template``.

    ``realized[j]`` is the correction g at position order + j. On failure
    ``offending`` is the first position whose correction is out of the set.
    """
    order = len(template.coefficients)
    realized: list[Fraction] = []
    for n in range(order, len(values)):
        predicted = sum((c * values[n - i] for i, c in enumerate(template.coefficients, start=1)), Fraction(0))
        correction = (values[n] - predicted) * template.denominator
        if correction not in template.corrections:
            return QuasiVerdict(False, tuple(realized), n)
        realized.append(correction)
    return QuasiVerdict(True, tuple(realized))
