"""Abstract base class for sequence fitters.

The guessing protocol does not care which fitter produced a model, only
that it reproduces the fitted terms exactly and can be checked against
held-out terms.
"""

from abc import ABC, abstractmethod
from collections.abc import Sequence

from tm_dimension.analysis.sequence_models import SequenceModel


class BaseFitter(ABC):
    """Interface for exact sequence fitters."""

    name: str

    @abstractmethod
    def fit(self, values: Sequence[int]) -> SequenceModel | None:
        """Fit ``values`` exactly.

        Args:
            values: Consecutive terms, position 0 first.

        Returns:
            A model reproducing every term, or None when this fitter has no fit.
        """
        ...

    def validate(self, model: SequenceModel, values: Sequence[int]) -> SequenceModel | None:
        """Check ``model`` against the full run of terms it was fitted on a prefix of.

        Returns the model to report (possibly extended) or None when a
        held-out term disagrees.
        """
        return model if model.reproduces(values) else None
