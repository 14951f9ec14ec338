"""Exception hierarchy.

Non-halting runs, failed fits and indeterminate findings are values,
not exceptions. Everything raised here is a caller error or an
environment problem.
"""


class TMDimensionError(Exception):
    """Base class for all errors raised by this package."""


class MachineRangeError(TMDimensionError, ValueError):
    """A machine number lies outside its (n,k) space."""


class TableValidationError(TMDimensionError, ValueError):
    """A transition table is not total or references unknown states/colors."""


class InputDomainError(TMDimensionError, ValueError):
    """An input or input range lies outside the supported domain."""


class SequenceLengthError(TMDimensionError, ValueError):
    """A sequence is too short for the requested fit."""


class ResultStoreError(TMDimensionError):
    """Raised when the results directory cannot be used.

    Carries a message that is safe to print to the user and the
    underlying detail for the logs.
    """

    def __init__(self, user_message: str, internal_detail: str = "") -> None:
        self.user_message = user_message
        self.internal_detail = internal_detail
        super().__init__(user_message)
