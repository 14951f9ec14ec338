"""Compatibility shims for older Python versions."""

from __future__ import annotations

try:
    from enum import StrEnum
except ImportError:  # Python < 3.11: backport of enum.StrEnum
    from enum import Enum

    class StrEnum(str, Enum):  # type: ignore[no-redef]
        """Enum where members are also (and must be) strings."""

        def __new__(cls, *values: str) -> StrEnum:
            if len(values) > 3:
                raise TypeError(f"too many arguments for str(): {values!r}")
            if len(values) == 1 and not isinstance(values[0], str):
                raise TypeError(f"{values[0]!r} is not a string")
            value = str(*values)
            member = str.__new__(cls, value)
            member._value_ = value
            return member

        __str__ = str.__str__  # type: ignore[assignment]
        __format__ = str.__format__  # type: ignore[assignment]

        @staticmethod
        def _generate_next_value_(name: str, start: int, count: int, last_values: list[str]) -> str:
            return name.lower()


__all__ = ["StrEnum"]
