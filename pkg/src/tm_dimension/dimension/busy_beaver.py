"""Exact recurrences of the (3,2) Busy Beaver.

Runtime and box count of input i follow from the space of inputs i-1 and
i. The trigonometric parity selectors of the published forms reduce to
integer parity: sin^4(pi*s/2) is s mod 2, cos(pi*s) and cos(3*pi*s) are
(-1)**s, cos(2*pi*s) is 1.
"""

from collections.abc import Sequence
from fractions import Fraction
from typing import Final

BB_MACHINE: Final = 666364
BB_TWIN: Final = 599063
FIRST_RUNTIME: Final = 7
FIRST_BOXES: Final = 13


def _sign(s: int) -> int:
    return -1 if s % 2 else 1


def bb_runtime_next(s_prev: int, t_prev: int) -> Fraction:
    """t(i) from s(i-1) and t(i-1)."""
    c = _sign(s_prev)
    return Fraction(3, 2) * s_prev**2 - Fraction(s_prev % 2, 2) + Fraction(s_prev * (c + 15), 2) + t_prev + 8


def bb_boxes_next(i: int, n_prev: int, t_i: int, s_prev: int, s_i: int) -> Fraction:
    """N(i) from N(i-1), t(i), s(i-1) and s(i)."""
    c = _sign(s_prev)
    total = (
        32 * n_prev
        + 32 * t_i
        + 32 * s_prev**3
        + 152 * s_prev**2
        + 140 * s_prev
        + 16 * s_i**2
        + 16 * s_i
        + 16 * s_prev**2 * c
        + 24 * s_prev * c
        - 4 * s_prev
        - 4 * c
        - 9
        + 32 * i
        - 19
    )
    return Fraction(total, 32)


def first_recurrence_mismatch(
    xs: Sequence[int], space: Sequence[int], time: Sequence[int], boxes: Sequence[int]
) -> int | None:
    """First input whose measured t or N disagrees with the recurrences, or None.

    Only consecutive inputs are compared; each check uses the measured
    values of the previous input.
    """
    if xs and xs[0] == 1 and (time[0] != FIRST_RUNTIME or boxes[0] != FIRST_BOXES):
        return 1
    for k in range(1, len(xs)):
        if xs[k] != xs[k - 1] + 1:
            continue
        if bb_runtime_next(space[k - 1], time[k - 1]) != time[k]:
            return xs[k]
        if bb_boxes_next(xs[k], boxes[k - 1], time[k], space[k - 1], space[k]) != boxes[k]:
            return xs[k]
    return None
