"""Input tape builders.

Cells are indexed by their distance from the edge: c0 is next to the edge,
higher indices lie further to the left. Everything beyond the stored cells
is white.
"""

from dataclasses import dataclass

from tm_dimension.errors import InputDomainError


@dataclass(frozen=True, slots=True)
class InputTape:
    """A finite prefix of black/white cells; all further cells are white."""

    cells: tuple[int, ...]

    @property
    def black_cells(self) -> int:
        return sum(self.cells)

    def cell(self, index: int) -> int:
        return self.cells[index] if index < len(self.cells) else 0

    def __str__(self) -> str:
        # Written edge-last, the way the diagrams are drawn.
        return "".join(str(c) for c in reversed(self.cells)) or "0"


def unary_input(x: int) -> InputTape:
    """Input x: cells c0..c(x-1) black, all others white."""
    if x < 1:
        msg = f"unary inputs start at 1, got {x}"
        raise InputDomainError(msg)
    return InputTape((1,) * x)


def rho_input(a: int) -> InputTape:
    """Alternative coding: binary digits of ``a`` on the even cells, end marker on an odd cell.

    With k = floor(log2 a) + 1 (k = 1 for a = 0), cell c(2i) holds bit i of a
    for 0 <= i <= k, odd cells are white except c(2k+1), which is black.
    """
    if a < 0:
        msg = f"the alternative coding takes naturals, got {a}"
        raise InputDomainError(msg)
    k = a.bit_length() if a else 1
    cells = [0] * (2 * k + 2)
    for i in range(k + 1):
        cells[2 * i] = (a >> i) & 1
    cells[2 * k + 1] = 1
    return InputTape(tuple(cells))


def tape_value(cells: tuple[int, ...] | InputTape) -> int:
    """Read a tape as a binary numeral with c0 as the least significant bit."""
    bits = cells.cells if isinstance(cells, InputTape) else cells
    return sum(bit << i for i, bit in enumerate(bits))


def parse_range(text: str) -> range:
    """Parse an input range ``"a..b"`` (inclusive, 1 <= a <= b) or a single input ``"a"``."""
    start, sep, stop = text.strip().partition("..")
    try:
        first = int(start)
        last = int(stop) if sep else first
    except ValueError as e:
        msg = f"input ranges are written 'a..b', got '{text}'"
        raise InputDomainError(msg) from e
    if not 1 <= first <= last:
        msg = f"input ranges need 1 <= a <= b, got '{text}'"
        raise InputDomainError(msg)
    return range(first, last + 1)
