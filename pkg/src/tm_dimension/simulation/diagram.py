"""Space-time diagrams as numpy bit matrices, plus PBM export.

Row i is the tape after i steps (row 0 is the input), column j is cell c_j.
Drawings put the edge cell on the right, as in the usual pictures of these
machines, so exports flip the columns.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import numpy.typing as npt

from tm_dimension.machines.table import TransitionTable
from tm_dimension.machines.tapes import InputTape
from tm_dimension.simulation.simulator import DEFAULT_BUDGET, RunMetrics, run_traced

logger = logging.getLogger(__name__)

Bits = npt.NDArray[np.uint8]


@dataclass(frozen=True, slots=True, eq=False)
class SpaceTimeDiagram:
    """(t+1) x (s+1) matrix of a halting run; black = 1."""

    cells: Bits
    metrics: RunMetrics

    @property
    def rows(self) -> int:
        return int(self.cells.shape[0])

    @property
    def width(self) -> int:
        return int(self.cells.shape[1])

    def black_cells(self, include_final_row: bool = False) -> int:
        """Black cells over rows 0..t-1, or over all t+1 rows."""
        body = self.cells if include_final_row else self.cells[:-1]
        return int(body.sum(dtype=np.int64))

    def changed_cells(self, row: int) -> list[int]:
        """Columns in which ``row`` differs from the row above it."""
        return [int(c) for c in np.flatnonzero(self.cells[row] != self.cells[row - 1])]

    def is_time_mirror_of(self, other: "SpaceTimeDiagram") -> bool:
        """True when row i here equals row t-i of ``other``."""
        return self.cells.shape == other.cells.shape and bool(np.array_equal(self.cells, other.cells[::-1]))

    def drawn(self) -> Bits:
        """The matrix as drawn: edge cell in the rightmost column."""
        return self.cells[:, ::-1]

    def to_pbm(self) -> str:
        return to_pbm(self.drawn())


def render_diagram(
    table: TransitionTable, tape: InputTape, budget: int = DEFAULT_BUDGET
) -> SpaceTimeDiagram | RunMetrics:
    """Full diagram of a halting run, or the run's metrics when it did not halt."""
    metrics, changes = run_traced(table, tape, budget)
    if not metrics.halted:
        logger.debug("Run did not halt (%s); no diagram.", metrics.status.value)
        return metrics

    width = metrics.s + 1
    row = np.zeros(width, dtype=np.uint8)
    head_cells = tape.cells[:width]
    row[: len(head_cells)] = head_cells
    cells = np.empty((metrics.t + 1, width), dtype=np.uint8)
    cells[0] = row
    for i, (position, color) in enumerate(changes, start=1):
        row[position] = color
        cells[i] = row
    return SpaceTimeDiagram(cells, metrics)


def to_pbm(matrix: Bits) -> str:
    """Plain PBM (P1): one text row per time step, '1' = black."""
    height, width = matrix.shape
    lines = ["P1", f"{width} {height}"]
    lines.extend(" ".join("1" if v else "0" for v in row) for row in matrix)
    return "\n".join(lines) + "\n"


def composite_sheet(diagrams: Sequence[SpaceTimeDiagram], gap: int = 2) -> Bits:
    """Drawn diagrams side by side, top-aligned, separated by ``gap`` white columns."""
    if not diagrams:
        return np.zeros((0, 0), dtype=np.uint8)
    height = max(d.rows for d in diagrams)
    width = sum(d.width for d in diagrams) + gap * (len(diagrams) - 1)
    sheet = np.zeros((height, width), dtype=np.uint8)
    column = 0
    for diagram in diagrams:
        sheet[: diagram.rows, column : column + diagram.width] = diagram.drawn()
        column += diagram.width + gap
    return sheet


def write_pbm(path: Path, matrix: Bits) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_pbm(matrix))
    return path
