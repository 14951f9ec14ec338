"""Budgeted execution of a machine on one input.

Measures, for a halting run:

    t  steps until the head falls off the edge
    s  furthest cell index the head visited (its distance from c0)
    N  black cells summed over the t configurations in which a step is
       executed (rows 0..t-1 of the space-time diagram), columns 0..s

The black cells of the halting configuration are kept apart in
``final_row_black`` so the t+1-row convention is ``N + final_row_black``.
"""

import logging
from collections.abc import Iterable
from dataclasses import dataclass, field
from tm_dimension._compat import StrEnum
from typing import Final

from tm_dimension.errors import InputDomainError
from tm_dimension.machines.table import START_STATE, Direction, TransitionTable
from tm_dimension.machines.tapes import InputTape, unary_input

logger = logging.getLogger(__name__)

DEFAULT_BUDGET: Final = 10_000_000


class RunStatus(StrEnum):
    HALTED = "halted"
    DIVERGENT_BY_CYCLE = "divergent_by_cycle"
    DIVERGENT_BY_ESCAPE = "divergent_by_escape"
    BUDGET_EXCEEDED = "budget_exceeded"


@dataclass(frozen=True, slots=True)
class RunMetrics:
    """Outcome of one run. t, s and N are only meaningful when the run halted."""

    status: RunStatus
    t: int
    s: int
    N: int
    final_row_black: int = 0
    output: str = ""
    cycle: tuple[int, int] | None = None

    @property
    def halted(self) -> bool:
        return self.status is RunStatus.HALTED

    @property
    def cells(self) -> int:
        return self.s + 1


@dataclass(frozen=True, slots=True)
class Configuration:
    """Machine state, head position and tape at one time step."""

    state: int
    head: int
    tape: tuple[int, ...]
    max_visited: int = 0

    def cell(self, index: int) -> int:
        return self.tape[index] if index < len(self.tape) else 0

    def key(self) -> tuple[int, int, tuple[int, ...]]:
        """Identity of the configuration with trailing white cells ignored."""
        tape = list(self.tape)
        while tape and tape[-1] == 0:
            tape.pop()
        return self.state, self.head, tuple(tape)

    @classmethod
    def initial(cls, tape: InputTape) -> "Configuration":
        return cls(START_STATE, 0, tape.cells, 0)


class _Halt:
    def __repr__(self) -> str:
        return "HALT"


HALT: Final = _Halt()


def step(config: Configuration, table: TransitionTable) -> Configuration | _Halt:
    """Apply one rule. Returns HALT when the head leaves the tape from c0."""
    color = config.cell(config.head)
    action = table.rule(config.state, color)
    tape = list(config.tape)
    if config.head >= len(tape):
        tape.extend([0] * (config.head + 1 - len(tape)))
    tape[config.head] = action.write
    if action.direction is Direction.RIGHT:
        if config.head == 0:
            return HALT
        head = config.head - 1
    else:
        head = config.head + 1
    return Configuration(action.next_state, head, tuple(tape), max(config.max_visited, head))


def replay(table: TransitionTable, tape: InputTape, steps: int) -> Configuration | _Halt:
    """Configuration after ``steps`` applications of :func:`step`."""
    config: Configuration | _Halt = Configuration.initial(tape)
    for _ in range(steps):
        if isinstance(config, _Halt):
            break
        config = step(config, table)
    return config


def escaping_states(table: TransitionTable) -> frozenset[int]:
    """States from which a head on fresh white cells keeps moving left forever.

    Starting in such a state on a never-visited cell, the chain of
    (state, white) rules only moves Left and revisits a state, so the head
    reads fresh white cells for ever.
    """
    escaping = set()
    for start in range(1, table.states + 1):
        seen: set[int] = set()
        state = start
        while state not in seen:
            seen.add(state)
            action = table.rule(state, 0)
            if action.direction is Direction.RIGHT:
                break
            state = action.next_state
        else:
            escaping.add(start)
    return frozenset(escaping)


@dataclass(slots=True)
class _Trace:
    changes: list[tuple[int, int]] = field(default_factory=list)


def _execute(
    table: TransitionTable,
    tape_in: InputTape,
    budget: int,
    escape_check: bool,
    trace: _Trace | None = None,
) -> RunMetrics:
    rules = table.rules
    input_len = len(tape_in.cells)
    tape = bytearray(tape_in.cells)
    tape.extend(bytes(64))
    escaping = escaping_states(table) if escape_check else frozenset()

    state = START_STATE
    head = 0
    black = tape_in.black_cells
    boxes = 0
    t = 0
    s = 0

    # Brent's cycle detection on exact configurations.
    saved_state, saved_head, saved_black = state, head, black
    saved_tape = bytes(tape).rstrip(b"\x00")
    saved_t = 0
    checkpoint = 1

    while t < budget:
        color = tape[head]
        write, direction, next_state = rules[(state - 1) * 2 + color]
        boxes += black
        if write != color:
            tape[head] = write
            black += write - color
        if trace is not None:
            trace.changes.append((head, write))
        t += 1
        state = next_state
        if direction:
            if head == 0:
                beyond = sum(tape_in.cells[s + 1 :])
                output = bytes(tape).rstrip(b"\x00")
                return RunMetrics(
                    status=RunStatus.HALTED,
                    t=t,
                    s=s,
                    N=boxes - t * beyond,
                    final_row_black=black - beyond,
                    output="".join("1" if b else "0" for b in output),
                )
            head -= 1
        else:
            head += 1
            if head >= len(tape):
                tape.extend(bytes(len(tape)))
            if head > s:
                s = head
                if head >= input_len and state in escaping:
                    return RunMetrics(RunStatus.DIVERGENT_BY_ESCAPE, t, s, boxes)

        if state == saved_state and head == saved_head and black == saved_black:
            if bytes(tape).rstrip(b"\x00") == saved_tape:
                return RunMetrics(RunStatus.DIVERGENT_BY_CYCLE, t, s, boxes, cycle=(saved_t, t))
        if t == checkpoint:
            saved_state, saved_head, saved_black = state, head, black
            saved_tape = bytes(tape).rstrip(b"\x00")
            saved_t = t
            checkpoint *= 2

    return RunMetrics(RunStatus.BUDGET_EXCEEDED, t, s, boxes)


def run(
    table: TransitionTable,
    tape: InputTape,
    budget: int = DEFAULT_BUDGET,
    escape_check: bool = False,
) -> RunMetrics:
    """Run ``table`` on ``tape`` for at most ``budget`` steps.

    Reports DIVERGENT_BY_CYCLE when an exact configuration repeats (the
    witness step pair is in ``cycle``), DIVERGENT_BY_ESCAPE when
    ``escape_check`` is on and the head provably walks off into blank tape,
    and BUDGET_EXCEEDED otherwise.
    """
    if budget < 1:
        msg = f"step budget must be at least 1, got {budget}"
        raise InputDomainError(msg)
    return _execute(table, tape, budget, escape_check)


def run_traced(
    table: TransitionTable, tape: InputTape, budget: int = DEFAULT_BUDGET
) -> tuple[RunMetrics, list[tuple[int, int]]]:
    """Like :func:`run` but also returns the (head, written color) of every step."""
    if budget < 1:
        msg = f"step budget must be at least 1, got {budget}"
        raise InputDomainError(msg)
    trace = _Trace()
    metrics = _execute(table, tape, budget, escape_check=False, trace=trace)
    return metrics, trace.changes


@dataclass(frozen=True, slots=True)
class MetricsSeries:
    """Halted runs of one machine over an input range, divergent inputs removed.

    ``runs`` keeps every run, halted or not, in input order.
    """

    points: tuple[tuple[int, RunMetrics], ...]
    dropped: dict[str, int]
    runs: tuple[tuple[int, RunMetrics], ...] = ()

    @property
    def xs(self) -> list[int]:
        return [x for x, _ in self.points]

    @property
    def undefined(self) -> bool:
        """No input halted, so the dimension is undefined."""
        return not self.points

    @property
    def unknown(self) -> int:
        return self.dropped.get(RunStatus.BUDGET_EXCEEDED.value, 0)

    def values(self, name: str) -> list[int]:
        return [getattr(m, name) for _, m in self.points]


def run_inputs(
    table: TransitionTable,
    inputs: Iterable[int],
    budget: int = DEFAULT_BUDGET,
    escape_check: bool = False,
) -> list[tuple[int, RunMetrics]]:
    """Run every unary input in ``inputs``, ascending in x, whatever the outcome."""
    xs = sorted(set(inputs))
    if not xs:
        msg = "input range is empty"
        raise InputDomainError(msg)
    return [(x, run(table, unary_input(x), budget, escape_check)) for x in xs]


def series_from_runs(runs: Iterable[tuple[int, RunMetrics]]) -> MetricsSeries:
    """Keep the halted runs and tally the others by status."""
    every = tuple(runs)
    points = []
    dropped: dict[str, int] = {}
    for x, metrics in every:
        if metrics.halted:
            points.append((x, metrics))
        else:
            dropped[metrics.status.value] = dropped.get(metrics.status.value, 0) + 1
    return MetricsSeries(tuple(points), dropped, every)


def metrics_series(
    table: TransitionTable,
    inputs: Iterable[int],
    budget: int = DEFAULT_BUDGET,
    escape_check: bool = False,
) -> MetricsSeries:
    """Run every unary input in ``inputs`` and keep the halted ones, ascending in x."""
    series = series_from_runs(run_inputs(table, inputs, budget, escape_check))
    if series.undefined:
        logger.debug("No input halted; dimension undefined.")
    return series
