"""Transition tables for (n,2) Turing machines.

The tape extends without bound to the left of the edge cell c0. Moving
Left walks away from the edge, moving Right walks towards it; a Right
move taken on c0 falls off the tape and halts the machine.
"""

from collections.abc import Mapping
from dataclasses import dataclass
from enum import IntEnum
from typing import NamedTuple

from tm_dimension.errors import TableValidationError

COLORS = 2
START_STATE = 1


class Direction(IntEnum):
    """Head movement. The integer value is the low bit of a rule digit."""

    LEFT = 0
    RIGHT = 1

    @property
    def symbol(self) -> str:
        return "R" if self is Direction.RIGHT else "L"

    def reversed(self) -> "Direction":
        return Direction.LEFT if self is Direction.RIGHT else Direction.RIGHT


class Action(NamedTuple):
    """What the head does for one (state, read color) case."""

    write: int
    direction: Direction
    next_state: int

    def __str__(self) -> str:
        return f"{self.write}{self.direction.symbol}{self.next_state}"


@dataclass(frozen=True, slots=True)
class TransitionTable:
    """A total rule set: ``rules[(state - 1) * 2 + color]`` is the action for that case."""

    states: int
    rules: tuple[Action, ...]

    def __post_init__(self) -> None:
        if self.states < 1:
            msg = f"a machine needs at least one state, got {self.states}"
            raise TableValidationError(msg)
        expected = self.states * COLORS
        if len(self.rules) != expected:
            msg = f"table for {self.states} states must have {expected} entries, got {len(self.rules)}"
            raise TableValidationError(msg)
        for index, action in enumerate(self.rules):
            state, color = divmod(index, COLORS)
            if action.write not in (0, 1):
                msg = f"rule ({state + 1},{color}) writes unknown color {action.write}"
                raise TableValidationError(msg)
            if not 1 <= action.next_state <= self.states:
                msg = f"rule ({state + 1},{color}) moves to state {action.next_state} outside 1..{self.states}"
                raise TableValidationError(msg)
            if not isinstance(action.direction, Direction):
                msg = f"rule ({state + 1},{color}) has no valid direction"
                raise TableValidationError(msg)

    @classmethod
    def from_mapping(cls, states: int, mapping: Mapping[tuple[int, int], Action]) -> "TransitionTable":
        """Build a table from ``{(state, color): Action}``; every case must be present."""
        rules = []
        for state in range(1, states + 1):
            for color in range(COLORS):
                if (state, color) not in mapping:
                    msg = f"table is missing the rule for state {state} reading {color}"
                    raise TableValidationError(msg)
                rules.append(mapping[(state, color)])
        return cls(states, tuple(rules))

    def rule(self, state: int, color: int) -> Action:
        return self.rules[(state - 1) * COLORS + color]

    def as_mapping(self) -> dict[tuple[int, int], Action]:
        return {(i // COLORS + 1, i % COLORS): action for i, action in enumerate(self.rules)}

    def relabel(self, permutation: Mapping[int, int]) -> "TransitionTable":
        """Rename states through ``permutation`` (old -> new); unmapped states keep their label."""
        renamed: dict[tuple[int, int], Action] = {}
        for (state, color), action in self.as_mapping().items():
            target = permutation.get(action.next_state, action.next_state)
            renamed[(permutation.get(state, state), color)] = action._replace(next_state=target)
        return TransitionTable.from_mapping(self.states, renamed)

    def __str__(self) -> str:
        return " ".join(f"({s},{c})->{a}" for (s, c), a in self.as_mapping().items())


def reverse_table(table: TransitionTable) -> TransitionTable | None:
    """Canonical reversal of a machine.

    Every instruction <color, state> -> <color', state', dir> becomes
    <color', state'> -> <color, state, reversed dir>. Only defined when the
    (color, state) map is a bijection; returns None otherwise.
    """
    reversed_rules: dict[tuple[int, int], Action] = {}
    for (state, color), action in table.as_mapping().items():
        key = (action.next_state, action.write)
        if key in reversed_rules:
            return None
        reversed_rules[key] = Action(color, action.direction.reversed(), state)
    return TransitionTable.from_mapping(table.states, reversed_rules)
