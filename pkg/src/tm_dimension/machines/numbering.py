"""Wolfram-style machine numbering for (n,k) spaces.

A machine number is written in base 2·n·k with exactly n·k digits, most
significant first. The digits belong to the cases (1,1), (1,0), (2,1),
(2,0), ..., (n,1), (n,0): state ascending, read color descending. A digit
d encodes the action

    next state  = d // (2k) + 1
    write color = (d // 2) mod k
    direction   = Right if d is odd else Left

This convention reproduces the published behavior of (2,2) machine 346
and of the (3,2) Busy Beaver pair 599 063 / 666 364.
"""

import itertools
import re
from collections.abc import Iterator
from typing import NamedTuple

import numpy as np

from tm_dimension.errors import MachineRangeError, TableValidationError
from tm_dimension.machines.table import COLORS, START_STATE, Action, Direction, TransitionTable

_SPACE_RE = re.compile(r"^\s*(\d+)\s*,\s*(\d+)\s*$")


class Space(NamedTuple):
    """An (n,k) machine space."""

    states: int
    colors: int = COLORS

    @property
    def base(self) -> int:
        return 2 * self.states * self.colors

    @property
    def size(self) -> int:
        return self.base ** (self.states * self.colors)

    def __str__(self) -> str:
        return f"({self.states},{self.colors})"

    @classmethod
    def parse(cls, text: str) -> "Space":
        """Parse the CLI form ``"n,k"``."""
        match = _SPACE_RE.match(text)
        if match is None:
            msg = f"space must look like 'n,k', got '{text}'"
            raise MachineRangeError(msg)
        space = cls(int(match.group(1)), int(match.group(2)))
        if space.colors != COLORS:
            msg = f"only k = {COLORS} colors are supported, got k = {space.colors}"
            raise MachineRangeError(msg)
        if space.states < 1:
            msg = f"a space needs at least one state, got n = {space.states}"
            raise MachineRangeError(msg)
        return space


def _check_range(machine: int, space: Space) -> None:
    if not 0 <= machine < space.size:
        msg = f"machine {machine} is outside {space} space: ids must satisfy 0 <= id < {space.size}"
        raise MachineRangeError(msg)


def _cases(space: Space) -> list[tuple[int, int]]:
    return [(state, color) for state in range(1, space.states + 1) for color in reversed(range(space.colors))]


def decode(machine: int, space: Space) -> TransitionTable:
    """Decode a machine number into its transition table."""
    _check_range(machine, space)
    digits = []
    remainder = machine
    for _ in range(space.states * space.colors):
        remainder, digit = divmod(remainder, space.base)
        digits.append(digit)
    digits.reverse()

    mapping: dict[tuple[int, int], Action] = {}
    for case, digit in zip(_cases(space), digits, strict=True):
        next_state, low = divmod(digit, 2 * space.colors)
        write, direction = divmod(low, 2)
        mapping[case] = Action(write, Direction(direction), next_state + 1)
    return TransitionTable.from_mapping(space.states, mapping)


def encode(table: TransitionTable) -> int:
    """Inverse of :func:`decode`."""
    space = Space(table.states)
    machine = 0
    for state, color in _cases(space):
        action = table.rule(state, color)
        if not 1 <= action.next_state <= space.states:
            msg = f"rule ({state},{color}) targets state {action.next_state} outside 1..{space.states}"
            raise TableValidationError(msg)
        digit = (action.next_state - 1) * 2 * space.colors + action.write * 2 + int(action.direction)
        machine = machine * space.base + digit
    return machine


def enumerate_space(space: Space) -> Iterator[int]:
    """Yield every machine number of ``space`` once, ascending, without materializing the space."""
    yield from range(space.size)


def twin_class(machine: int, space: Space) -> list[int]:
    """All machine numbers obtained by relabeling states 2..n (state 1 stays the start state)."""
    table = decode(machine, space)
    others = list(range(START_STATE + 1, space.states + 1))
    members = set()
    for image in itertools.permutations(others):
        permutation = dict(zip(others, image, strict=True))
        members.add(encode(table.relabel(permutation)))
    return sorted(members)


def canonical_twin(machine: int, space: Space) -> int:
    """Least machine number of the twin class of ``machine``."""
    return twin_class(machine, space)[0]


def sample_machines(space: Space, count: int, seed: int, canonical: bool = True) -> list[int]:
    """``count`` distinct machines drawn uniformly with a seeded generator, ascending.

    With ``canonical`` only least members of twin classes are accepted, so
    every twin class is equally likely whatever its size.

    Raises:
        MachineRangeError: If the space cannot supply ``count`` distinct machines.
    """
    if not 1 <= count <= space.size:
        msg = f"sample size must lie in 1..{space.size} for {space}, got {count}"
        raise MachineRangeError(msg)
    rng = np.random.default_rng(seed)
    chosen: set[int] = set()
    draws = 0
    limit = 64 * count + space.size // 2
    while len(chosen) < count:
        if draws >= limit:
            msg = f"could not draw {count} distinct machines from {space} in {limit} draws"
            raise MachineRangeError(msg)
        draws += 1
        machine = int(rng.integers(space.size))
        if canonical and canonical_twin(machine, space) != machine:
            continue
        chosen.add(machine)
    return sorted(chosen)


def parse_ids(text: str) -> list[int]:
    """Parse a comma-separated id list such as ``"599063,666364"``."""
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        msg = f"machine ids must be decimal integers, got '{text}'"
        raise MachineRangeError(msg) from e
