"""Shared test fixtures.

These fixtures provide the anchor machines, protocol and mining jobs that
all test modules can reuse.
"""

import copy
from pathlib import Path

import pytest

from tm_dimension.machines.numbering import Space, decode
from tm_dimension.machines.table import Action, Direction, TransitionTable
from tm_dimension.models import MiningJob
from tm_dimension.protocol.loader import DEFAULT_PROTOCOL, load_protocol

PROTOCOL_PATH = Path(__file__).parent.parent / "protocols" / "fit_protocol.yaml"

L, R = Direction.LEFT, Direction.RIGHT
SETTINGS_VARIABLES = (
    "BUDGET",
    "INPUTS",
    "WORKERS",
    "LOG_LEVEL",
    "LOG_FORMAT",
    "PROTOCOL_PATH",
    "ESCAPE_CHECK",
    "EXTENDED_INPUTS",
)


@pytest.fixture
def space22():
    return Space(2)


@pytest.fixture
def space32():
    return Space(3)


@pytest.fixture
def machine_346(space22):
    """(2,2) machine 346: erases its input, then writes alternating cells."""
    return decode(346, space22)


@pytest.fixture
def busy_beaver(space32):
    """(3,2) machine 666364, the runtime maximizer of its space."""
    return decode(666364, space32)


@pytest.fixture
def looping_table():
    """Bounces between c0 and c1 forever on input 1."""
    return TransitionTable.from_mapping(
        2,
        {
            (1, 0): Action(0, L, 1),
            (1, 1): Action(1, L, 2),
            (2, 0): Action(0, R, 1),
            (2, 1): Action(1, R, 1),
        },
    )


@pytest.fixture
def drifting_table():
    """Walks left over fresh white cells forever."""
    return TransitionTable.from_mapping(
        2,
        {
            (1, 0): Action(0, L, 1),
            (1, 1): Action(1, L, 1),
            (2, 0): Action(0, R, 1),
            (2, 1): Action(0, R, 1),
        },
    )


@pytest.fixture
def sample_protocol():
    """Load the real YAML protocol from the repo."""
    return load_protocol(PROTOCOL_PATH)


@pytest.fixture
def small_job():
    """Machine 346 and the all-left machine 0 of (2,2), in-process sized."""
    return MiningJob(
        space="2,2",
        inputs="1..14",
        budget=10_000,
        extended_inputs=0,
        ids=[346, 0],
        protocol=copy.deepcopy(DEFAULT_PROTOCOL),
    )


@pytest.fixture
def clean_settings(monkeypatch):
    """Clear the settings cache and any TMDIM_ variables from the environment."""
    from tm_dimension.config import get_settings

    for name in SETTINGS_VARIABLES:
        monkeypatch.delenv(f"TMDIM_{name}", raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
