"""Search for symmetric performers.

Two machines are symmetric performers when, on every even input of the
search range, the diagram of one is the time mirror of the other: row i of
the first equals row t - i of the second. Both then compute the tape
identity on those inputs, so machines are first screened for that, then
matched through digests of their mirrored diagrams, and every match is
confirmed cell by cell.
"""

import hashlib
import os
from collections import defaultdict
from collections.abc import Iterable, Sequence
from tm_dimension._compat import StrEnum
from multiprocessing import Pool
from typing import NamedTuple

import numpy as np
import structlog

from tm_dimension.errors import InputDomainError
from tm_dimension.machines.numbering import Space, canonical_twin, decode, encode, enumerate_space
from tm_dimension.machines.table import reverse_table
from tm_dimension.machines.tapes import parse_range, unary_input
from tm_dimension.simulation.diagram import Bits, SpaceTimeDiagram, render_diagram
from tm_dimension.simulation.simulator import run
from tm_dimension.store.results import Results

logger = structlog.get_logger(__name__)

SEARCH_BUDGET = 100_000
CHUNKSIZE = 256


class Prune(StrEnum):
    """How candidate partners are found before diagrams are compared.

    IDENTITY screens every machine for the tape identity and pairs them by
    mirrored-diagram digest. REVERSAL only compares a machine with the twin
    class of its canonical reversal, which is much cheaper but misses pairs
    that are not related by the reversal.
    """

    IDENTITY = "identity"
    REVERSAL = "reversal"


class SymmetricPair(NamedTuple):
    machine: int
    mirror: int
    steps: tuple[int, ...]
    by_reversal: bool


class _Signature(NamedTuple):
    machine: int
    steps: tuple[int, ...]
    forward: str
    backward: str


def even_inputs(text: str) -> list[int]:
    """The even inputs of a range such as ``"2..12"``."""
    inputs = [x for x in parse_range(text) if x % 2 == 0]
    if not inputs:
        msg = f"input range '{text}' contains no even input"
        raise InputDomainError(msg)
    return inputs


def _digest(matrices: Iterable[Bits]) -> str:
    h = hashlib.sha256()
    for cells in matrices:
        h.update(f"{cells.shape[0]}x{cells.shape[1]};".encode())
        h.update(np.ascontiguousarray(cells).tobytes())
    return h.hexdigest()


def _diagrams(machine: int, space: Space, inputs: Sequence[int], budget: int) -> list[SpaceTimeDiagram] | None:
    """Diagrams on ``inputs`` if the machine computes the tape identity on all of them.

    A halting run ends one cell left of c0, so t - 1 is always even.
    """
    table = decode(machine, space)
    for x in inputs:
        metrics = run(table, unary_input(x), budget, escape_check=True)
        if not metrics.halted or metrics.output != "1" * x:
            return None
    diagrams = []
    for x in inputs:
        diagram = render_diagram(table, unary_input(x), budget)
        if not isinstance(diagram, SpaceTimeDiagram):
            return None
        diagrams.append(diagram)
    return diagrams


def identity_signature(machine: int, space: Space, inputs: Sequence[int], budget: int) -> _Signature | None:
    """Digests of the machine's diagrams and of their time mirrors, or None if it is no identity machine."""
    diagrams = _diagrams(machine, space, inputs, budget)
    if diagrams is None:
        return None
    steps = tuple(d.metrics.t for d in diagrams)
    return _Signature(machine, steps, _digest(d.cells for d in diagrams), _digest(d.cells[::-1] for d in diagrams))


def _signature_task(args: tuple[int, Space, tuple[int, ...], int, bool]) -> _Signature | None:
    machine, space, inputs, budget, screen_twins = args
    if screen_twins and canonical_twin(machine, space) != machine:
        return None
    return identity_signature(machine, space, inputs, budget)


def _reversal_partner(machine: int, space: Space) -> int | None:
    reversed_table = reverse_table(decode(machine, space))
    return None if reversed_table is None else canonical_twin(encode(reversed_table), space)


def is_symmetric_pair(machine: int, mirror: int, space: Space, inputs: Sequence[int], budget: int) -> bool:
    """Cell-by-cell check that ``mirror`` draws the time mirror of ``machine`` on every input."""
    left = _diagrams(machine, space, inputs, budget)
    right = _diagrams(mirror, space, inputs, budget)
    if left is None or right is None:
        return False
    return all(a.is_time_mirror_of(b) for a, b in zip(left, right, strict=True))


def identity_candidates(results: Results, inputs: Sequence[int]) -> list[int]:
    """Mined machines whose recorded runs on ``inputs`` all return their input unchanged.

    Inputs outside the mined range are not screened here; the diagram
    comparison checks them anyway.
    """
    rejected: set[int] = set()
    machines: set[int] = set()
    wanted = set(inputs)
    for record in results.runs:
        machines.add(record.machine)
        if record.x in wanted and (not record.halted or record.output != "1" * record.x):
            rejected.add(record.machine)
    return sorted(machines - rejected)


def find_symmetric_performers(
    space: Space,
    inputs: Sequence[int],
    budget: int = SEARCH_BUDGET,
    workers: int = 0,
    prune: Prune = Prune.IDENTITY,
    candidates: Iterable[int] | None = None,
) -> list[SymmetricPair]:
    """All symmetric performer pairs among canonical machines of ``space``.

    Args:
        space: Machine space to search.
        inputs: Even inputs the diagrams are compared on.
        budget: Step budget per run.
        workers: Worker processes; 0 uses one per CPU, 1 runs in-process.
        prune: Candidate strategy, see :class:`Prune`.
        candidates: Machines to consider instead of the whole space.

    Returns:
        Pairs with ``machine < mirror``, sorted. An empty list is a valid result.
    """
    inputs = tuple(inputs)
    if any(x % 2 for x in inputs):
        msg = f"symmetric performers are compared on even inputs, got {list(inputs)}"
        raise InputDomainError(msg)
    screen_twins = candidates is None
    pool_ids: Iterable[int]
    count = space.size
    if candidates is not None:
        pool_ids = sorted({canonical_twin(m, space) for m in candidates})
        count = len(pool_ids)
    else:
        pool_ids = enumerate_space(space)

    partners: dict[int, int] = {}
    if prune is Prune.REVERSAL:
        for machine in pool_ids:
            if screen_twins and canonical_twin(machine, space) != machine:
                continue
            partner = _reversal_partner(machine, space)
            if partner is not None and partner != machine:
                partners[machine] = partner
        pool_ids = sorted(set(partners) | set(partners.values()))
        count, screen_twins = len(pool_ids), False

    tasks = ((m, space, inputs, budget, screen_twins) for m in pool_ids)
    logger.info("symmetric_search_started", space=str(space), inputs=list(inputs), machines=count, prune=prune.value)
    processes = workers or os.cpu_count() or 1
    if processes == 1 or count <= 1:
        signatures = [s for s in map(_signature_task, tasks) if s is not None]
    else:
        with Pool(processes) as pool:
            signatures = [s for s in pool.imap_unordered(_signature_task, tasks, chunksize=CHUNKSIZE) if s is not None]

    by_forward: dict[str, list[int]] = defaultdict(list)
    steps: dict[int, tuple[int, ...]] = {}
    for signature in signatures:
        by_forward[signature.forward].append(signature.machine)
        steps[signature.machine] = signature.steps

    found: set[tuple[int, int]] = set()
    for signature in signatures:
        machine = signature.machine
        for mirror in by_forward.get(signature.backward, ()):
            if mirror == machine:
                continue
            if prune is Prune.REVERSAL and mirror != partners.get(machine) and machine != partners.get(mirror):
                continue
            found.add((min(machine, mirror), max(machine, mirror)))

    pairs = []
    for machine, mirror in sorted(found):
        if not is_symmetric_pair(machine, mirror, space, inputs, budget):
            logger.warning("digest_collision", machine=machine, mirror=mirror)
            continue
        related = _reversal_partner(machine, space) == mirror or _reversal_partner(mirror, space) == machine
        pairs.append(SymmetricPair(machine, mirror, steps[machine], related))
    logger.info("symmetric_search_finished", identity_machines=len(signatures), pairs=len(pairs))
    return pairs
