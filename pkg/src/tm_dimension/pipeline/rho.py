"""Runs under the alternative input coding.

Mining feeds unary inputs only. Here one machine is run on the binary-coded
inputs rho(a): the coding must be injective over the range, and when the
machine computes the tape identity its output, read as a binary numeral,
grows like a**2. The constant c of ``value <= c * a**2`` is fitted on the
lower half of the range and checked on the upper half.
"""

from dataclasses import dataclass
from fractions import Fraction

import structlog

from tm_dimension.errors import InputDomainError
from tm_dimension.machines.numbering import Space, decode
from tm_dimension.machines.tapes import rho_input, tape_value
from tm_dimension.simulation.simulator import run

logger = structlog.get_logger(__name__)

IDENTITY_SPACE = Space(2)
# Writes back the color it reads and steps off the edge at once.
IDENTITY_MACHINE = 1600
RHO_INPUTS = range(1, 257)
RHO_BUDGET = 100_000


@dataclass(frozen=True, slots=True)
class RhoReport:
    machine: int
    space: str
    inputs: range
    injective: bool
    identity: bool
    values: tuple[int, ...]
    constant: Fraction | None
    exceeding: tuple[int, ...]

    @property
    def holdout(self) -> range:
        return self.inputs[len(self.inputs) // 2 :]

    @property
    def ok(self) -> bool:
        return self.injective and self.identity and self.constant is not None and not self.exceeding


def fit_square_constant(inputs: range, values: tuple[int, ...]) -> Fraction:
    """Least c with value <= c * a**2 over ``inputs``."""
    return max(Fraction(v, a * a) for a, v in zip(inputs, values, strict=True))


def rho_experiment(
    space: Space = IDENTITY_SPACE,
    machine: int = IDENTITY_MACHINE,
    inputs: range = RHO_INPUTS,
    budget: int = RHO_BUDGET,
) -> RhoReport:
    """Run ``machine`` on rho(a) for every a in ``inputs`` and bound its output by c * a**2.

    Raises:
        InputDomainError: If the range is too short to split into a fit half
            and a held-out half, or starts at 0.
    """
    if len(inputs) < 2 or inputs.start < 1:
        msg = f"rho runs need at least two positive inputs, got {inputs.start}..{inputs.stop - 1}"
        raise InputDomainError(msg)
    table = decode(machine, space)
    tapes = [rho_input(a) for a in inputs]
    injective = len({tape.cells for tape in tapes}) == len(tapes)

    identity = True
    values = []
    for a, tape in zip(inputs, tapes, strict=True):
        metrics = run(table, tape, budget)
        if not metrics.halted:
            logger.warning("rho_run_diverged", machine=machine, a=a, status=metrics.status.value)
            identity = False
            values.append(0)
            continue
        output = tuple(int(ch) for ch in metrics.output)
        if output != tape.cells:
            identity = False
        values.append(tape_value(output))

    half = len(inputs) // 2
    constant: Fraction | None = None
    exceeding: tuple[int, ...] = ()
    if identity:
        constant = fit_square_constant(inputs[:half], tuple(values[:half]))
        exceeding = tuple(a for a, v in zip(inputs[half:], values[half:], strict=True) if v > constant * a * a)
    report = RhoReport(machine, str(space), inputs, injective, identity, tuple(values), constant, exceeding)
    logger.info(
        "rho_experiment_finished",
        machine=machine,
        space=str(space),
        injective=injective,
        identity=identity,
        constant=str(constant),
        exceeding=len(exceeding),
    )
    return report
