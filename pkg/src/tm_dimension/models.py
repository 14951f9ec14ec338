"""Pydantic models for every persisted record.

Each JSON Lines file holds one record type. Large integers travel as
decimal strings, rationals as ``p/q``, enclosures as ``[lo,hi]`` and
infinity as ``inf``.
"""

import hashlib
import json
from typing import Any

from pydantic import BaseModel, Field, field_validator, model_validator

from tm_dimension.dimension.limits import parse_limit
from tm_dimension.machines.numbering import Space
from tm_dimension.machines.tapes import parse_range
from tm_dimension.simulation.simulator import RunMetrics

DECIMAL = r"^\d+$"
LIMIT_FIELDS = ("d", "upper_bound", "d_final_row")


class RunRecord(BaseModel):
    """Metrics of one machine on one input (``metrics.jsonl``)."""

    machine: int = Field(..., ge=0)
    x: int = Field(..., ge=1)
    status: str = Field(
        ...,
        pattern=r"^(halted|divergent_by_cycle|divergent_by_escape|budget_exceeded)$",
    )
    t: str = Field(..., pattern=DECIMAL, description="Steps executed.")
    s: str = Field(..., pattern=DECIMAL, description="Furthest cell index visited.")
    N: str = Field(..., pattern=DECIMAL, description="Black cells over rows 0..t-1.")
    final_row_black: str = Field(default="0", pattern=DECIMAL)
    output: str = Field(default="", pattern=r"^[01]*$", description="Output tape, c0 first, trailing white trimmed.")

    @classmethod
    def from_metrics(cls, machine: int, x: int, metrics: RunMetrics) -> "RunRecord":
        return cls(
            machine=machine,
            x=x,
            status=metrics.status.value,
            t=str(metrics.t),
            s=str(metrics.s),
            N=str(metrics.N),
            final_row_black=str(metrics.final_row_black),
            output=metrics.output,
        )

    @property
    def halted(self) -> bool:
        return self.status == "halted"


class FitRecord(BaseModel):
    """Outcome of fitting one sequence of one machine (``fits.jsonl``)."""

    machine: int = Field(..., ge=0)
    sequence: str = Field(..., pattern=r"^(t|s|N|N_final_row)$")
    model: str = Field(..., description="Prefix notation of the model, '(none)' when fitting failed.")
    verdict: str = Field(..., pattern=r"^(exact|band|failed)$")
    fitted_length: int = Field(..., ge=0)
    dropped: list[str] = Field(default_factory=list, description="Discarded leading terms.")
    holdout: list[int] = Field(default_factory=list, description="Inputs the model was validated on.")
    chain: list[str] = Field(default_factory=list, description="Fitters tried, in order.")
    refit: bool = False
    extended: bool = Field(default=False, description="Refitted on the extended input range.")
    closed_form: str | None = None


class DimensionRecord(BaseModel):
    """Dimension report of one canonical machine (``dimensions.jsonl``)."""

    machine: int = Field(..., ge=0)
    class_size: int = Field(default=1, ge=1, description="Machines in the twin class this one stands for.")
    undefined: bool = False
    halted_inputs: int = Field(default=0, ge=0)
    dropped: dict[str, int] = Field(default_factory=dict, description="Non-halted inputs per run status.")
    classes: dict[str, str] = Field(default_factory=dict)
    d: str = "unknown"
    upper_bound: str = "unknown"
    d_final_row: str = "unknown"
    c_tau: str = "insufficient"
    c_tau_exact: bool = False
    bucket: str = "unclassified"
    constant_time: bool = False
    log_ratios: list[float] = Field(default_factory=list)
    findings: dict[str, str] = Field(default_factory=dict)

    @field_validator(*LIMIT_FIELDS)
    @classmethod
    def must_be_limit(cls, v: str) -> str:
        try:
            parse_limit(v)
        except (ValueError, ZeroDivisionError) as e:
            msg = f"limits are written p/q, [lo,hi], inf or unknown, got '{v}'"
            raise ValueError(msg) from e
        return v


class MiningJob(BaseModel):
    """Parameters of one mining run; everything here takes part in the job fingerprint."""

    space: str = Field(..., pattern=r"^\s*\d+\s*,\s*\d+\s*$")
    inputs: str = "1..21"
    budget: int = Field(default=10_000_000, ge=1)
    twin_reduction: bool = True
    escape_check: bool = True
    extended_inputs: int = Field(default=60, ge=0)
    ids: list[int] | None = None
    sample: int | None = Field(default=None, ge=1, description="Seeded sample of this many machines.")
    seed: int = Field(default=0, ge=0)
    protocol: dict[str, Any] = Field(default_factory=dict)

    @field_validator("inputs")
    @classmethod
    def must_be_range(cls, v: str) -> str:
        parse_range(v)
        return v.strip()

    @field_validator("space")
    @classmethod
    def must_be_space(cls, v: str) -> str:
        space = Space.parse(v)
        return f"{space.states},{space.colors}"

    @model_validator(mode="after")
    def ids_or_sample(self) -> "MiningJob":
        if self.ids is not None and self.sample is not None:
            msg = "a job takes explicit ids or a sample size, not both"
            raise ValueError(msg)
        return self

    @property
    def machine_space(self) -> Space:
        return Space.parse(self.space)

    @property
    def input_range(self) -> range:
        return parse_range(self.inputs)

    def fingerprint(self) -> str:
        """SHA-256 of the canonical job JSON."""
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class Manifest(BaseModel):
    """Contents of ``manifest.json``."""

    job: MiningJob
    fingerprint: str = Field(..., pattern=r"^[0-9a-f]{64}$")
    protocol_version: str = "unknown"
    tool_version: str = "unknown"
    machines: int = Field(default=0, ge=0, description="Machines scheduled after twin reduction.")
    finalized: bool = False


class CensusTable(BaseModel):
    """Aggregate counts over a results directory."""

    space: str
    analyzed: int = Field(default=0, ge=0, description="Machines halting on at least one input, twins included.")
    undefined: int = Field(default=0, ge=0, description="Machines halting on no input, twins included.")
    buckets: dict[str, int] = Field(default_factory=dict)
    super_polynomial: int = Field(default=0, ge=0, description="Machines in any super-polynomial bucket.")
    dimensions: dict[str, int] = Field(default_factory=dict)
    functions: int = Field(default=0, ge=0, description="Distinct output fingerprints.")
    functions_with_divergence: int = Field(default=0, ge=0)
    partial: bool = False
    coverage: float = Field(default=1.0, ge=0.0, le=1.0)
    footnotes: list[str] = Field(default_factory=list)
