"""Centralized run configuration.

All operational knobs are loaded from ``TMDIM_``-prefixed environment
variables and validated at startup. Invalid values stop the CLI before any
machine is simulated.
"""

from functools import lru_cache
from pathlib import Path

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from tm_dimension.errors import InputDomainError
from tm_dimension.machines.tapes import parse_range
from tm_dimension.simulation.simulator import DEFAULT_BUDGET


class Settings(BaseSettings):
    """Settings loaded from environment variables.

    Optional variables (all have defaults):
        TMDIM_BUDGET: Step budget per input.
        TMDIM_INPUTS: Input range, ``a..b``.
        TMDIM_WORKERS: Worker processes for mining (0 = one per CPU).
        TMDIM_LOG_LEVEL: Logging verbosity (DEBUG, INFO, WARNING, ERROR, CRITICAL).
        TMDIM_LOG_FORMAT: ``json`` or ``console``.
        TMDIM_PROTOCOL_PATH: Path to the fit protocol YAML file.
        TMDIM_ESCAPE_CHECK: Detect runs that drift over fresh white cells forever.
        TMDIM_EXTENDED_INPUTS: Last input of the extended pass for periodic machines (0 = off).
    """

    model_config = SettingsConfigDict(env_prefix="TMDIM_", case_sensitive=False)

    budget: int = Field(
        default=DEFAULT_BUDGET,
        description="Maximum number of steps simulated per input.",
        ge=1,
    )
    inputs: str = Field(
        default="1..21",
        description="Inclusive input range, written a..b.",
    )
    workers: int = Field(
        default=0,
        description="Worker processes; 0 uses one per CPU.",
        ge=0,
    )
    log_level: str = Field(
        default="INFO",
        description="Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL).",
    )
    log_format: str = Field(
        default="json",
        description="Log renderer: json or console.",
        pattern=r"^(json|console)$",
    )
    protocol_path: Path = Field(
        default=Path("protocols/fit_protocol.yaml"),
        description="Path to the YAML fit protocol.",
    )
    escape_check: bool = Field(
        default=True,
        description="Report runs drifting over fresh white cells as divergent instead of burning the budget.",
    )
    extended_inputs: int = Field(
        default=60,
        description="Inputs up to this bound are simulated for periodic machines starved of terms. 0 disables.",
        ge=0,
    )

    @field_validator("inputs")
    @classmethod
    def validate_inputs(cls, v: str) -> str:
        try:
            parse_range(v)
        except InputDomainError as e:
            raise ValueError(str(e)) from e
        return v.strip()

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        valid = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}
        upper = v.upper()
        if upper not in valid:
            msg = f"TMDIM_LOG_LEVEL must be one of {sorted(valid)}, got '{v}'"
            raise ValueError(msg)
        return upper

    @property
    def input_range(self) -> range:
        return parse_range(self.inputs)


@lru_cache
def get_settings() -> Settings:
    """Return cached settings (singleton).

    Call this instead of constructing Settings() directly so the
    environment is read and validated exactly once.
    """
    return Settings()
