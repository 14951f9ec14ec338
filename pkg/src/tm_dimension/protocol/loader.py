"""YAML fit-protocol loader.

Loads and validates the fitting protocol. Used by the sequence fitters,
the dimension checks and the mining pipeline so the loading logic exists
in exactly one place.
"""

import copy
import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, NamedTuple

import yaml

logger = logging.getLogger(__name__)

# Used when the YAML file is missing or unreadable, so mining always runs
# with the published protocol.
DEFAULT_PROTOCOL: dict[str, Any] = {
    "protocol_version": "default",
    "fitting": {
        "prefix_length": 15,
        "refit_length": 18,
        "holdout_end": 21,
        "max_dropped_prefix": 3,
        "min_branch_terms": 4,
        "period_candidates": [1, 2, 3, 6],
        "max_cfinite_order": None,
    },
    "quasi_recurrence": {
        "max_order": 3,
        "max_denominator": 8,
        "corrections": [-1, 0, 1],
    },
    "ratio_fallback": {
        "window": 5,
        "tolerance": 0.05,
        "min_points": 10,
        "monomials": [[1, 1], [2, 0], [1, 0], [3, 0]],
    },
    "dimension": {"enclosure_width": 1.0e-6},
    "findings": {
        "c_tau_values": [
            "1/9", "1/6", "7/30", "1/4", "5/18", "5/16", "1/3", "3/8", "8/21", "7/18", "5/12",
            "3/7", "4/9", "7/15", "1/2", "5/9", "9/16", "2/3", "3/4", "7/9", "1",
        ],
    },
}  # fmt: skip

POSITIVE_INT_KEYS = {
    "fitting": ("prefix_length", "refit_length", "holdout_end", "min_branch_terms"),
    "quasi_recurrence": ("max_order", "max_denominator"),
    "ratio_fallback": ("window", "min_points"),
}


class FittingRules(NamedTuple):
    prefix_length: int = 15
    refit_length: int = 18
    holdout_end: int = 21
    max_dropped_prefix: int = 3
    min_branch_terms: int = 4
    period_candidates: tuple[int, ...] = (1, 2, 3, 6)
    max_cfinite_order: int | None = None


class QuasiRules(NamedTuple):
    max_order: int = 3
    max_denominator: int = 8
    corrections: tuple[int, ...] = (-1, 0, 1)


class RatioRules(NamedTuple):
    window: int = 5
    tolerance: float = 0.05
    min_points: int = 10
    monomials: tuple[tuple[int, int], ...] = ((1, 1), (2, 0), (1, 0), (3, 0))


def load_protocol(protocol_path: Path) -> dict[str, Any]:
    """Load and validate the YAML fit protocol.

    Args:
        protocol_path: Path to the YAML protocol file.

    Returns:
        Parsed protocol dictionary. Falls back to DEFAULT_PROTOCOL
        if the file is missing or invalid, logging a warning.
    """
    if not protocol_path.exists():
        logger.warning("Protocol file not found at '%s'. Using the default protocol.", protocol_path)
        return copy.deepcopy(DEFAULT_PROTOCOL)

    try:
        with open(protocol_path) as f:
            protocol = yaml.safe_load(f)
    except yaml.YAMLError as e:
        logger.error("Failed to parse protocol file '%s': %s. Using the default protocol.", protocol_path, e)
        return copy.deepcopy(DEFAULT_PROTOCOL)

    if not isinstance(protocol, dict):
        logger.error("Protocol file '%s' did not parse to a dict. Using the default protocol.", protocol_path)
        return copy.deepcopy(DEFAULT_PROTOCOL)

    _validate_protocol(protocol, protocol_path)
    return protocol


def _validate_protocol(protocol: dict[str, Any], protocol_path: Path) -> None:
    """Log warnings for invalid values; the getters fall back per key.

    Does not raise: a partially valid protocol still runs with the
    defaults substituted for the broken keys.
    """
    for section, keys in POSITIVE_INT_KEYS.items():
        block = protocol.get(section, {})
        if not isinstance(block, dict):
            logger.warning("Protocol '%s': section '%s' is not a mapping, using defaults.", protocol_path, section)
            continue
        for key in keys:
            if key in block and not _is_positive_int(block[key]):
                logger.warning(
                    "Protocol '%s': %s.%s must be a positive integer, got '%s'.",
                    protocol_path,
                    section,
                    key,
                    block[key],
                )

    fitting = protocol.get("fitting", {})
    if isinstance(fitting, dict):
        periods = fitting.get("period_candidates", [])
        if not isinstance(periods, list) or not all(_is_positive_int(p) for p in periods):
            logger.warning("Protocol '%s': period_candidates must be positive integers.", protocol_path)
        prefix, refit, end = (fitting.get(k) for k in ("prefix_length", "refit_length", "holdout_end"))
        if all(_is_positive_int(v) for v in (prefix, refit, end)) and not prefix < refit < end:
            logger.warning(
                "Protocol '%s': expected prefix_length < refit_length < holdout_end, got %s, %s, %s.",
                protocol_path,
                prefix,
                refit,
                end,
            )

    for value in protocol.get("findings", {}).get("c_tau_values", []):
        try:
            Fraction(str(value))
        except (ValueError, ZeroDivisionError):
            logger.warning("Protocol '%s': c_tau value '%s' is not a rational.", protocol_path, value)


def _is_positive_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value > 0


def _section(protocol: dict[str, Any], name: str) -> dict[str, Any]:
    block = protocol.get(name, {})
    return block if isinstance(block, dict) else {}


def _positive(block: dict[str, Any], key: str, default: int) -> int:
    value = block.get(key, default)
    return value if _is_positive_int(value) else default


def get_fitting_rules(protocol: dict[str, Any]) -> FittingRules:
    """Fitting window, prefix drop and period settings.

    Args:
        protocol: Loaded protocol dictionary.

    Returns:
        FittingRules with invalid entries replaced by their defaults.
    """
    block = _section(protocol, "fitting")
    defaults = FittingRules()
    periods = block.get("period_candidates", list(defaults.period_candidates))
    if not isinstance(periods, list) or not periods or not all(_is_positive_int(p) for p in periods):
        periods = list(defaults.period_candidates)
    max_order = block.get("max_cfinite_order")
    dropped = block.get("max_dropped_prefix", defaults.max_dropped_prefix)
    prefix = _positive(block, "prefix_length", defaults.prefix_length)
    refit = _positive(block, "refit_length", defaults.refit_length)
    end = _positive(block, "holdout_end", defaults.holdout_end)
    if not prefix < refit < end:
        prefix, refit, end = defaults.prefix_length, defaults.refit_length, defaults.holdout_end
    return FittingRules(
        prefix_length=prefix,
        refit_length=refit,
        holdout_end=end,
        max_dropped_prefix=dropped if isinstance(dropped, int) and dropped >= 0 else defaults.max_dropped_prefix,
        min_branch_terms=_positive(block, "min_branch_terms", defaults.min_branch_terms),
        period_candidates=tuple(sorted(set(periods))),
        max_cfinite_order=max_order if _is_positive_int(max_order) else None,
    )


def get_quasi_rules(protocol: dict[str, Any]) -> QuasiRules:
    """Order, denominator and correction bounds of the quasi-recurrence search."""
    block = _section(protocol, "quasi_recurrence")
    defaults = QuasiRules()
    corrections = block.get("corrections", list(defaults.corrections))
    if not isinstance(corrections, list) or not all(isinstance(c, int) for c in corrections):
        corrections = list(defaults.corrections)
    return QuasiRules(
        max_order=_positive(block, "max_order", defaults.max_order),
        max_denominator=_positive(block, "max_denominator", defaults.max_denominator),
        corrections=tuple(sorted(set(corrections))),
    )


def get_ratio_rules(protocol: dict[str, Any]) -> RatioRules:
    """Window, tolerance and reference monomials of the ratio fallback."""
    block = _section(protocol, "ratio_fallback")
    defaults = RatioRules()
    tolerance = block.get("tolerance", defaults.tolerance)
    if not isinstance(tolerance, int | float) or not 0 < tolerance < 1:
        tolerance = defaults.tolerance
    monomials = block.get("monomials", defaults.monomials)
    try:
        pairs = tuple((int(a), int(b)) for a, b in monomials)
    except (TypeError, ValueError):
        logger.warning("Protocol ratio_fallback.monomials is malformed, using defaults.")
        pairs = defaults.monomials
    return RatioRules(
        window=_positive(block, "window", defaults.window),
        tolerance=float(tolerance),
        min_points=_positive(block, "min_points", defaults.min_points),
        monomials=pairs or defaults.monomials,
    )


def get_enclosure_width(protocol: dict[str, Any]) -> Fraction:
    width = _section(protocol, "dimension").get("enclosure_width", 1.0e-6)
    if not isinstance(width, int | float) or width <= 0:
        width = 1.0e-6
    return Fraction(str(width))


def get_known_c_tau_values(protocol: dict[str, Any]) -> frozenset[Fraction]:
    """The published limit values of N / (s * t); malformed entries are skipped."""
    values = set()
    for value in _section(protocol, "findings").get("c_tau_values", DEFAULT_PROTOCOL["findings"]["c_tau_values"]):
        try:
            values.add(Fraction(str(value)))
        except (ValueError, ZeroDivisionError):
            continue
    return frozenset(values)


def protocol_version(protocol: dict[str, Any]) -> str:
    return str(protocol.get("protocol_version", "unknown"))
