"""Append-only JSON Lines result store.

A results directory holds one file per stage plus a manifest:

    metrics.jsonl     one RunRecord per (machine, input)
    fits.jsonl        one FitRecord per (machine, sequence)
    dimensions.jsonl  one DimensionRecord per machine, written last
    manifest.json     job parameters and their SHA-256 fingerprint

A machine is complete once its dimension record is on disk. On restart the
store truncates a partial trailing line, drops records of machines that
never reached the dimension stage and skips everything complete. Finalizing
sorts every stage file, so worker order never shows in the output bytes.
"""

import json
import logging
import os
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from tm_dimension.errors import ResultStoreError
from tm_dimension.models import DimensionRecord, FitRecord, Manifest, MiningJob, RunRecord

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.jsonl"
FITS_FILE = "fits.jsonl"
DIMENSIONS_FILE = "dimensions.jsonl"
MANIFEST_FILE = "manifest.json"
STAGE_FILES = (METRICS_FILE, FITS_FILE, DIMENSIONS_FILE)

_SEQUENCE_ORDER = {"t": 0, "s": 1, "N": 2, "N_final_row": 3}


def _sort_key(name: str, entry: dict[str, Any]) -> tuple[int, int]:
    if name == METRICS_FILE:
        return entry["machine"], entry["x"]
    if name == FITS_FILE:
        return entry["machine"], _SEQUENCE_ORDER.get(entry["sequence"], len(_SEQUENCE_ORDER))
    return entry["machine"], 0


def _truncate_partial_line(path: Path) -> None:
    """Cut a trailing line that was not terminated by a newline."""
    if not path.exists():
        return
    data = path.read_bytes()
    if not data or data.endswith(b"\n"):
        return
    keep = data.rfind(b"\n") + 1
    logger.warning("Truncating partial trailing record in %s (%d bytes).", path.name, len(data) - keep)
    with open(path, "r+b") as f:
        f.truncate(keep)


def _read_lines(path: Path) -> list[str]:
    if not path.exists():
        return []
    with open(path, encoding="utf-8") as f:
        return [line.rstrip("\n") for line in f if line.strip()]


class ResultStore:
    """Writer side of a results directory, owned by the mining parent process."""

    def __init__(
        self, root: Path, job: MiningJob, protocol_version: str = "unknown", tool_version: str = "unknown"
    ) -> None:
        self.root = root
        self.job = job
        self.fingerprint = job.fingerprint()
        try:
            self.root.mkdir(parents=True, exist_ok=True)
            marker = self.root / ".write_check"
            marker.write_text("")
            marker.unlink()
        except OSError as e:
            msg = f"Cannot write results to '{root}'."
            raise ResultStoreError(msg, str(e)) from e
        self._manifest = self._open_manifest(protocol_version, tool_version)
        self.completed = self._recover_completed()

    @property
    def manifest_path(self) -> Path:
        return self.root / MANIFEST_FILE

    def _open_manifest(self, protocol_version: str, tool_version: str) -> Manifest:
        if self.manifest_path.exists():
            try:
                existing = Manifest.model_validate_json(self.manifest_path.read_text(encoding="utf-8"))
            except (OSError, ValidationError) as e:
                msg = f"The manifest in '{self.root}' is unreadable; use a fresh directory."
                raise ResultStoreError(msg, str(e)) from e
            if existing.fingerprint != self.fingerprint:
                msg = f"'{self.root}' holds results of a different job; use a fresh directory or the same parameters."
                raise ResultStoreError(msg, f"expected {self.fingerprint}, found {existing.fingerprint}")
            return existing
        manifest = Manifest(
            job=self.job,
            fingerprint=self.fingerprint,
            protocol_version=protocol_version,
            tool_version=tool_version,
        )
        self._write_manifest(manifest)
        return manifest

    def _write_manifest(self, manifest: Manifest) -> None:
        tmp = self.manifest_path.with_suffix(".tmp")
        tmp.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
        os.replace(tmp, self.manifest_path)

    def _recover_completed(self) -> set[int]:
        """Machines with a dimension record; partial work of other machines is discarded."""
        for name in STAGE_FILES:
            _truncate_partial_line(self.root / name)

        completed: set[int] = set()
        for line in _read_lines(self.root / DIMENSIONS_FILE):
            try:
                completed.add(int(json.loads(line)["machine"]))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                logger.warning("Skipping unreadable dimension record during recovery.")

        for name in (METRICS_FILE, FITS_FILE):
            path = self.root / name
            lines = _read_lines(path)
            kept = [line for line in lines if json.loads(line).get("machine") in completed]
            if len(kept) != len(lines):
                logger.info("Discarding %d records of incomplete machines from %s.", len(lines) - len(kept), name)
                self._rewrite(path, kept)
        if completed:
            logger.info("Recovered %d completed machines from %s.", len(completed), self.root)
        return completed

    @staticmethod
    def _rewrite(path: Path, lines: Iterable[str]) -> None:
        tmp = path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as f:
            for line in lines:
                f.write(line + "\n")
        os.replace(tmp, path)

    def set_machine_count(self, machines: int) -> None:
        if self._manifest.machines != machines:
            self._manifest = self._manifest.model_copy(update={"machines": machines})
            self._write_manifest(self._manifest)

    def record(self, runs: Iterable[RunRecord], fits: Iterable[FitRecord], dimension: DimensionRecord) -> None:
        """Append every record of one machine; the dimension record goes last."""
        try:
            for name, records in ((METRICS_FILE, runs), (FITS_FILE, fits), (DIMENSIONS_FILE, (dimension,))):
                with open(self.root / name, "a", encoding="utf-8") as f:
                    for record in records:
                        f.write(record.model_dump_json() + "\n")
        except OSError as e:
            msg = f"Failed to append results for machine {dimension.machine}."
            raise ResultStoreError(msg, str(e)) from e
        self.completed.add(dimension.machine)

    def finalize(self) -> None:
        """Sort every stage file by machine, then input or sequence."""
        for name in STAGE_FILES:
            path = self.root / name
            lines = _read_lines(path)
            lines.sort(key=lambda line, n=name: _sort_key(n, json.loads(line)))
            self._rewrite(path, lines)
        self._manifest = self._manifest.model_copy(update={"finalized": True})
        self._write_manifest(self._manifest)
        logger.info("Finalized %d machines in %s.", len(self.completed), self.root)


@dataclass(frozen=True, slots=True)
class Results:
    """Reader side: every record of a results directory."""

    manifest: Manifest
    runs: list[RunRecord]
    fits: list[FitRecord]
    dimensions: list[DimensionRecord]

    @property
    def coverage(self) -> float:
        if not self.manifest.machines:
            return 1.0
        return min(1.0, len(self.dimensions) / self.manifest.machines)

    @property
    def partial(self) -> bool:
        return not self.manifest.finalized or self.coverage < 1.0


def load_results(root: Path) -> Results:
    """Read and validate a results directory.

    Raises:
        ResultStoreError: the directory has no readable manifest or a record is malformed.
    """
    path = root / MANIFEST_FILE
    try:
        manifest = Manifest.model_validate_json(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        msg = f"'{root}' is not a results directory (no {MANIFEST_FILE})."
        raise ResultStoreError(msg, str(e)) from e
    except (OSError, ValidationError) as e:
        msg = f"The manifest in '{root}' is unreadable."
        raise ResultStoreError(msg, str(e)) from e
    try:
        runs = [RunRecord.model_validate_json(line) for line in _read_lines(root / METRICS_FILE)]
        fits = [FitRecord.model_validate_json(line) for line in _read_lines(root / FITS_FILE)]
        dimensions = [DimensionRecord.model_validate_json(line) for line in _read_lines(root / DIMENSIONS_FILE)]
    except ValidationError as e:
        msg = f"'{root}' contains a malformed record."
        raise ResultStoreError(msg, str(e)) from e
    return Results(manifest, runs, fits, dimensions)
