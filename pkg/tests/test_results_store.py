"""Tests for the JSON Lines result store.

Covers: manifest creation, job mismatch refusal, crash recovery with
partial lines and incomplete machines, deterministic finalization and the
reader side.
"""

import json

import pytest

from tm_dimension.errors import ResultStoreError
from tm_dimension.models import DimensionRecord, FitRecord, RunRecord
from tm_dimension.store.results import (
    DIMENSIONS_FILE,
    FITS_FILE,
    MANIFEST_FILE,
    METRICS_FILE,
    ResultStore,
    load_results,
)


def _records(machine):
    runs = [RunRecord(machine=machine, x=x, status="halted", t=str(x + 4), s="1", N="3") for x in (2, 1)]
    fits = [
        FitRecord(machine=machine, sequence=name, model="(none)", verdict="failed", fitted_length=0)
        for name in ("N", "t")
    ]
    return runs, fits, DimensionRecord(machine=machine, halted_inputs=2)


class TestResultStore:
    def test_creates_manifest(self, tmp_path, small_job):
        ResultStore(tmp_path / "out", small_job, "1.0", "1.0.0")
        manifest = json.loads((tmp_path / "out" / MANIFEST_FILE).read_text())
        assert manifest["fingerprint"] == small_job.fingerprint()
        assert manifest["protocol_version"] == "1.0"
        assert not manifest["finalized"]

    def test_record_appends_every_stage(self, tmp_path, small_job):
        store = ResultStore(tmp_path, small_job)
        store.record(*_records(7))
        assert len((tmp_path / METRICS_FILE).read_text().splitlines()) == 2
        assert len((tmp_path / FITS_FILE).read_text().splitlines()) == 2
        assert json.loads((tmp_path / DIMENSIONS_FILE).read_text())["machine"] == 7
        assert store.completed == {7}

    def test_refuses_a_different_job(self, tmp_path, small_job):
        ResultStore(tmp_path, small_job)
        other = small_job.model_copy(update={"budget": 99})
        with pytest.raises(ResultStoreError, match="different job"):
            ResultStore(tmp_path, other)

    def test_unreadable_manifest(self, tmp_path, small_job):
        (tmp_path / MANIFEST_FILE).write_text("{not json")
        with pytest.raises(ResultStoreError, match="unreadable"):
            ResultStore(tmp_path, small_job)

    def test_unwritable_root(self, tmp_path, small_job):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(ResultStoreError, match="Cannot write"):
            ResultStore(blocker / "out", small_job)


class TestRecovery:
    def test_resumes_completed_machines(self, tmp_path, small_job):
        ResultStore(tmp_path, small_job).record(*_records(3))
        assert ResultStore(tmp_path, small_job).completed == {3}

    def test_truncates_partial_trailing_line(self, tmp_path, small_job):
        ResultStore(tmp_path, small_job).record(*_records(3))
        with open(tmp_path / METRICS_FILE, "a") as f:
            f.write('{"machine": 4, "x"')
        ResultStore(tmp_path, small_job)
        lines = (tmp_path / METRICS_FILE).read_text().splitlines()
        assert len(lines) == 2
        assert all(json.loads(line)["machine"] == 3 for line in lines)

    def test_discards_incomplete_machines(self, tmp_path, small_job):
        store = ResultStore(tmp_path, small_job)
        store.record(*_records(3))
        runs, fits, _ = _records(5)
        with open(tmp_path / METRICS_FILE, "a") as f:
            f.writelines(r.model_dump_json() + "\n" for r in runs)
        recovered = ResultStore(tmp_path, small_job)
        assert recovered.completed == {3}
        machines = {json.loads(line)["machine"] for line in (tmp_path / METRICS_FILE).read_text().splitlines()}
        assert machines == {3}


class TestFinalize:
    def test_sorts_stage_files(self, tmp_path, small_job):
        store = ResultStore(tmp_path, small_job)
        store.record(*_records(9))
        store.record(*_records(2))
        store.finalize()
        metrics = [json.loads(line) for line in (tmp_path / METRICS_FILE).read_text().splitlines()]
        assert [(m["machine"], m["x"]) for m in metrics] == [(2, 1), (2, 2), (9, 1), (9, 2)]
        fits = [json.loads(line) for line in (tmp_path / FITS_FILE).read_text().splitlines()]
        assert [f["sequence"] for f in fits[:2]] == ["t", "N"]

    def test_output_is_independent_of_record_order(self, tmp_path, small_job):
        first, second = tmp_path / "a", tmp_path / "b"
        for root, order in ((first, (1, 2)), (second, (2, 1))):
            store = ResultStore(root, small_job)
            for machine in order:
                store.record(*_records(machine))
            store.finalize()
        for name in (METRICS_FILE, FITS_FILE, DIMENSIONS_FILE):
            assert (first / name).read_bytes() == (second / name).read_bytes()


class TestLoadResults:
    def test_reads_every_record(self, tmp_path, small_job):
        store = ResultStore(tmp_path, small_job)
        store.set_machine_count(2)
        store.record(*_records(1))
        store.record(*_records(2))
        store.finalize()
        results = load_results(tmp_path)
        assert len(results.runs) == 4
        assert [d.machine for d in results.dimensions] == [1, 2]
        assert not results.partial
        assert results.coverage == 1.0

    def test_unfinished_run_is_partial(self, tmp_path, small_job):
        store = ResultStore(tmp_path, small_job)
        store.set_machine_count(4)
        store.record(*_records(1))
        results = load_results(tmp_path)
        assert results.partial
        assert results.coverage == 0.25

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(ResultStoreError, match="not a results directory"):
            load_results(tmp_path)

    def test_malformed_record(self, tmp_path, small_job):
        ResultStore(tmp_path, small_job)
        (tmp_path / DIMENSIONS_FILE).write_text('{"machine": -1}\n')
        with pytest.raises(ResultStoreError, match="malformed"):
            load_results(tmp_path)
