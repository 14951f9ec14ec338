"""Long-running checks against published machines and the (2,2) census.

Covers: the Busy Beaver space sequence and its bounded-correction
recurrence, twin metrics, the alternating runtimes of TM 1728529, the space
formula of TM 683863, the full (2,2) mining run, verification of a seeded
(3,2) sample and the (3,2) symmetric performers.

Run with ``pytest -m slow``.
"""

from fractions import Fraction

import pytest

from tm_dimension.analysis.guess import QuasiTemplate, check_quasi_recurrence, fit_sequence
from tm_dimension.analysis.sequence_models import PeriodicSplit
from tm_dimension.dimension.report import Bucket
from tm_dimension.machines.numbering import decode
from tm_dimension.machines.tapes import unary_input
from tm_dimension.models import MiningJob
from tm_dimension.pipeline.census import run_census
from tm_dimension.pipeline.mining import mine
from tm_dimension.pipeline.symmetric import even_inputs, find_symmetric_performers
from tm_dimension.pipeline.verify import run_verify
from tm_dimension.simulation.simulator import run
from tm_dimension.store.results import load_results

pytestmark = pytest.mark.slow

BB_SPACE = [3, 7, 13, 22, 36, 57, 88, 135, 205, 310]


def alternator_runtime(x):
    if x % 2 == 0:
        return 2 * (x - 2) + 9
    return 2 * (x - 1) + 3 * 2 ** ((x - 1) // 2 + 1) + 5


class TestBusyBeaver:
    def test_space_sequence(self, busy_beaver):
        runs = [run(busy_beaver, unary_input(x)) for x in range(1, 11)]
        assert [m.s for m in runs] == BB_SPACE
        assert (runs[0].t, runs[0].N) == (7, 13)

    def test_quasi_recurrence_on_measured_space(self, busy_beaver):
        space = [run(busy_beaver, unary_input(x)).s for x in range(1, 11)]
        template = QuasiTemplate((Fraction(5, 2), Fraction(-3, 2)), 2, frozenset({-1, 0, 1}))
        assert check_quasi_recurrence(space, template).holds

    def test_twins_have_identical_metrics(self, busy_beaver, space32):
        twin = decode(599063, space32)
        for x in range(1, 11):
            assert run(twin, unary_input(x)) == run(busy_beaver, unary_input(x))


class TestAlternator:
    @pytest.fixture
    def alternator(self, space32):
        return decode(1728529, space32)

    def test_runtimes_follow_the_piecewise_formula(self, alternator):
        for x in range(3, 13):
            assert run(alternator, unary_input(x)).t == alternator_runtime(x)

    def test_fit_is_a_parity_split(self, alternator):
        runtimes = [run(alternator, unary_input(x)).t for x in range(1, 22)]
        report = fit_sequence(runtimes)
        assert isinstance(report.model, PeriodicSplit)
        assert report.model.period == 2
        for x in range(22, 31):
            assert report.predict(x) == alternator_runtime(x)


class TestExponentialSpace:
    def test_space_formula_on_odd_inputs(self, space32):
        table = decode(683863, space32)
        for x in range(1, 16, 2):
            metrics = run(table, unary_input(x))
            assert metrics.halted
            assert metrics.s == 2 * ((x + 1) // 2 + 2 ** ((x + 1) // 2) - 1)


class TestTwoStateCensus:
    @pytest.fixture(scope="class")
    def results_dir(self, tmp_path_factory):
        out = tmp_path_factory.mktemp("census22")
        mine(MiningJob(space="2,2", inputs="1..21", budget=10_000_000), out)
        return out

    def test_buckets(self, results_dir):
        table = run_census(results_dir)
        assert table.buckets[Bucket.QUADRATIC.value] == 4
        assert table.super_polynomial == 7
        assert abs(table.functions - 74) <= table.functions_with_divergence

    def test_quadratic_machines_have_dimension_three_halves(self, results_dir):
        quadratic = [d for d in load_results(results_dir).dimensions if d.bucket == Bucket.QUADRATIC.value]
        assert {d.d for d in quadratic} == {"3/2"}

    def test_exponential_identity_machines(self, results_dir):
        results = load_results(results_dir)
        outputs = {(r.machine, r.x): r.output for r in results.runs if r.halted}
        exponential = [d for d in results.dimensions if d.bucket == Bucket.EXP_LINEAR.value and d.d == "1"]
        identity = [
            d.machine for d in exponential if all(outputs.get((d.machine, x)) == "1" * x for x in range(1, 22))
        ]
        assert len(identity) == 3

    def test_no_violations(self, results_dir):
        assert run_verify(results_dir).ok

    def test_linear_time_iff_dimension_two(self, results_dir):
        for record in load_results(results_dir).dimensions:
            if not record.undefined and record.findings:
                assert record.findings["f5_dimension_two_iff_linear_time"] != "fails"


class TestThreeStateSample:
    def test_sampled_machines_verify(self, tmp_path):
        job = MiningJob(space="3,2", inputs="1..21", budget=100_000, sample=10_000, seed=2013)
        summary = mine(job, tmp_path)
        assert summary.scheduled == 10_000
        report = run_verify(tmp_path)
        assert report.violations == []
        assert report.rho is not None and report.rho.ok


class TestSymmetricPerformers:
    def test_three_state_pairs_on_even_inputs(self, space32):
        inputs = even_inputs("2..12")
        pairs = find_symmetric_performers(space32, inputs)
        assert pairs
        for pair in pairs:
            assert len(pair.steps) == len(inputs)
            assert all((t - 1) % 2 == 0 for t in pair.steps)
            for machine in (pair.machine, pair.mirror):
                table = decode(machine, space32)
                for x in inputs:
                    metrics = run(table, unary_input(x))
                    assert metrics.halted
                    assert metrics.output == "1" * x
