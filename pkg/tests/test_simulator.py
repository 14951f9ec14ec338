"""Tests for the budgeted simulator.

Covers: t, s, N and the halting row on the anchor machines, cycle and
escape detection, budget exhaustion, replay of cycle witnesses, identical
runs of twins on seeded random machines and halted-series building.
"""

import random

import pytest

from tm_dimension.errors import InputDomainError
from tm_dimension.machines.numbering import decode, twin_class
from tm_dimension.machines.tapes import unary_input
from tm_dimension.simulation.simulator import (
    HALT,
    Configuration,
    RunStatus,
    escaping_states,
    metrics_series,
    replay,
    run,
    run_inputs,
    run_traced,
    series_from_runs,
)


class TestHaltingRuns:
    def test_machine_346_on_one(self, machine_346):
        metrics = run(machine_346, unary_input(1))
        assert metrics.status is RunStatus.HALTED
        assert (metrics.t, metrics.s, metrics.N) == (5, 1, 3)
        assert metrics.final_row_black == 1
        assert metrics.output == "1"
        assert metrics.cells == 2

    def test_machine_346_on_two(self, machine_346):
        metrics = run(machine_346, unary_input(2))
        assert (metrics.t, metrics.s, metrics.N) == (7, 2, 6)
        assert metrics.output == "01"

    def test_machine_346_leaves_alternating_cells(self, machine_346):
        metrics = run(machine_346, unary_input(3))
        assert metrics.output == "101"
        assert metrics.t == 11

    def test_busy_beaver_on_one(self, busy_beaver):
        metrics = run(busy_beaver, unary_input(1))
        assert (metrics.t, metrics.s, metrics.N) == (7, 3, 13)

    def test_busy_beaver_space(self, busy_beaver):
        spaces = [run(busy_beaver, unary_input(x)).s for x in (1, 2, 3)]
        assert spaces == [3, 7, 13]

    def test_busy_beaver_second_input(self, busy_beaver):
        metrics = run(busy_beaver, unary_input(2))
        assert (metrics.t, metrics.N) == (49, 167)

    def test_space_time_invariants(self, machine_346):
        for x in range(1, 15):
            metrics = run(machine_346, unary_input(x))
            assert metrics.halted
            assert metrics.t >= 2 * metrics.s + 1
            assert metrics.N <= metrics.cells * metrics.t

    def test_escape_check_does_not_change_halting_runs(self, busy_beaver):
        for x in (1, 2, 3):
            assert run(busy_beaver, unary_input(x), escape_check=True) == run(busy_beaver, unary_input(x))

    def test_halting_runs_take_an_odd_number_of_steps(self, space32):
        rng = random.Random(8)
        for machine in (rng.randrange(space32.size) for _ in range(300)):
            metrics = run(decode(machine, space32), unary_input(rng.randint(1, 6)), budget=2000)
            if metrics.halted:
                assert metrics.t % 2 == 1


class TestDivergence:
    def test_detects_cycle(self, looping_table):
        metrics = run(looping_table, unary_input(1), budget=1000)
        assert metrics.status is RunStatus.DIVERGENT_BY_CYCLE
        assert metrics.cycle == (2, 4)

    def test_cycle_witness_repeats_a_configuration(self, looping_table):
        first, second = run(looping_table, unary_input(1), budget=1000).cycle
        assert replay(looping_table, unary_input(1), first).key() == replay(looping_table, unary_input(1), second).key()

    def test_cycle_witnesses_of_random_machines(self, space32):
        rng = random.Random(99)
        witnessed = 0
        for machine in (rng.randrange(space32.size) for _ in range(300)):
            table, tape = decode(machine, space32), unary_input(rng.randint(1, 4))
            metrics = run(table, tape, budget=5000)
            if metrics.status is not RunStatus.DIVERGENT_BY_CYCLE:
                continue
            first, second = metrics.cycle
            assert first < second
            assert replay(table, tape, first).key() == replay(table, tape, second).key()
            witnessed += 1
        assert witnessed > 0

    def test_detects_escape(self, drifting_table):
        metrics = run(drifting_table, unary_input(1), budget=1000, escape_check=True)
        assert metrics.status is RunStatus.DIVERGENT_BY_ESCAPE
        assert not metrics.halted

    def test_drift_exhausts_budget_without_escape_check(self, drifting_table):
        metrics = run(drifting_table, unary_input(1), budget=1000)
        assert metrics.status is RunStatus.BUDGET_EXCEEDED
        assert metrics.t == 1000

    def test_escaping_states(self, drifting_table, machine_346):
        assert escaping_states(drifting_table) == frozenset({1})
        assert escaping_states(machine_346) == frozenset()

    def test_rejects_empty_budget(self, machine_346):
        with pytest.raises(InputDomainError):
            run(machine_346, unary_input(1), budget=0)


class TestTwins:
    def test_twins_run_identically(self, space32):
        rng = random.Random(2718)
        for machine in (rng.randrange(space32.size) for _ in range(200)):
            tables = [decode(m, space32) for m in twin_class(machine, space32)]
            for x in range(1, 11):
                outcomes = {run(table, unary_input(x), budget=500, escape_check=True) for table in tables}
                assert len(outcomes) == 1


class TestReplay:
    def test_configuration_after_two_steps(self, machine_346):
        config = replay(machine_346, unary_input(1), 2)
        assert isinstance(config, Configuration)
        assert (config.state, config.head) == (2, 0)
        assert config.key() == (2, 0, ())

    def test_halts_on_last_step(self, machine_346):
        assert replay(machine_346, unary_input(1), 5) is HALT

    def test_trace_has_one_change_per_step(self, machine_346):
        metrics, changes = run_traced(machine_346, unary_input(1))
        assert len(changes) == metrics.t
        assert changes[0] == (0, 0)


class TestSeries:
    def test_keeps_halted_inputs(self, machine_346):
        series = metrics_series(machine_346, range(1, 6))
        assert series.xs == [1, 2, 3, 4, 5]
        assert series.values("t")[:3] == [5, 7, 11]
        assert not series.undefined
        assert series.runs == series.points

    def test_tallies_divergent_inputs(self, drifting_table):
        series = series_from_runs(run_inputs(drifting_table, [1, 2, 3], budget=100, escape_check=True))
        assert series.undefined
        assert series.dropped == {"divergent_by_escape": 3}
        assert series.unknown == 0
        assert [x for x, _ in series.runs] == [1, 2, 3]

    def test_counts_unknown_inputs(self, drifting_table):
        series = metrics_series(drifting_table, [1, 2], budget=50)
        assert series.unknown == 2

    def test_rejects_empty_input_range(self, machine_346):
        with pytest.raises(InputDomainError):
            run_inputs(machine_346, [])
