"""
Tests for parameter sweeps and their CSV output.
"""

import math

import numpy as np
import pytest

from src.experiments.scenario import ScenarioConfig, SweepAxis
from src.experiments.sweep_runner import CSV_HEADER, SweepRow, summarize, sweep, write_sweep_csv
from src.schemes import SchemeLabel

SCHEMES = [SchemeLabel.LOCAL_EXECUTION, SchemeLabel.HEURISTIC2]


@pytest.fixture
def small_config():
    return ScenarioConfig(num_helpers=2, num_tasks=2)


def _run(config, jobs=1):
    return sweep(config, SweepAxis.ENERGY_DB, [-20.0, -10.0], SCHEMES, [0, 1], jobs=jobs, record_wall_time=False)


class TestSweep:

    def test_row_order(self, small_config):
        rows = _run(small_config)
        assert len(rows) == 8
        keys = [(row.value, row.seed, row.scheme) for row in rows]
        assert keys == [(v, s, label) for v in (-20.0, -10.0) for s in (0, 1) for label in SCHEMES]

    def test_no_timing_writes_zero(self, small_config):
        assert all(row.wall_ms == 0.0 for row in _run(small_config))

    def test_reruns_are_byte_identical(self, small_config, tmp_path):
        first = write_sweep_csv(_run(small_config), str(tmp_path / "a.csv"))
        second = write_sweep_csv(_run(small_config), str(tmp_path / "b.csv"))
        with open(first, 'rb') as a, open(second, 'rb') as b:
            assert a.read() == b.read()

    def test_more_budget_keeps_local_time(self, small_config):
        """Budget changes leave the local compute time of a seed untouched."""
        rows = [row for row in _run(small_config) if row.scheme == SchemeLabel.LOCAL_EXECUTION and row.feasible]
        by_seed = {}
        for row in rows:
            by_seed.setdefault(row.seed, set()).add(round(row.objective_s, 12))
        assert all(len(objectives) == 1 for objectives in by_seed.values())

    @pytest.mark.parametrize("values,schemes,seeds", [([], SCHEMES, [0]), ([-20.0], [], [0]), ([-20.0], SCHEMES, [])])
    def test_empty_inputs(self, small_config, values, schemes, seeds):
        with pytest.raises(ValueError):
            sweep(small_config, SweepAxis.ENERGY_DB, values, schemes, seeds)

    def test_progress_callback(self, small_config):
        calls = []
        sweep(small_config, SweepAxis.NUM_TASKS, [1, 2], [SchemeLabel.LOCAL_EXECUTION], [0],
              record_wall_time=False, on_cell_done=lambda done, total: calls.append((done, total)))
        assert calls == [(1, 2), (2, 2)]

    @pytest.mark.slow
    def test_workers_match_sequential(self, small_config):
        assert _run(small_config, jobs=2) == _run(small_config)


class TestSweepCsv:

    def test_header(self, small_config, tmp_path):
        path = write_sweep_csv(_run(small_config), str(tmp_path / "sweep.csv"))
        with open(path, encoding='utf-8') as f:
            assert f.readline().rstrip('\n') == ",".join(CSV_HEADER)
        assert CSV_HEADER == ("scheme", "axis", "value", "seed", "objective_s", "feasible", "wall_ms")

    def test_infeasible_row(self, tmp_path):
        row = SweepRow(
            scheme=SchemeLabel.PROPOSED, axis=SweepAxis.ENERGY_DB, value=-20.0, seed=3,
            objective_s=math.inf, feasible=False, wall_ms=1.23456,
        )
        path = write_sweep_csv([row], str(tmp_path / "out" / "sweep.csv"))
        with open(path, encoding='utf-8') as f:
            lines = f.read().splitlines()
        assert lines[1] == "proposed,energy_db,-20.0,3,inf,false,1.235"

    def test_task_counts_are_integers(self, tmp_path):
        row = SweepRow(
            scheme=SchemeLabel.LOCAL_EXECUTION, axis=SweepAxis.NUM_TASKS, value=4.0, seed=0,
            objective_s=0.5, feasible=True, wall_ms=0.0,
        )
        path = write_sweep_csv([row], str(tmp_path / "sweep.csv"))
        with open(path, encoding='utf-8') as f:
            assert f.read().splitlines()[1] == "local_execution,num_tasks,4,0,0.5,true,0.000"


class TestSummarize:

    def _row(self, seed, objective, feasible, wall_ms=0.0):
        return SweepRow(
            scheme=SchemeLabel.PROPOSED, axis=SweepAxis.ENERGY_DB, value=-10.0, seed=seed,
            objective_s=objective, feasible=feasible, wall_ms=wall_ms, regenerations=1,
        )

    def test_mean_over_feasible_rows(self):
        summary = summarize([self._row(0, 1.0, True, 2.0), self._row(1, 3.0, True, 4.0), self._row(2, math.inf, False)])
        entry = summary[(SchemeLabel.PROPOSED, -10.0)]
        assert entry['mean_objective'] == pytest.approx(2.0)
        assert entry['feasible_rate'] == pytest.approx(2.0 / 3.0)
        assert entry['mean_wall_ms'] == pytest.approx(2.0)
        assert entry['regenerations'] == 3
        assert entry['count'] == 3

    def test_all_infeasible(self):
        entry = summarize([self._row(0, math.inf, False)])[(SchemeLabel.PROPOSED, -10.0)]
        assert entry['mean_objective'] == math.inf
        assert entry['feasible_rate'] == 0.0


def _mean_objectives(rows):
    """Mean objective per (scheme, value) with infeasible rows counted as inf."""
    grouped = {}
    for row in rows:
        grouped.setdefault((row.scheme, row.value), []).append(row.objective_s)
    return {key: float(np.mean(objectives)) for key, objectives in grouped.items()}


COMPARED = [SchemeLabel.PROPOSED, SchemeLabel.HEURISTIC1, SchemeLabel.HEURISTIC2, SchemeLabel.RANDOM_SELECTION]


@pytest.mark.slow
class TestTrends:
    """Curve shapes of the budget and task-count sweeps on a handful of seeds."""

    def test_budget_sweep(self):
        values = [-20.0, -12.5, -5.0]
        rows = sweep(
            ScenarioConfig(num_helpers=5, num_tasks=10), SweepAxis.ENERGY_DB, values, COMPARED,
            list(range(5)), record_wall_time=False,
        )
        means = _mean_objectives(rows)
        for value in values:
            for other in COMPARED[1:]:
                assert means[(SchemeLabel.PROPOSED, value)] <= means[(other, value)] * (1 + 1e-6)

        proposed = {}
        for row in rows:
            if row.scheme == SchemeLabel.PROPOSED:
                proposed.setdefault(row.seed, []).append(row.objective_s)
        for objectives in proposed.values():
            assert all(later <= earlier * (1 + 1e-6) for earlier, later in zip(objectives, objectives[1:]))

    def test_task_count_sweep(self):
        values = [2, 4, 6, 8, 10]
        schemes = [SchemeLabel.PROPOSED, SchemeLabel.HEURISTIC1, SchemeLabel.HEURISTIC2, SchemeLabel.LOCAL_EXECUTION]
        rows = sweep(
            ScenarioConfig(num_helpers=4, energy_budget_db=-10.0), SweepAxis.NUM_TASKS, values, schemes,
            list(range(5)), record_wall_time=False,
        )
        means = _mean_objectives(rows)
        for scheme in schemes:
            curve = [means[(scheme, float(value))] for value in values]
            assert all(later >= earlier * (1 - 1e-6) for earlier, later in zip(curve, curve[1:]))
        assert means[(SchemeLabel.PROPOSED, 10.0)] == min(means[(scheme, 10.0)] for scheme in schemes)
