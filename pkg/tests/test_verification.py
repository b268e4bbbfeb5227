"""
Tests for the grid-search reference and the property suite.
"""

import math

import pytest

from src.core.model import assignment_from_choices
from src.experiments.verification import grid_search_fixed, run_verification
from src.solver import solve_fixed


class TestGridSearch:

    def test_matches_solver(self, single_task_instance):
        report = solve_fixed(single_task_instance, assignment_from_choices([0], 2))
        assert grid_search_fixed(single_task_instance, [0]) == pytest.approx(report.objective, rel=1e-4)

    def test_infeasible(self, instance_factory):
        poor = instance_factory(
            input_bits=[1e4], output_bits=[1e3], cycles=[[500.0, 1000.0]],
            freqs=[2e9, 1e9], budgets=[1e-3, 0.01], uplink=[1e6], downlink=[1e6],
        )
        assert grid_search_fixed(poor, [0]) == math.inf

    def test_local_choice_rejected(self, single_task_instance):
        with pytest.raises(ValueError):
            grid_search_fixed(single_task_instance, [1])


class TestRunVerification:

    @pytest.mark.slow
    def test_every_property_holds(self):
        results = run_verification(seed_count=1)
        assert [result.name for result in results if not result.passed] == []
        assert {result.name for result in results} >= {
            "perspective decreasing in t", "fixed solver vs grid", "latency monotone in budget", "determinism",
        }
