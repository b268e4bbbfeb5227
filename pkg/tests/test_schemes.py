"""
Tests for the assignment schemes: rounding and repair, baselines, the
exhaustive oracle and the scheme registry.
"""

import math

import numpy as np
import pytest

from src.core.errors import EnumerationLimitError
from src.core.model import Assignment, assignment_from_choices
from src.experiments.scenario import (
    ScenarioConfig,
    SweepAxis,
    apply_axis,
    generate_feasible_instance,
    generate_instance,
    reference_config,
)
from src.schemes import (
    SchemeLabel,
    SchemeSettings,
    algorithm1,
    exhaustive,
    heuristic_channel,
    heuristic_compute,
    local_execution,
    random_search,
    random_selection,
    relaxed_bound,
    repair_assignment,
    round_assignment,
    run_scheme,
)
from src.solver import fixed_assignment_margins


@pytest.fixture
def crowded_helper(instance_factory):
    """
    K=1, L=2: either task costs the helper 1 mJ of compute against a
    1.5 mJ budget, so the helper can take one task but not both.
    """
    return instance_factory(
        input_bits=[1e4, 1e4], output_bits=[1e3, 1e3], cycles=[[1000.0, 100.0], [1000.0, 100.0]],
        freqs=[1e9, 1e9], budgets=[1.5e-3, 1e-2], uplink=[1e6], downlink=[1e6],
    )


def _generous(instance_factory, uplink, downlink, cycles, freqs):
    num_tasks = len(cycles)
    return instance_factory(
        input_bits=[1e4] * num_tasks, output_bits=[1e3] * num_tasks, cycles=cycles,
        freqs=freqs, budgets=[1.0] * len(freqs), uplink=uplink, downlink=downlink,
    )


class TestRounding:

    def test_largest_share_wins(self):
        fractional = Assignment.from_array(np.array([[0.2, 0.5, 0.3], [0.1, 0.1, 0.8]]))
        assert round_assignment(fractional).choices() == [1, 2]

    def test_ties_go_to_lowest_index(self):
        fractional = Assignment.from_array(np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5]]))
        assert round_assignment(fractional).choices() == [0, 1]

    def test_idempotent(self):
        rounded = round_assignment(Assignment.from_array(np.array([[0.2, 0.5, 0.3]])))
        assert round_assignment(rounded) == rounded


class TestRepair:
    """Moving tasks off a node that cannot afford them."""

    shares = Assignment.from_array(np.array([[0.6, 0.4], [0.9, 0.1]]))

    def test_rounded_assignment_is_over_budget(self, crowded_helper):
        rounded = round_assignment(self.shares)
        assert rounded.choices() == [0, 0]
        assert fixed_assignment_margins(crowded_helper, rounded)[0] < 0

    def test_moves_task_with_largest_alternative_share(self, crowded_helper):
        """Task 0 has 0.4 on the local node against task 1's 0.1, so it moves."""
        repaired = repair_assignment(round_assignment(self.shares), self.shares, crowded_helper)
        assert repaired.choices() == [1, 0]
        assert np.all(fixed_assignment_margins(crowded_helper, repaired) > 0)

    def test_feasible_assignment_untouched(self, crowded_helper):
        feasible = assignment_from_choices([1, 0], 2)
        assert repair_assignment(feasible, self.shares, crowded_helper) == feasible

    def test_proposed_ends_feasible(self, crowded_helper):
        solution = algorithm1(crowded_helper)
        assert solution.feasible
        assert solution.assignment.choices() != [0, 0]


class TestHeuristics:

    def test_channel_picks_stronger_weak_link(self, instance_factory):
        instance = _generous(instance_factory, [1e6, 2e6], [1e6, 2e6], [[500.0, 500.0, 1000.0]], [2e9, 2e9, 1e9])
        assert heuristic_channel(instance).assignment.choices() == [1]

    def test_channel_tie_goes_to_first_helper(self, instance_factory):
        instance = _generous(instance_factory, [1e6, 1e6], [1e6, 1e6], [[500.0, 500.0, 1000.0]], [2e9, 2e9, 1e9])
        assert heuristic_channel(instance).assignment.choices() == [0]

    def test_channel_single_helper(self, single_task_instance):
        assert heuristic_channel(single_task_instance).assignment.choices() == [0]

    def test_compute_prefers_fewer_cycles(self, instance_factory):
        instance = _generous(instance_factory, [1e6, 1e6], [1e6, 1e6], [[400.0, 600.0, 100.0]], [2e9, 2e9, 1e9])
        assert heuristic_compute(instance).assignment.choices() == [0]

    def test_compute_prefers_faster_clock(self, instance_factory):
        instance = _generous(instance_factory, [1e6, 1e6], [1e6, 1e6], [[500.0, 500.0, 100.0]], [1e9, 2e9, 1e9])
        assert heuristic_compute(instance).assignment.choices() == [1]

    def test_compute_ties(self, instance_factory):
        instance = _generous(
            instance_factory, [1e6, 1e6], [1e6, 1e6], [[500.0, 500.0, 100.0]] * 2, [2e9, 2e9, 1e9]
        )
        assert heuristic_compute(instance).assignment.choices() == [0, 0]

    def test_solution_is_scored(self, single_task_instance):
        solution = heuristic_compute(single_task_instance)
        assert solution.feasible
        assert solution.scheme == "heuristic2"
        assert solution.objective < math.inf


class TestRandomSchemes:

    def test_selection_is_deterministic(self, small_instance):
        first = random_selection(small_instance, seed=3)
        second = random_selection(small_instance, seed=3)
        assert first.model_dump_json() == second.model_dump_json()

    def test_first_draw_feasible(self, single_task_instance):
        assert "draws=1" in random_selection(single_task_instance, seed=0).detail

    def test_search_of_one_is_a_selection(self, small_instance):
        selected = random_selection(small_instance, seed=5)
        searched = random_search(small_instance, seed=5, draws=1)
        assert searched.assignment == selected.assignment
        assert searched.objective == pytest.approx(selected.objective)

    def test_more_draws_never_hurt(self, small_instance):
        objectives = [random_search(small_instance, seed=2, draws=n).objective for n in (1, 4, 16)]
        assert objectives[1] <= objectives[0]
        assert objectives[2] <= objectives[1]

    @pytest.mark.parametrize("draws", [0, -3])
    def test_search_needs_a_draw(self, small_instance, draws):
        with pytest.raises(ValueError):
            random_search(small_instance, seed=0, draws=draws)


class TestLocalExecution:

    def test_objective_is_local_compute_time(self, small_instance):
        solution = local_execution(small_instance)
        expected = float(small_instance.compute_seconds()[:, small_instance.local_index].sum())
        assert solution.feasible
        assert solution.objective == pytest.approx(expected)

    def test_small_budget(self, instance_factory):
        instance = instance_factory(
            input_bits=[1e4], output_bits=[1e3], cycles=[[500.0, 1000.0]],
            freqs=[2e9, 1e9], budgets=[1.0, 5e-4], uplink=[1e6], downlink=[1e6],
        )
        solution = local_execution(instance)
        assert not solution.feasible
        assert solution.objective == math.inf


class TestExhaustive:

    def test_single_task(self, single_task_instance):
        solution = exhaustive(single_task_instance)
        assert solution.feasible
        assert "enumerated=2" in solution.detail

    def test_beats_every_scheme(self, small_instance):
        best = exhaustive(small_instance).objective
        for label in (SchemeLabel.PROPOSED, SchemeLabel.HEURISTIC1, SchemeLabel.HEURISTIC2,
                      SchemeLabel.RANDOM_SELECTION, SchemeLabel.LOCAL_EXECUTION):
            assert best <= run_scheme(label, small_instance).objective * (1 + 1e-6)

    def test_limit(self):
        """4^9 assignments are past the default limit of 10^5."""
        instance = generate_instance(ScenarioConfig(num_helpers=3, num_tasks=9))
        with pytest.raises(EnumerationLimitError):
            exhaustive(instance)

    def test_explicit_limit(self, small_instance):
        with pytest.raises(EnumerationLimitError):
            exhaustive(small_instance, limit=26)

    def test_parallel_matches_serial(self, small_instance):
        serial = exhaustive(small_instance)
        parallel = exhaustive(small_instance, settings=SchemeSettings(exhaustive_jobs=2))
        assert parallel.assignment == serial.assignment
        assert parallel.objective == pytest.approx(serial.objective)


class TestRegistry:

    @pytest.mark.parametrize("label", list(SchemeLabel))
    def test_label_round_trip(self, label, small_instance):
        solution = run_scheme(label.value, small_instance, seed=1, settings=SchemeSettings(random_search_draws=4))
        assert solution.scheme == label.value

    def test_bound_sandwich(self, small_instance):
        """relaxed_bound <= exhaustive <= proposed."""
        bound = relaxed_bound(small_instance).objective
        best = exhaustive(small_instance).objective
        proposed = algorithm1(small_instance).objective
        assert bound <= best * (1 + 1e-6)
        assert best <= proposed * (1 + 1e-6)

    def test_proposed_is_deterministic(self, small_instance):
        assert algorithm1(small_instance).model_dump_json() == algorithm1(small_instance).model_dump_json()

    def test_unknown_label(self, small_instance):
        with pytest.raises(ValueError):
            run_scheme("greedy", small_instance)


class TestProposedBudget:

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(12))
    def test_objective_never_rises_with_budget(self, seed):
        """Same draws at every budget: a larger budget only widens the feasible set."""
        budgets = [-24.0, -22.0, -20.0, -18.0, -16.0]
        base = ScenarioConfig(num_helpers=3, num_tasks=6, seed=seed)
        reference = reference_config(base, SweepAxis.ENERGY_DB, budgets)
        objectives = []
        for budget in budgets:
            instance, _ = generate_feasible_instance(apply_axis(base, SweepAxis.ENERGY_DB, budget), reference)
            objectives.append(algorithm1(instance).objective)
        assert all(later <= earlier * (1 + 1e-6) for earlier, later in zip(objectives, objectives[1:]))
