"""
Tests for the log-barrier interior-point solver on small hand-made programs.
"""

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from src.solver import (
    BarrierSettings,
    ConvexProgram,
    EnergyConstraint,
    PerspectiveTerm,
    SolveStatus,
    minimize_convex,
)


def _lower_bound_program(bound: float = 3.0) -> ConvexProgram:
    """min x s.t. x >= bound"""
    return ConvexProgram(
        objective=np.array([1.0]),
        linear_matrix=np.array([[-1.0]]),
        linear_bound=np.array([-bound]),
    )


def _slot_program(bits: float, budget: float) -> ConvexProgram:
    """min t s.t. t*(exp(bits/t) - 1) <= budget"""
    return ConvexProgram(
        objective=np.array([1.0]),
        linear_matrix=np.zeros((0, 1)),
        linear_bound=np.zeros(0),
        energy=[EnergyConstraint(
            linear=np.zeros(1),
            constant=-budget,
            terms=[PerspectiveTerm(coef=1.0, load=np.zeros(1), load_constant=bits, time_index=0)],
            label="slot",
        )],
    )


class TestLinearPrograms:

    def test_lower_bound_from_interior(self):
        """min x s.t. x >= 3 from x0 = 5."""
        result = minimize_convex(_lower_bound_program(), np.array([5.0]))
        assert result.status == SolveStatus.OPTIMAL
        assert result.x[0] == pytest.approx(3.0, abs=1e-8)
        assert result.kkt_residual <= 1e-7
        assert result.phase_one_steps == 0

    def test_phase_one_start(self):
        """An infeasible start goes through phase I and reaches the same optimum."""
        result = minimize_convex(_lower_bound_program(), np.array([0.0]))
        assert result.status == SolveStatus.OPTIMAL
        assert result.x[0] == pytest.approx(3.0, abs=1e-8)
        assert result.phase_one_steps > 0

    def test_empty_feasible_set(self):
        """x >= 3 and x <= 1 is reported infeasible."""
        program = ConvexProgram(
            objective=np.array([1.0]),
            linear_matrix=np.array([[-1.0], [1.0]]),
            linear_bound=np.array([-3.0, 1.0]),
        )
        result = minimize_convex(program, np.array([2.0]))
        assert result.status == SolveStatus.INFEASIBLE
        assert result.objective == math.inf

    def test_step_budget(self):
        """Too few Newton steps ends with max_iter."""
        result = minimize_convex(
            _lower_bound_program(), np.array([5.0]), BarrierSettings(max_newton_steps=2)
        )
        assert result.status == SolveStatus.MAX_ITER
        assert result.iterations <= 2


class TestPerspectiveConstraint:

    @pytest.mark.parametrize("bits,budget", [(1.0, 2.0), (0.5, 0.6), (3.0, 30.0)])
    def test_shortest_slot(self, bits, budget):
        """The shortest slot within budget is the root of t*(exp(bits/t) - 1) = budget."""
        root = brentq(lambda t: t * math.expm1(bits / t) - budget, bits / 50.0, 1e6, xtol=1e-14)
        start = 2.0 * root
        while start * math.expm1(bits / start) >= budget:
            start *= 2.0
        result = minimize_convex(_slot_program(bits, budget), np.array([start]))
        assert result.status == SolveStatus.OPTIMAL
        assert result.x[0] == pytest.approx(root, rel=1e-6)

    def test_evaluate_outside_domain(self):
        """A non-positive time makes the constraint infinite."""
        values, _, _ = _slot_program(1.0, 2.0).evaluate(np.array([0.0]))
        assert values[0] == math.inf

    def test_curvature_terms(self):
        values, jacobian, curvature = _slot_program(1.0, 2.0).evaluate(np.array([1.0]))
        assert values[0] == pytest.approx(math.expm1(1.0) - 2.0)
        assert jacobian[0, 0] == pytest.approx(math.e * (1.0 - 1.0) - 1.0)
        (row, weight, direction), = curvature
        assert row == 0
        assert weight * direction[0] ** 2 == pytest.approx(math.e)
