"""
Log-barrier interior-point solver for the small convex programs of this package.

A program has a linear objective, linear inequalities A x <= b, and energy
constraints of the form

    q.x + r + sum_j coef_j * h(p_j.x + s_j, x[time_j]) <= 0

where h(y, t) = t*(exp(y/t) - 1) is the perspective of exp with unit rate
(loads are pre-multiplied by ln2/B). Phase I finds a strictly feasible point
when the start is not one.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Tuple

import numpy as np
import scipy.linalg
from scipy.optimize import nnls

from .perspective import _perspective
from .settings import BarrierSettings

logger = logging.getLogger(__name__)

# constraint values, Jacobian rows, rank-1 curvature terms (row, weight, vector)
Evaluation = Tuple[np.ndarray, np.ndarray, List[Tuple[int, float, np.ndarray]]]


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    MAX_ITER = "max_iter"


@dataclass(frozen=True)
class PerspectiveTerm:
    """coef * h(load.x + load_constant, x[time_index])"""

    coef: float
    load: np.ndarray
    load_constant: float
    time_index: int


@dataclass(frozen=True)
class EnergyConstraint:
    """linear.x + constant + sum of perspective terms <= 0"""

    linear: np.ndarray
    constant: float
    terms: List[PerspectiveTerm] = field(default_factory=list)
    label: str = ""


@dataclass(frozen=True)
class ConvexProgram:
    objective: np.ndarray
    linear_matrix: np.ndarray
    linear_bound: np.ndarray
    energy: List[EnergyConstraint] = field(default_factory=list)

    @property
    def num_variables(self) -> int:
        return self.objective.shape[0]

    @property
    def num_constraints(self) -> int:
        return self.linear_matrix.shape[0] + len(self.energy)

    def evaluate(self, x: np.ndarray) -> Evaluation:
        """Constraint values g(x) (feasible when all < 0), Jacobian and curvature terms."""
        values = [self.linear_matrix @ x - self.linear_bound]
        rows = [self.linear_matrix]
        curvature = []
        offset = self.linear_matrix.shape[0]

        energy_values = np.empty(len(self.energy))
        energy_rows = np.zeros((len(self.energy), x.shape[0]))
        for i, constraint in enumerate(self.energy):
            value = float(constraint.linear @ x) + constraint.constant
            gradient = constraint.linear.astype(float).copy()
            for term in constraint.terms:
                y = float(term.load @ x) + term.load_constant
                t = float(x[term.time_index])
                if t <= 0 or y < 0:
                    value = math.inf
                    break
                h, dh, _ = _perspective(y, t, 1.0)
                value += term.coef * h
                gradient += term.coef * dh[0] * term.load
                gradient[term.time_index] += term.coef * dh[1]
                # the Hessian of h is (exp(u)/t) v v^T with v = (load, -y/t on the time slot)
                direction = term.load.astype(float).copy()
                direction[term.time_index] -= y / t
                with np.errstate(over='ignore'):
                    weight = term.coef * float(np.exp(y / t)) / t
                curvature.append((offset + i, weight, direction))
            energy_values[i] = value
            energy_rows[i] = gradient

        values.append(energy_values)
        rows.append(energy_rows)
        return np.concatenate(values), np.vstack(rows), curvature


@dataclass(frozen=True)
class ProgramSolution:
    x: np.ndarray
    objective: float
    kkt_residual: float
    iterations: int
    status: SolveStatus
    message: str = ""
    phase_one_steps: int = 0


def _barrier_value(evaluate: Callable[[np.ndarray], Evaluation], cost: np.ndarray, x: np.ndarray, weight: float) -> float:
    """c.x - (1/w) sum log(-g); inf outside the strict interior."""
    with np.errstate(over='ignore', invalid='ignore'):
        values = evaluate(x)[0]
    if not np.all(np.isfinite(values)) or np.any(values >= 0):
        return math.inf
    return float(cost @ x) - float(np.sum(np.log(-values))) / weight


def _newton_direction(
    evaluate: Callable[[np.ndarray], Evaluation], cost: np.ndarray, x: np.ndarray, weight: float
) -> Tuple[np.ndarray, np.ndarray, float]:
    """Newton step of the weighted barrier function; returns (step, gradient, decrement^2 * weight)."""
    with np.errstate(over='ignore', invalid='ignore'):
        values, jacobian, curvature = evaluate(x)
    inverse = 1.0 / (-values)
    gradient = cost + (jacobian.T @ inverse) / weight
    hessian = (jacobian.T * inverse ** 2) @ jacobian
    for row, scale, direction in curvature:
        hessian += inverse[row] * scale * np.outer(direction, direction)
    hessian /= weight

    try:
        factor = scipy.linalg.cho_factor(hessian)
        step = scipy.linalg.cho_solve(factor, -gradient)
    except (np.linalg.LinAlgError, ValueError):
        step = np.linalg.lstsq(hessian, -gradient, rcond=None)[0]
    return step, gradient, max(0.0, -float(gradient @ step)) * weight


def _line_search(
    evaluate: Callable[[np.ndarray], Evaluation],
    cost: np.ndarray,
    x: np.ndarray,
    step: np.ndarray,
    gradient: np.ndarray,
    weight: float,
    decrement: float,
    settings: BarrierSettings,
) -> float:
    """Backtracking: strict feasibility first, then sufficient decrease outside the quadratic region."""
    current = _barrier_value(evaluate, cost, x, weight)
    slope = float(gradient @ step)
    quadratic = decrement <= settings.full_step_decrement ** 2
    size = 1.0
    while size > 1e-20:
        candidate = _barrier_value(evaluate, cost, x + size * step, weight)
        if math.isfinite(candidate) and (quadratic or candidate <= current + settings.line_search_alpha * size * slope):
            return size
        size *= settings.line_search_beta
    return 0.0


def _kkt_residual(program_evaluate, cost: np.ndarray, x: np.ndarray, weight: float) -> float:
    """
    max(stationarity / (1 + |c|_inf), m / w).

    Stationarity uses the barrier multipliers 1/(w * -g_i), or multipliers
    refitted by nonnegative least squares on the near-active constraints when
    those certify a smaller residual.
    """
    values, jacobian, _ = program_evaluate(x)
    num_constraints = values.shape[0]
    gap = num_constraints / weight
    scale = 1.0 + float(np.max(np.abs(cost)))
    violation = max(0.0, float(np.max(values)))

    multipliers = 1.0 / (weight * -values)
    barrier_residual = float(np.max(np.abs(cost + jacobian.T @ multipliers))) / scale

    near = -values <= math.sqrt(gap)
    refit_residual = math.inf
    if np.any(near):
        fitted, _ = nnls(jacobian[near].T, -cost)
        refit_residual = float(np.max(np.abs(cost + jacobian[near].T @ fitted))) / scale
    return max(min(barrier_residual, refit_residual), gap, violation)


def _central_path(
    evaluate: Callable[[np.ndarray], Evaluation],
    cost: np.ndarray,
    x: np.ndarray,
    settings: BarrierSettings,
    step_budget: int,
    stop: Optional[Callable[[np.ndarray], bool]] = None,
) -> Tuple[np.ndarray, int, float, str]:
    """
    Follow the central path from a strictly feasible x.

    Returns:
        (final x, Newton steps used, final barrier weight, one of
        "converged" | "stopped" | "exhausted")
    """
    num_constraints = evaluate(x)[0].shape[0]
    weight = settings.initial_weight
    steps = 0
    while True:
        while True:
            if stop is not None and stop(x):
                return x, steps, weight, "stopped"
            if steps >= step_budget:
                return x, steps, weight, "exhausted"
            step, gradient, decrement = _newton_direction(evaluate, cost, x, weight)
            if decrement / 2.0 <= settings.newton_tolerance:
                break
            size = _line_search(evaluate, cost, x, step, gradient, weight, decrement, settings)
            if size == 0.0:
                break
            x = x + size * step
            steps += 1
        if num_constraints / weight < settings.gap_tolerance:
            return x, steps, weight, "converged"
        weight *= settings.weight_factor


def _phase_one(
    program: ConvexProgram, x0: np.ndarray, settings: BarrierSettings
) -> Tuple[Optional[np.ndarray], int, str]:
    """
    Minimize a slack s subject to g_i(x) <= s and s >= -1, stopping once s < 0.

    Returns:
        (strictly feasible x or None, Newton steps used, message)
    """
    size = program.num_variables

    def evaluate(z: np.ndarray) -> Evaluation:
        values, jacobian, curvature = program.evaluate(z[:size])
        slack = z[size]
        values = np.append(values - slack, -1.0 - slack)
        jacobian = np.vstack([
            np.hstack([jacobian, -np.ones((jacobian.shape[0], 1))]),
            np.append(np.zeros(size), -1.0),
        ])
        curvature = [(row, scale, np.append(direction, 0.0)) for row, scale, direction in curvature]
        return values, jacobian, curvature

    with np.errstate(over='ignore', invalid='ignore'):
        start_values = program.evaluate(x0)[0]
    if not np.all(np.isfinite(start_values)):
        return None, 0, "start point is outside the domain of the energy constraints"

    cost = np.append(np.zeros(size), 1.0)
    z0 = np.append(x0, float(np.max(start_values)) + 1.0)
    z, steps, _, outcome = _central_path(
        evaluate, cost, z0, settings, settings.max_newton_steps, stop=lambda z: z[size] < 0
    )
    if outcome == "stopped":
        logger.debug(f"🔎 Phase I found an interior point in {steps} Newton steps")
        return z[:size], steps, ""
    return None, steps, f"phase I ended with slack {z[size]:.3g} >= 0 after {steps} Newton steps"


def minimize_convex(
    program: ConvexProgram, x0: np.ndarray, settings: Optional[BarrierSettings] = None
) -> ProgramSolution:
    """
    Minimize c.x over the program's feasible set with the log-barrier method.

    The barrier weight starts at `initial_weight` and grows by `weight_factor`
    until m/w < `gap_tolerance`; each centering uses damped Newton steps with
    backtracking. Phase I runs when x0 is not strictly feasible.

    Args:
        program: Linear objective, linear and energy constraints
        x0: Start point; times must be positive
        settings: Barrier parameters

    Returns:
        ProgramSolution with status optimal, infeasible or max_iter
    """
    settings = settings or BarrierSettings()
    x = np.asarray(x0, dtype=float)
    nan = np.full_like(x, math.nan)

    with np.errstate(over='ignore', invalid='ignore'):
        start_values = program.evaluate(x)[0]
    steps = 0
    if not (np.all(np.isfinite(start_values)) and np.all(start_values < 0)):
        interior, steps, message = _phase_one(program, x, settings)
        if interior is None:
            status = SolveStatus.MAX_ITER if steps >= settings.max_newton_steps else SolveStatus.INFEASIBLE
            return ProgramSolution(nan, math.inf, math.inf, steps, status, message, phase_one_steps=steps)
        x = interior
    phase_one_steps = steps

    x, used, weight, outcome = _central_path(
        program.evaluate, program.objective, x, settings, settings.max_newton_steps - steps
    )
    steps += used
    residual = _kkt_residual(program.evaluate, program.objective, x, weight)
    objective = float(program.objective @ x)

    if outcome == "converged" and residual <= settings.kkt_tolerance:
        logger.debug(f"✅ Barrier converged: objective={objective:.9g}, kkt={residual:.2e}, steps={steps}")
        return ProgramSolution(x, objective, residual, steps, SolveStatus.OPTIMAL, phase_one_steps=phase_one_steps)

    message = f"stopped after {steps} Newton steps with KKT residual {residual:.2e}"
    logger.warning(f"⚠️ Barrier method {message}")
    return ProgramSolution(x, objective, residual, steps, SolveStatus.MAX_ITER, message, phase_one_steps)
