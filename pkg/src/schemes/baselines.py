"""
Baseline assignment schemes. None of them repairs an infeasible assignment.
"""

import logging
import math
from typing import Dict, Optional, Tuple

import numpy as np

from ..core.errors import SolverIterationError
from ..core.latency_engine import energy_audit, local_compute
from ..core.model import Instance, ResourceAllocation, Solution, all_local, assignment_from_choices
from ..solver import fixed_assignment_margins, solve_fixed
from .base import infeasible_solution, solution_from_report
from .settings import SchemeSettings

logger = logging.getLogger(__name__)


def _solve_choices(instance: Instance, choices, scheme: str, settings: SchemeSettings) -> Solution:
    assignment = assignment_from_choices(choices, instance.num_helpers + 1)
    return solution_from_report(instance, solve_fixed(instance, assignment, settings.solver), scheme)


def heuristic_channel(instance: Instance, settings: Optional[SchemeSettings] = None) -> Solution:
    """
    Offload every task to the helper whose weaker link is strongest.

    The helper is argmin_k max(1/h_k, 1/g_k), lowest index on ties.
    """
    settings = settings or SchemeSettings()
    weakest = np.maximum(1.0 / instance.uplink_gains(), 1.0 / instance.downlink_gains())
    helper = int(np.argmin(weakest))
    logger.debug(f"📡 Channel heuristic picked helper {helper}")
    return _solve_choices(instance, [helper] * instance.num_tasks, "heuristic1", settings)


def heuristic_compute(instance: Instance, settings: Optional[SchemeSettings] = None) -> Solution:
    """Offload each task to the helper that computes it fastest, lowest index on ties."""
    settings = settings or SchemeSettings()
    seconds = instance.compute_seconds()[:, :instance.num_helpers]
    choices = [int(k) for k in np.argmin(seconds, axis=1)]
    return _solve_choices(instance, choices, "heuristic2", settings)


def _draw_feasible(
    instance: Instance,
    rng: np.random.Generator,
    attempts: int,
    scheme: str,
    settings: SchemeSettings,
    cache: Dict[Tuple[int, ...], Solution],
) -> Tuple[Optional[Solution], int]:
    """Draw whole assignments until one solves feasibly; returns (solution or None, draws used)."""
    nodes = instance.num_helpers + 1
    for attempt in range(1, attempts + 1):
        choices = tuple(int(c) for c in rng.integers(0, nodes, size=instance.num_tasks))
        if choices not in cache:
            assignment = assignment_from_choices(choices, nodes)
            if np.any(fixed_assignment_margins(instance, assignment) <= 0):
                cache[choices] = infeasible_solution(instance, assignment, scheme, "energy budget")
            else:
                cache[choices] = _solve_choices(instance, choices, scheme, settings)
        if cache[choices].feasible:
            return cache[choices], attempt
    return None, attempts


def random_selection(instance: Instance, seed: int, settings: Optional[SchemeSettings] = None) -> Solution:
    """
    Draw each task's node uniformly, resampling whole assignments until the
    slot lengths can be solved within budget.
    """
    settings = settings or SchemeSettings()
    rng = np.random.default_rng(seed)
    solution, draws = _draw_feasible(
        instance, rng, settings.random_selection_attempts, "random_selection", settings, {}
    )
    if solution is None:
        return infeasible_solution(
            instance, all_local(instance), "random_selection", f"no feasible draw in {draws} attempts"
        )
    return solution.model_copy(update={"detail": f"{solution.detail}, draws={draws}"})


def random_search(
    instance: Instance, seed: int, draws: Optional[int] = None, settings: Optional[SchemeSettings] = None
) -> Solution:
    """
    Best of `draws` random selections sharing one random stream.

    With draws=1 this is random_selection with the same seed.

    Raises:
        ValueError: draws is below 1
    """
    settings = settings or SchemeSettings()
    if draws is None:
        draws = settings.random_search_draws
    if draws < 1:
        raise ValueError(f"random_search needs at least one draw, got {draws}")
    rng = np.random.default_rng(seed)
    cache: Dict[Tuple[int, ...], Solution] = {}
    best: Optional[Solution] = None

    for _ in range(draws):
        try:
            solution, _ = _draw_feasible(
                instance, rng, settings.random_selection_attempts, "random_search", settings, cache
            )
        except SolverIterationError as e:
            logger.warning(f"⚠️ random_search skipped a draw: {e}")
            continue
        if solution is not None and (best is None or solution.objective < best.objective):
            best = solution

    if best is None:
        return infeasible_solution(instance, all_local(instance), "random_search", f"no feasible draw in {draws} selections")
    logger.debug(f"🎲 random_search evaluated {len(cache)} distinct assignments")
    return best.model_copy(update={"detail": f"{best.detail}, distinct={len(cache)}"})


def local_execution(instance: Instance, settings: Optional[SchemeSettings] = None) -> Solution:
    """Run every task on the local node; feasible iff its compute energy fits the budget."""
    assignment = all_local(instance)
    seconds, joules = local_compute(assignment, instance)
    allocation = ResourceAllocation(
        t_off=(0.0,) * instance.num_helpers, t_dl=(0.0,) * instance.num_helpers, i1=seconds
    )
    energies, within_budget = energy_audit(assignment, allocation, instance)
    return Solution(
        assignment=assignment,
        allocation=allocation,
        objective=seconds if within_budget else math.inf,
        node_energy=energies,
        feasible=within_budget,
        scheme="local_execution",
        detail=f"local energy {joules:.4g} J of {instance.local.energy_budget:.4g} J",
    )
