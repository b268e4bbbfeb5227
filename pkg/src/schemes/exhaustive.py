"""
Exhaustive search over all binary assignments, for small instances.
"""

import itertools
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from ..core.errors import EnumerationLimitError
from ..core.model import Instance, Solution, all_local, assignment_from_choices
from ..solver import fixed_assignment_margins, solve_fixed
from .base import infeasible_solution, solution_from_report
from .settings import SchemeSettings

logger = logging.getLogger(__name__)


def enumeration_size(instance: Instance) -> int:
    return (instance.num_helpers + 1) ** instance.num_tasks


def _evaluate(instance: Instance, choices: Sequence[int], settings: SchemeSettings) -> Solution:
    assignment = assignment_from_choices(choices, instance.num_helpers + 1)
    return solution_from_report(instance, solve_fixed(instance, assignment, settings.solver), "exhaustive")


def exhaustive(instance: Instance, limit: Optional[int] = None, settings: Optional[SchemeSettings] = None) -> Solution:
    """
    Solve every binary assignment and keep the best.

    Assignments with a non-positive energy margin are skipped without a
    solve. The minimum is taken in enumeration order, so ties keep the first
    assignment whatever the number of workers.

    Raises:
        EnumerationLimitError: (K+1)^L exceeds the limit
    """
    settings = settings or SchemeSettings()
    limit = limit or settings.exhaustive_limit
    size = enumeration_size(instance)
    if size > limit:
        raise EnumerationLimitError(
            f"exhaustive search needs {instance.num_helpers + 1}^{instance.num_tasks} = {size} "
            f"assignments, above the limit of {limit}"
        )

    nodes = instance.num_helpers + 1
    candidates: List[Tuple[int, ...]] = [
        choices for choices in itertools.product(range(nodes), repeat=instance.num_tasks)
        if np.all(fixed_assignment_margins(instance, assignment_from_choices(choices, nodes)) > 0)
    ]
    logger.info(f"🔍 Exhaustive search: {len(candidates)} of {size} assignments pass the energy margins")

    if settings.exhaustive_jobs == 1:
        solutions = [_evaluate(instance, choices, settings) for choices in candidates]
    else:
        solutions = Parallel(n_jobs=settings.exhaustive_jobs)(
            delayed(_evaluate)(instance, choices, settings) for choices in candidates
        )

    best: Optional[Solution] = None
    for solution in solutions:
        if solution.feasible and (best is None or solution.objective < best.objective):
            best = solution
    if best is None:
        return infeasible_solution(instance, all_local(instance), "exhaustive", f"none of {size} assignments is feasible")
    return best.model_copy(update={"detail": f"{best.detail}, enumerated={size}, solved={len(candidates)}"})
