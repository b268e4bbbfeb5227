"""
Turning solver reports into scheme solutions.
"""

import logging
import math

from ..core.errors import SolverIterationError
from ..core.latency_engine import energy_audit, tighten_schedule
from ..core.model import Assignment, Instance, ResourceAllocation, Solution
from ..solver import ConvexSolveReport, SolveStatus

logger = logging.getLogger(__name__)


def infeasible_solution(instance: Instance, assignment: Assignment, scheme: str, detail: str = "") -> Solution:
    """A Solution with objective inf; node energies are those of the empty schedule."""
    allocation = ResourceAllocation.zeros(instance.num_helpers)
    energies, _ = energy_audit(assignment, allocation, instance)
    return Solution(
        assignment=assignment,
        allocation=allocation,
        objective=math.inf,
        node_energy=energies,
        feasible=False,
        scheme=scheme,
        detail=detail,
    )


def solution_from_report(instance: Instance, report: ConvexSolveReport, scheme: str) -> Solution:
    """
    Tighten and audit the schedule of a solved binary assignment.

    Raises:
        SolverIterationError: The solver stopped before certifying optimality
    """
    if report.status == SolveStatus.MAX_ITER:
        raise SolverIterationError(f"{scheme}: {report.message}")
    if report.status == SolveStatus.INFEASIBLE:
        return infeasible_solution(instance, report.assignment, scheme, report.message)

    allocation = tighten_schedule(report.assignment, report.allocation, instance)
    energies, within_budget = energy_audit(report.assignment, allocation, instance)
    if not within_budget:
        logger.warning(f"⚠️ {scheme}: tightened schedule exceeds an energy budget")
    return Solution(
        assignment=report.assignment,
        allocation=allocation,
        objective=report.objective,
        node_energy=energies,
        feasible=within_budget,
        scheme=scheme,
        detail=f"kkt={report.kkt_residual:.2e}, newton_steps={report.iterations}",
    )
