"""
Relax, round and re-solve: the proposed assignment scheme and its lower bound.
"""

import logging
from typing import Optional

from ..core.errors import SolverIterationError
from ..core.latency_engine import energy_audit
from ..core.model import Instance, Solution, all_local
from ..solver import SolveStatus, solve_fixed, solve_relaxed
from .base import infeasible_solution, solution_from_report
from .rounding import repair_assignment, round_assignment
from .settings import SchemeSettings

logger = logging.getLogger(__name__)


def algorithm1(instance: Instance, settings: Optional[SchemeSettings] = None) -> Solution:
    """
    Solve the relaxation, round each task to its largest share and optimize
    the slot lengths of the rounded assignment.

    When the rounded assignment leaves a node without budget the repair loop
    moves tasks before the fixed problem is solved again.

    Args:
        instance: Problem data
        settings: Scheme settings

    Returns:
        Solution with scheme "proposed"
    """
    settings = settings or SchemeSettings()
    relaxed = solve_relaxed(instance, settings.solver)
    if relaxed.status == SolveStatus.MAX_ITER:
        raise SolverIterationError(f"proposed: relaxation {relaxed.message}")
    if relaxed.status == SolveStatus.INFEASIBLE:
        return infeasible_solution(instance, all_local(instance), "proposed", f"relaxation: {relaxed.message}")

    rounded = round_assignment(relaxed.assignment)
    report = solve_fixed(instance, rounded, settings.solver)
    if report.status == SolveStatus.INFEASIBLE and settings.repair:
        repaired = repair_assignment(rounded, relaxed.assignment, instance)
        logger.info(f"🔧 Rounded assignment infeasible, repaired {rounded.choices()} -> {repaired.choices()}")
        report = solve_fixed(instance, repaired, settings.solver)
    return solution_from_report(instance, report, "proposed")


def relaxed_bound(instance: Instance, settings: Optional[SchemeSettings] = None) -> Solution:
    """The relaxation optimum as a Solution: fractional assignment, untightened allocation."""
    settings = settings or SchemeSettings()
    report = solve_relaxed(instance, settings.solver)
    if report.status == SolveStatus.MAX_ITER:
        raise SolverIterationError(f"relaxed_bound: {report.message}")
    if report.status == SolveStatus.INFEASIBLE:
        return infeasible_solution(instance, report.assignment, "relaxed_bound", report.message)

    energies, within_budget = energy_audit(report.assignment, report.allocation, instance)
    return Solution(
        assignment=report.assignment,
        allocation=report.allocation,
        objective=report.objective,
        node_energy=energies,
        feasible=within_budget,
        scheme="relaxed_bound",
        detail=f"kkt={report.kkt_residual:.2e}, newton_steps={report.iterations}",
    )
