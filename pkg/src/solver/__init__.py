"""
Convex machinery for the offloading problem: the perspective link-energy
function, a log-barrier interior-point solver and the fixed/relaxed programs.
"""

from .barrier import ConvexProgram, EnergyConstraint, PerspectiveTerm, ProgramSolution, SolveStatus, minimize_convex
from .convex_core import (
    ConvexSolveReport,
    fixed_assignment_margins,
    initial_times,
    solve_fixed,
    solve_relaxed,
    sufficient_feasibility,
)
from .perspective import perspective_eval
from .settings import BarrierSettings, SolverSettings

__all__ = [
    'BarrierSettings',
    'ConvexProgram',
    'ConvexSolveReport',
    'EnergyConstraint',
    'PerspectiveTerm',
    'ProgramSolution',
    'SolveStatus',
    'SolverSettings',
    'fixed_assignment_margins',
    'initial_times',
    'minimize_convex',
    'perspective_eval',
    'solve_fixed',
    'solve_relaxed',
    'sufficient_feasibility',
]
