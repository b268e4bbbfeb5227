"""
The merged-recursion latency program, for a fixed binary assignment and for
its continuous relaxation.

Variables are scaled before solving: times by the time the whole input takes
at unit spectral efficiency (total input bits / (B*ln2)), energies by the
largest budget.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..core.model import (
    Assignment,
    AssignmentKind,
    Instance,
    ResourceAllocation,
    assigned_bits,
    check_dimensions,
)
from .barrier import ConvexProgram, EnergyConstraint, PerspectiveTerm, SolveStatus, minimize_convex
from .perspective import energy_limit, headroom_exponent
from .settings import SolverSettings

logger = logging.getLogger(__name__)


class ConvexSolveReport(BaseModel):
    """Outcome of solving the latency program."""

    model_config = ConfigDict(frozen=True)

    allocation: ResourceAllocation
    assignment: Assignment
    objective: float
    kkt_residual: float
    iterations: int
    status: SolveStatus
    message: str = ""
    phase_one_steps: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == SolveStatus.OPTIMAL


@dataclass(frozen=True)
class _Scaling:
    time: float
    energy: float
    bandwidth: float

    def load(self, bits) -> np.ndarray:
        """Bits expressed as scaled perspective loads ln2*bits/(B*time)."""
        return np.asarray(bits, dtype=float) * math.log(2.0) / (self.bandwidth * self.time)

    def link_coef(self, gains) -> np.ndarray:
        return self.time / (np.asarray(gains, dtype=float) * self.energy)


def _scaling(instance: Instance) -> _Scaling:
    per_bit = instance.bandwidth * math.log(2.0)
    total = float(instance.input_bits().sum()) or float(instance.output_bits().sum()) or 1.0
    return _Scaling(time=total / per_bit, energy=float(instance.energy_budgets().max()), bandwidth=instance.bandwidth)


class _Rows:
    """Accumulates linear inequality rows a.x <= b."""

    def __init__(self, size: int):
        self.size = size
        self.matrix: List[np.ndarray] = []
        self.bound: List[float] = []

    def add(self, coefficients: Dict[int, float], bound: float) -> None:
        row = np.zeros(self.size)
        for index, value in coefficients.items():
            row[index] += value
        self.matrix.append(row)
        self.bound.append(bound)

    def arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.array(self.matrix).reshape(-1, self.size), np.array(self.bound, dtype=float)


def _vector(size: int, coefficients: Dict[int, float]) -> np.ndarray:
    vector = np.zeros(size)
    for index, value in coefficients.items():
        vector[index] += value
    return vector


def sufficient_feasibility(instance: Instance) -> Tuple[bool, float, np.ndarray]:
    """
    Budget check that makes every binary assignment feasible.

    Each node must afford computing every task itself plus all the
    communication it could ever be asked for, at the t->inf energy limit.

    Returns:
        (ok, local margin in J, helper margins in J)
    """
    num_helpers = instance.num_helpers
    compute = instance.compute_joules()
    total_in = float(instance.input_bits().sum())
    total_out = float(instance.output_bits().sum())
    uplink = instance.uplink_gains()
    downlink = instance.downlink_gains()

    local_need = math.fsum(compute[:, num_helpers]) + math.fsum(
        energy_limit(total_in, uplink[k], instance.bandwidth) for k in range(num_helpers)
    )
    helper_need = np.array([
        math.fsum(compute[:, k]) + energy_limit(total_out, downlink[k], instance.bandwidth)
        for k in range(num_helpers)
    ])
    local_margin = instance.local.energy_budget - local_need
    helper_margins = instance.energy_budgets()[:num_helpers] - helper_need
    return bool(local_margin > 0 and np.all(helper_margins > 0)), float(local_margin), helper_margins


def fixed_assignment_margins(instance: Instance, assignment: Assignment) -> np.ndarray:
    """
    Budget minus (compute energy + t->inf communication energy) per node.

    The latency program for this assignment has a strictly feasible point
    exactly when every margin is positive.

    Returns:
        Length K+1 array, local node last
    """
    check_dimensions(assignment, instance)
    bits_in, bits_out = assigned_bits(assignment, instance)
    compute = (instance.compute_joules() * assignment.array).sum(axis=0)
    uplink = instance.uplink_gains()
    downlink = instance.downlink_gains()
    need = compute.copy()
    for k in range(instance.num_helpers):
        need[k] += energy_limit(bits_out[k], downlink[k], instance.bandwidth)
        need[instance.local_index] += energy_limit(bits_in[k], uplink[k], instance.bandwidth)
    return instance.energy_budgets() - need


def initial_times(
    loads: np.ndarray, coefs: np.ndarray, available: float, floor: float, headroom: float = 0.1
) -> np.ndarray:
    """
    Slot lengths whose total link energy stays strictly below `available`.

    All links sharing one budget get the same headroom over their t->inf
    limit: min(headroom, half the spare budget). Empty links get 2*floor.

    Args:
        loads: Scaled perspective loads per link
        coefs: Scaled energy coefficient per link
        available: Budget left after computation, scaled
        floor: Lower bound on every time variable
        headroom: Largest relative excess over the t->inf limit
    """
    loads = np.asarray(loads, dtype=float)
    limits = np.asarray(coefs, dtype=float) * loads
    total = float(limits.sum())
    eta = headroom
    if total > 0 and available > total:
        eta = min(headroom, 0.5 * (available / total - 1.0))
    exponent = headroom_exponent(eta)
    times = np.where(loads > 0, loads / exponent, 0.0)
    return np.maximum(times, 2.0 * floor)


def _infeasible_report(
    assignment: Assignment,
    num_helpers: int,
    message: str,
    iterations: int = 0,
    status: SolveStatus = SolveStatus.INFEASIBLE,
) -> ConvexSolveReport:
    return ConvexSolveReport(
        allocation=ResourceAllocation.zeros(num_helpers),
        assignment=assignment,
        objective=math.inf,
        kkt_residual=math.inf,
        iterations=iterations,
        status=status,
        message=message,
    )


def _describe_shortfall(margins: np.ndarray, local_index: int) -> str:
    short = [
        f"{'local' if k == local_index else f'helper {k}'} short by {-margin:.3g} J"
        for k, margin in enumerate(margins) if margin <= 0
    ]
    return "no strictly feasible allocation: " + ", ".join(short)


def solve_fixed(
    instance: Instance, assignment: Assignment, settings: Optional[SolverSettings] = None
) -> ConvexSolveReport:
    """
    Optimal slot lengths for a fixed binary assignment.

    Minimizes i1 + sum(t_dl) subject to the first-waiting-time constraints,
    the local deadline, each helper's compute deadline and the energy
    budgets. Helpers without input bits have t_off pinned to 0; helpers
    without output bits have t_dl pinned to 0.

    Args:
        instance: Problem data
        assignment: Binary assignment
        settings: Solver settings

    Returns:
        ConvexSolveReport; status infeasible carries the node shortfalls
    """
    settings = settings or SolverSettings()
    check_dimensions(assignment, instance)
    if not assignment.is_binary:
        raise ValueError("solve_fixed needs a binary assignment")

    num_helpers = instance.num_helpers
    local = instance.local_index
    margins = fixed_assignment_margins(instance, assignment)
    if np.any(margins <= 0):
        message = _describe_shortfall(margins, local)
        logger.debug(f"❌ {message}")
        return _infeasible_report(assignment, num_helpers, message)

    pi = assignment.array
    bits_in, bits_out = assigned_bits(assignment, instance)
    seconds = (instance.compute_seconds() * pi).sum(axis=0)
    receivers = [k for k in range(num_helpers) if bits_in[k] > 0]
    returners = [k for k in range(num_helpers) if bits_out[k] > 0]

    if not receivers and not returners:
        i1 = float(max(seconds[local], seconds[0]))
        return ConvexSolveReport(
            allocation=ResourceAllocation(t_off=(0.0,) * num_helpers, t_dl=(0.0,) * num_helpers, i1=i1),
            assignment=assignment,
            objective=i1,
            kkt_residual=0.0,
            iterations=0,
            status=SolveStatus.OPTIMAL,
        )

    scale = _scaling(instance)
    compute = seconds / scale.time
    energy = (instance.compute_joules() * pi).sum(axis=0) / scale.energy
    budgets = instance.energy_budgets() / scale.energy
    floor = settings.time_floor_s / scale.time
    load_in = scale.load(bits_in)
    load_out = scale.load(bits_out)
    coef_up = scale.link_coef(instance.uplink_gains())
    coef_dl = scale.link_coef(instance.downlink_gains())

    off = {k: i for i, k in enumerate(receivers)}
    dl = {k: len(receivers) + i for i, k in enumerate(returners)}
    i1 = len(receivers) + len(returners)
    size = i1 + 1

    rows = _Rows(size)
    rows.add({**{off[k]: 1.0 for k in receivers}, i1: -1.0}, 0.0)
    rows.add({**({off[0]: 1.0} if 0 in off else {}), i1: -1.0}, -compute[0])
    rows.add({i1: -1.0, **{dl[k]: -1.0 for k in returners}}, -compute[local])
    for k in receivers:
        if k == 0:
            continue
        coefficients = {off[j]: 1.0 for j in receivers if j <= k}
        coefficients.update({dl[j]: -1.0 for j in returners if j < k})
        coefficients[i1] = -1.0
        rows.add(coefficients, -compute[k])
    for index in list(off.values()) + list(dl.values()):
        rows.add({index: -1.0}, -floor)

    zeros = np.zeros(size)
    constraints = []
    if receivers:
        constraints.append(EnergyConstraint(
            linear=zeros,
            constant=energy[local] - budgets[local],
            terms=[PerspectiveTerm(coef_up[k], zeros, load_in[k], off[k]) for k in receivers],
            label="local",
        ))
    for k in returners:
        constraints.append(EnergyConstraint(
            linear=zeros,
            constant=energy[k] - budgets[k],
            terms=[PerspectiveTerm(coef_dl[k], zeros, load_out[k], dl[k])],
            label=f"helper {k}",
        ))

    matrix, bound = rows.arrays()
    program = ConvexProgram(
        objective=_vector(size, {i1: 1.0, **{dl[k]: 1.0 for k in returners}}),
        linear_matrix=matrix,
        linear_bound=bound,
        energy=constraints,
    )

    x0 = np.zeros(size)
    start_off = initial_times(
        load_in[receivers], coef_up[receivers], budgets[local] - energy[local], floor, settings.initial_headroom
    )
    for j, k in enumerate(receivers):
        x0[off[k]] = start_off[j]
    for k in returners:
        x0[dl[k]] = initial_times(
            load_out[[k]], coef_dl[[k]], budgets[k] - energy[k], floor, settings.initial_headroom
        )[0]
    x0[i1] = 2.0 * (start_off.sum() + compute[:local].max() + compute[local]) + 1.0

    result = minimize_convex(program, x0, settings.barrier)
    if not np.all(np.isfinite(result.x)):
        return _infeasible_report(assignment, num_helpers, result.message, result.iterations, result.status)

    t_off = [0.0] * num_helpers
    t_dl = [0.0] * num_helpers
    for k in receivers:
        t_off[k] = float(result.x[off[k]]) * scale.time
    for k in returners:
        t_dl[k] = float(result.x[dl[k]]) * scale.time
    allocation = ResourceAllocation(t_off=tuple(t_off), t_dl=tuple(t_dl), i1=float(result.x[i1]) * scale.time)

    logger.debug(
        f"📐 Fixed assignment {assignment.choices()}: objective={allocation.objective:.6g}s "
        f"({result.status.value}, {result.iterations} Newton steps)"
    )
    return ConvexSolveReport(
        allocation=allocation,
        assignment=assignment,
        objective=allocation.objective,
        kkt_residual=result.kkt_residual,
        iterations=result.iterations,
        status=result.status,
        message=result.message,
        phase_one_steps=result.phase_one_steps,
    )


def solve_relaxed(instance: Instance, settings: Optional[SolverSettings] = None) -> ConvexSolveReport:
    """
    Jointly optimize a fractional assignment and the slot lengths.

    Each assignment row is parameterized by its K helper entries, the local
    share being 1 - sum. Loads, compute times and compute energies are
    linear in the assignment. The optimum is a lower bound on every binary
    assignment's latency.

    Args:
        instance: Problem data
        settings: Solver settings

    Returns:
        ConvexSolveReport with the optimized fractional assignment
    """
    settings = settings or SolverSettings()
    num_tasks = instance.num_tasks
    num_helpers = instance.num_helpers
    local = instance.local_index
    scale = _scaling(instance)

    compute = instance.compute_seconds() / scale.time
    energy = instance.compute_joules() / scale.energy
    budgets = instance.energy_budgets() / scale.energy
    floor = settings.time_floor_s / scale.time
    task_in = scale.load(instance.input_bits())
    task_out = scale.load(instance.output_bits())
    coef_up = scale.link_coef(instance.uplink_gains())
    coef_dl = scale.link_coef(instance.downlink_gains())

    def share(l: int, k: int) -> int:
        return l * num_helpers + k

    def off(k: int) -> int:
        return num_tasks * num_helpers + k

    def dl(k: int) -> int:
        return num_tasks * num_helpers + num_helpers + k

    i1 = num_tasks * num_helpers + 2 * num_helpers
    size = i1 + 1
    tasks = range(num_tasks)
    helpers = range(num_helpers)

    rows = _Rows(size)
    for l in tasks:
        for k in helpers:
            rows.add({share(l, k): -1.0}, 0.0)
        rows.add({share(l, k): 1.0 for k in helpers}, 1.0)
    rows.add({**{off(k): 1.0 for k in helpers}, i1: -1.0}, 0.0)
    rows.add({off(0): 1.0, **{share(l, 0): compute[l, 0] for l in tasks}, i1: -1.0}, 0.0)
    rows.add(
        {**{share(l, k): -compute[l, local] for l in tasks for k in helpers}, i1: -1.0, **{dl(k): -1.0 for k in helpers}},
        -float(compute[:, local].sum()),
    )
    for k in range(1, num_helpers):
        coefficients = {off(j): 1.0 for j in range(k + 1)}
        coefficients.update({share(l, k): compute[l, k] for l in tasks})
        coefficients.update({dl(j): -1.0 for j in range(k)})
        coefficients[i1] = -1.0
        rows.add(coefficients, 0.0)
    for k in helpers:
        rows.add({off(k): -1.0}, -floor)
        rows.add({dl(k): -1.0}, -floor)

    constraints = [EnergyConstraint(
        linear=_vector(size, {share(l, k): -energy[l, local] for l in tasks for k in helpers}),
        constant=float(energy[:, local].sum()) - budgets[local],
        terms=[
            PerspectiveTerm(coef_up[k], _vector(size, {share(l, k): task_in[l] for l in tasks}), 0.0, off(k))
            for k in helpers
        ],
        label="local",
    )]
    for k in helpers:
        constraints.append(EnergyConstraint(
            linear=_vector(size, {share(l, k): energy[l, k] for l in tasks}),
            constant=-budgets[k],
            terms=[PerspectiveTerm(coef_dl[k], _vector(size, {share(l, k): task_out[l] for l in tasks}), 0.0, dl(k))],
            label=f"helper {k}",
        ))

    matrix, bound = rows.arrays()
    program = ConvexProgram(
        objective=_vector(size, {i1: 1.0, **{dl(k): 1.0 for k in helpers}}),
        linear_matrix=matrix,
        linear_bound=bound,
        energy=constraints,
    )

    uniform = 1.0 / (num_helpers + 1)
    x0 = np.zeros(size)
    x0[:num_tasks * num_helpers] = uniform
    load_in = uniform * task_in.sum() * np.ones(num_helpers)
    load_out = uniform * task_out.sum() * np.ones(num_helpers)
    node_energy = uniform * energy.sum(axis=0)
    node_time = uniform * compute.sum(axis=0)
    start_off = initial_times(load_in, coef_up, budgets[local] - node_energy[local], floor, settings.initial_headroom)
    for k in helpers:
        x0[off(k)] = start_off[k]
        x0[dl(k)] = initial_times(
            load_out[[k]], coef_dl[[k]], budgets[k] - node_energy[k], floor, settings.initial_headroom
        )[0]
    x0[i1] = 2.0 * (start_off.sum() + node_time[:local].max() + node_time[local]) + 1.0

    result = minimize_convex(program, x0, settings.barrier)
    fallback = Assignment.from_array(np.full((num_tasks, num_helpers + 1), uniform))
    if not np.all(np.isfinite(result.x)):
        return _infeasible_report(fallback, num_helpers, result.message, result.iterations, result.status)

    helper_share = np.clip(result.x[:num_tasks * num_helpers].reshape(num_tasks, num_helpers), 0.0, 1.0)
    totals = helper_share.sum(axis=1)
    over = totals > 1.0
    helper_share[over] /= totals[over][:, None]
    matrix = np.hstack([helper_share, (1.0 - helper_share.sum(axis=1))[:, None]])
    matrix[:, local] = np.clip(matrix[:, local], 0.0, 1.0)
    assignment = Assignment.from_array(matrix, AssignmentKind.FRACTIONAL)

    bits_in, bits_out = assigned_bits(assignment, instance)
    t_off = [
        0.0 if bits_in[k] < settings.load_snap_bits else float(result.x[off(k)]) * scale.time for k in helpers
    ]
    t_dl = [
        0.0 if bits_out[k] < settings.load_snap_bits else float(result.x[dl(k)]) * scale.time for k in helpers
    ]
    allocation = ResourceAllocation(t_off=tuple(t_off), t_dl=tuple(t_dl), i1=float(result.x[i1]) * scale.time)

    logger.debug(
        f"📐 Relaxed program: objective={allocation.objective:.6g}s "
        f"({result.status.value}, {result.iterations} Newton steps)"
    )
    return ConvexSolveReport(
        allocation=allocation,
        assignment=assignment,
        objective=allocation.objective,
        kkt_residual=result.kkt_residual,
        iterations=result.iterations,
        status=result.status,
        message=result.message,
        phase_one_steps=result.phase_one_steps,
    )
