"""
Property checks run by the `verify` command on small seeded instances.
"""

import logging
import math
import time
from typing import Callable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..core.latency_engine import energy_audit, simulate_schedule
from ..core.model import Assignment, Instance, assignment_from_choices
from ..schemes import SchemeSettings, algorithm1, exhaustive, relaxed_bound, round_assignment
from ..solver import perspective_eval, solve_fixed
from .scenario import ScenarioConfig, generate_feasible_instance

logger = logging.getLogger(__name__)

RELATIVE_TOLERANCE = 1e-6


class CheckResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    passed: bool
    detail: str
    seconds: float


def _relative_gap(lower: float, upper: float) -> float:
    """How far `lower` exceeds `upper`, relative to upper; <= 0 when lower <= upper."""
    return (lower - upper) / max(abs(upper), 1e-300)


def grid_search_fixed(instance: Instance, choices: List[int], points: int = 400, stages: int = 3) -> float:
    """
    Latency of a one-helper, one-task instance by zooming grid search over (t_off, t_dl).

    Each stage evaluates a points x points grid and narrows both axes to the
    cells around the best feasible point. Only for an assignment that puts
    the task on the helper.
    """
    if instance.num_helpers != 1 or instance.num_tasks != 1 or choices != [0]:
        raise ValueError("grid search covers one task offloaded to the only helper")
    task = instance.tasks[0]
    helper, local = instance.helpers[0], instance.local
    channel = instance.channels[0]
    compute = helper.cycles_per_bit[0] * task.input_bits / helper.cpu_freq
    compute_energy = helper.kappa * helper.cycles_per_bit[0] * task.input_bits * helper.cpu_freq ** 2
    bandwidth = instance.bandwidth

    def energies(times: np.ndarray, bits: float, gain: float) -> np.ndarray:
        with np.errstate(over='ignore'):
            return times * np.expm1(math.log(2.0) * bits / (times * bandwidth)) / gain

    off_range = (1e-9, 1e3)
    dl_range = (1e-9, 1e3)
    best = math.inf
    for stage in range(stages):
        if stage == 0:
            off = np.geomspace(*off_range, points)
            dl = np.geomspace(*dl_range, points)
        else:
            off = np.linspace(*off_range, points)
            dl = np.linspace(*dl_range, points)
        off_ok = energies(off, task.input_bits, channel.uplink_gain) <= local.energy_budget
        dl_ok = compute_energy + energies(dl, task.output_bits, channel.downlink_gain) <= helper.energy_budget
        objective = (off + compute)[:, None] + dl[None, :]
        objective = np.where(off_ok[:, None] & dl_ok[None, :], objective, math.inf)
        i, j = np.unravel_index(np.argmin(objective), objective.shape)
        best = min(best, float(objective[i, j]))
        if not math.isfinite(best):
            return best
        off_range = (off[max(i - 1, 0)], off[min(i + 1, points - 1)])
        dl_range = (dl[max(j - 1, 0)], dl[min(j + 1, points - 1)])
    return best


def _check(name: str, body: Callable[[], Tuple[bool, str]]) -> CheckResult:
    start = time.perf_counter()
    try:
        passed, detail = body()
    except Exception as e:
        logger.exception(f"❌ Check {name} raised")
        passed, detail = False, f"{type(e).__name__}: {e}"
    return CheckResult(name=name, passed=passed, detail=detail, seconds=time.perf_counter() - start)


def run_verification(seed_count: int = 5, settings: Optional[SchemeSettings] = None) -> List[CheckResult]:
    """
    Run the property suite.

    Args:
        seed_count: Instances per instance-based check
        settings: Scheme settings

    Returns:
        One CheckResult per property
    """
    settings = settings or SchemeSettings()
    seeds = range(seed_count)
    rng = np.random.default_rng(20240601)

    def monotone_perspective() -> Tuple[bool, str]:
        failures = 0
        for _ in range(1000):
            y = rng.uniform(1.0, 1e5)
            t1, t2 = np.sort(rng.uniform(1e-4, 1.0, size=2))
            bandwidth = 10 ** rng.uniform(4, 6)
            if t1 == t2 or not perspective_eval(y, t2, bandwidth)[0] < perspective_eval(y, t1, bandwidth)[0]:
                failures += 1
        return failures == 0, f"{failures} of 1000 triples not decreasing"

    def derivatives() -> Tuple[bool, str]:
        worst = 0.0
        for _ in range(100):
            bandwidth = 10 ** rng.uniform(4, 6)
            y = rng.uniform(1.0, 1e4)
            t = y * math.log(2.0) / bandwidth * rng.uniform(0.2, 5.0)
            _, gradient, hessian = perspective_eval(y, t, bandwidth)
            hy, ht = 1e-6 * y, 1e-6 * t
            numeric = np.array([
                (perspective_eval(y + hy, t, bandwidth)[0] - perspective_eval(y - hy, t, bandwidth)[0]) / (2 * hy),
                (perspective_eval(y, t + ht, bandwidth)[0] - perspective_eval(y, t - ht, bandwidth)[0]) / (2 * ht),
            ])
            numeric_hessian = np.array([
                (perspective_eval(y + hy, t, bandwidth)[1] - perspective_eval(y - hy, t, bandwidth)[1]) / (2 * hy),
                (perspective_eval(y, t + ht, bandwidth)[1] - perspective_eval(y, t - ht, bandwidth)[1]) / (2 * ht),
            ])
            worst = max(
                worst,
                float(np.max(np.abs(numeric - gradient) / np.maximum(np.abs(gradient), 1e-12))),
                float(np.max(np.abs(numeric_hessian - hessian)) / max(np.max(np.abs(hessian)), 1e-300)),
            )
        return worst <= 1e-5, f"largest relative error {worst:.2e}"

    def convexity() -> Tuple[bool, str]:
        worst = -math.inf
        for _ in range(1000):
            bandwidth = 10 ** rng.uniform(4, 6)
            gain = 10 ** rng.uniform(0, 4)
            a = math.log(2.0) / bandwidth
            points = []
            for _ in range(2):
                y = rng.uniform(0.0, 1e4)
                points.append((y, a * max(y, 1.0) * rng.uniform(0.05, 5.0)))
            middle = tuple((p + q) / 2 for p, q in zip(*points))
            values = [perspective_eval(y, t, bandwidth)[0] / gain for y, t in points]
            mid_value = perspective_eval(*middle, bandwidth)[0] / gain
            chord = sum(values) / 2
            worst = max(worst, (mid_value - chord) / max(chord, 1e-300))
        return worst <= 1e-9, f"largest relative midpoint excess {worst:.2e}"

    def grid_oracle() -> Tuple[bool, str]:
        worst = 0.0
        for seed in seeds:
            instance, _ = generate_feasible_instance(ScenarioConfig(num_helpers=1, num_tasks=1, seed=seed))
            report = solve_fixed(instance, assignment_from_choices([0], 2), settings.solver)
            grid = grid_search_fixed(instance, [0])
            if math.isinf(grid) and math.isinf(report.objective):
                continue
            worst = max(worst, abs(report.objective - grid) / grid)
        return worst <= 1e-4, f"largest relative difference to the grid {worst:.2e}"

    def sandwich() -> Tuple[bool, str]:
        problems = []
        for seed in seeds:
            instance, _ = generate_feasible_instance(ScenarioConfig(num_helpers=2, num_tasks=3, seed=seed))
            bound = relaxed_bound(instance, settings).objective
            best = exhaustive(instance, settings=settings)
            proposed = algorithm1(instance, settings)
            if _relative_gap(bound, best.objective) > RELATIVE_TOLERANCE:
                problems.append(f"seed {seed}: relaxed {bound:.9g} > exhaustive {best.objective:.9g}")
            if _relative_gap(best.objective, proposed.objective) > RELATIVE_TOLERANCE:
                problems.append(f"seed {seed}: exhaustive {best.objective:.9g} > proposed {proposed.objective:.9g}")
            for solution in (best, proposed):
                simulated = simulate_schedule(solution.assignment, solution.allocation, instance).total_latency
                if abs(simulated - solution.objective) > RELATIVE_TOLERANCE * solution.objective:
                    problems.append(f"seed {seed}: {solution.scheme} simulates to {simulated:.9g}")
                if not energy_audit(solution.assignment, solution.allocation, instance)[1]:
                    problems.append(f"seed {seed}: {solution.scheme} exceeds a budget")
        return not problems, "; ".join(problems) or f"{seed_count} instances ordered and consistent"

    def monotone_budget() -> Tuple[bool, str]:
        problems = []
        budgets = (-20.0, -15.0, -10.0, -5.0)
        for seed in seeds:
            reference = ScenarioConfig(num_helpers=2, num_tasks=3, seed=seed, energy_budget_db=budgets[0])
            previous = {}
            for budget in budgets:
                instance, _ = generate_feasible_instance(
                    reference.model_copy(update={"energy_budget_db": budget}), reference
                )
                for name, objective in (
                    ("relaxed_bound", relaxed_bound(instance, settings).objective),
                    ("exhaustive", exhaustive(instance, settings=settings).objective),
                    ("proposed", algorithm1(instance, settings).objective),
                ):
                    if name in previous and _relative_gap(objective, previous[name]) > RELATIVE_TOLERANCE:
                        problems.append(f"seed {seed}: {name} rose to {objective:.9g} at {budget} dB")
                    previous[name] = objective
        return not problems, "; ".join(problems) or "bound, optimum and proposed never rise with the budget"

    def determinism() -> Tuple[bool, str]:
        tie = Assignment.from_array(np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5]]))
        if round_assignment(tie).choices() != [0, 1]:
            return False, f"ties rounded to {round_assignment(tie).choices()}, expected [0, 1]"
        instance, _ = generate_feasible_instance(ScenarioConfig(num_helpers=2, num_tasks=3, seed=0))
        first = algorithm1(instance, settings).model_dump_json()
        second = algorithm1(instance, settings).model_dump_json()
        return first == second, "repeated runs identical" if first == second else "repeated runs differ"

    checks = [
        ("perspective decreasing in t", monotone_perspective),
        ("perspective derivatives", derivatives),
        ("energy midpoint convexity", convexity),
        ("fixed solver vs grid", grid_oracle),
        ("relaxed <= exhaustive <= proposed", sandwich),
        ("latency monotone in budget", monotone_budget),
        ("determinism", determinism),
    ]
    results = []
    for name, body in checks:
        result = _check(name, body)
        logger.info(f"{'✅' if result.passed else '❌'} {name}: {result.detail}")
        results.append(result)
    return results
