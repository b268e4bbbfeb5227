"""
Parameter sweeps: every scheme on paired random instances along one axis.
"""

import csv
import logging
import math
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict

from ..core.errors import EnumerationLimitError, SolverIterationError
from ..schemes import SchemeLabel, SchemeSettings, run_scheme
from .scenario import ScenarioConfig, SweepAxis, apply_axis, generate_feasible_instance, reference_config

logger = logging.getLogger(__name__)

CSV_HEADER = ("scheme", "axis", "value", "seed", "objective_s", "feasible", "wall_ms")


class SweepRow(BaseModel):
    """One scheme on one (axis value, seed) instance."""

    model_config = ConfigDict(frozen=True)

    scheme: SchemeLabel
    axis: SweepAxis
    value: float
    seed: int
    objective_s: float
    feasible: bool
    wall_ms: float
    regenerations: int = 0
    detail: str = ""


def _run_cell(
    config: ScenarioConfig,
    reference: ScenarioConfig,
    axis: SweepAxis,
    value: float,
    seed: int,
    schemes: Sequence[SchemeLabel],
    settings: SchemeSettings,
    record_wall_time: bool,
) -> List[SweepRow]:
    cell = apply_axis(config, axis, value).model_copy(update={"seed": seed})
    instance, regenerations = generate_feasible_instance(cell, reference)

    rows = []
    for scheme in schemes:
        start = time.perf_counter()
        try:
            solution = run_scheme(scheme, instance, seed, settings)
            feasible = solution.feasible
            objective = solution.objective if feasible else math.inf
            detail = solution.detail
        except (SolverIterationError, EnumerationLimitError) as e:
            logger.warning(f"⚠️ {scheme.value} at {axis.value}={value}, seed {seed}: {e}")
            feasible, objective, detail = False, math.inf, str(e)
        elapsed = (time.perf_counter() - start) * 1000.0 if record_wall_time else 0.0
        rows.append(SweepRow(
            scheme=scheme,
            axis=axis,
            value=value,
            seed=seed,
            objective_s=objective,
            feasible=feasible,
            wall_ms=elapsed,
            regenerations=regenerations,
            detail=detail,
        ))
    return rows


def sweep(
    config: ScenarioConfig,
    axis: SweepAxis,
    values: Sequence[float],
    schemes: Sequence[SchemeLabel],
    seeds: Sequence[int],
    settings: Optional[SchemeSettings] = None,
    jobs: int = 1,
    record_wall_time: bool = True,
    on_cell_done: Optional[Callable[[int, int], None]] = None,
) -> List[SweepRow]:
    """
    Run every scheme at every (axis value, seed).

    Instances for one seed share their randomness across axis values and
    are screened against the reference configuration of the axis. Rows are
    ordered by (value, seed, scheme) whatever the number of workers.

    Args:
        config: Base scenario
        axis: Swept parameter
        values: Axis values
        schemes: Schemes to run
        seeds: Instance seeds
        settings: Scheme settings
        jobs: joblib workers; 1 runs in-process
        record_wall_time: False writes 0 ms so reruns give identical rows
        on_cell_done: Called with (cells done, total cells) in sequential runs

    Returns:
        One SweepRow per (value, seed, scheme)
    """
    if not values or not schemes or not seeds:
        raise ValueError("a sweep needs at least one value, one scheme and one seed")
    settings = settings or SchemeSettings()
    axis = SweepAxis(axis)
    schemes = [SchemeLabel(s) for s in schemes]
    reference = reference_config(config, axis, values)
    cells: List[Tuple[float, int]] = [(value, seed) for value in values for seed in seeds]
    logger.info(f"🧪 Sweep over {axis.value}: {len(values)} values x {len(seeds)} seeds x {len(schemes)} schemes")

    if jobs == 1:
        results = []
        for index, (value, seed) in enumerate(cells):
            results.append(_run_cell(config, reference, axis, value, seed, schemes, settings, record_wall_time))
            if on_cell_done:
                on_cell_done(index + 1, len(cells))
    else:
        results = Parallel(n_jobs=jobs)(
            delayed(_run_cell)(config, reference, axis, value, seed, schemes, settings, record_wall_time)
            for value, seed in cells
        )
    return [row for rows in results for row in rows]


def _format_value(axis: SweepAxis, value: float) -> str:
    return str(int(value)) if axis == SweepAxis.NUM_TASKS else repr(float(value))


def write_sweep_csv(rows: Sequence[SweepRow], path: str) -> str:
    """Write rows with the fixed header; infeasible objectives are written as inf."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([
                row.scheme.value,
                row.axis.value,
                _format_value(row.axis, row.value),
                row.seed,
                'inf' if math.isinf(row.objective_s) else repr(row.objective_s),
                'true' if row.feasible else 'false',
                f"{row.wall_ms:.3f}",
            ])
    return str(target)


def summarize(rows: Sequence[SweepRow]) -> Dict[Tuple[SchemeLabel, float], Dict[str, float]]:
    """
    Per (scheme, value): mean objective over feasible rows, feasibility
    rate, mean wall time and total regenerations.
    """
    groups: Dict[Tuple[SchemeLabel, float], List[SweepRow]] = {}
    for row in rows:
        groups.setdefault((row.scheme, row.value), []).append(row)

    summary = {}
    for key, group in groups.items():
        feasible = [row.objective_s for row in group if row.feasible]
        summary[key] = {
            'mean_objective': math.fsum(feasible) / len(feasible) if feasible else math.inf,
            'feasible_rate': len(feasible) / len(group),
            'mean_wall_ms': math.fsum(row.wall_ms for row in group) / len(group),
            'regenerations': sum(row.regenerations for row in group),
            'count': len(group),
        }
    return summary
