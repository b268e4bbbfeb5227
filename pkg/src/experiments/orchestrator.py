"""
Experiment orchestrator: the commands behind the CLI.
"""

import json
import logging
import math
import time
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import yaml
from pydantic import BaseModel, ValidationError

from ..console import (
    console, create_progress, create_table, print_check_tree, print_error,
    print_file_saved, print_header, print_info, print_success, print_warning,
)
from ..core.errors import EnumerationLimitError, InstanceValidationError, SolverIterationError
from ..core.latency_engine import simulate_schedule
from ..core.model import Instance, Solution, load_instance, save_instance
from ..schemes import SchemeLabel, SchemeSettings, run_scheme
from .file_manager import FileManager
from .report_generator import SweepReportGenerator
from .scenario import (
    ScenarioConfig, SweepAxis, generate_feasible_instance, load_scenario_config, scenario_from_settings,
)
from .sweep_runner import summarize, sweep, write_sweep_csv
from .verification import run_verification

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID_INPUT = 2
EXIT_MAX_ITER = 3

# Used only when the settings file has no `presets` section
DEFAULT_PRESETS: Dict[str, Dict[str, Any]] = {
    'fig2': {
        'axis': 'energy_db',
        'values': [-20.0, -17.5, -15.0, -12.5, -10.0, -7.5, -5.0],
        'overrides': {'num_helpers': 5, 'num_tasks': 10},
    },
    'fig3': {
        'axis': 'helper_freq',
        'values': [0.5e9, 1.0e9, 1.5e9, 2.0e9, 2.5e9, 3.0e9],
        'overrides': {'num_helpers': 5, 'num_tasks': 6, 'local_freq_hz': 1e9},
    },
    'fig4': {
        'axis': 'num_tasks',
        'values': [2, 4, 6, 8, 10],
        'overrides': {'num_helpers': 4, 'energy_budget_db': -10.0},
    },
}

DEFAULT_SWEEP_SCHEMES = (
    SchemeLabel.PROPOSED,
    SchemeLabel.HEURISTIC1,
    SchemeLabel.HEURISTIC2,
    SchemeLabel.RANDOM_SELECTION,
    SchemeLabel.LOCAL_EXECUTION,
)


class CommandResult(BaseModel):
    """Exit code plus the machine-readable result of one command."""

    exit_code: int
    payload: Dict[str, Any] = {}


def parse_seeds(text: str) -> List[int]:
    """'A..B' (inclusive) or a comma list into seeds."""
    text = str(text).strip()
    if '..' in text:
        start, end = (int(part) for part in text.split('..', 1))
        if end < start:
            raise ValueError(f"empty seed range {text}")
        return list(range(start, end + 1))
    return [int(part) for part in text.split(',') if part.strip()]


def parse_values(text: str) -> List[float]:
    values = [float(part) for part in str(text).split(',') if part.strip()]
    if not values:
        raise ValueError("no axis values given")
    return values


def json_safe(value: Any) -> Any:
    """Non-finite floats become None so documents are strict JSON."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {key: json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(item) for item in value]
    return value


def solution_document(solution: Solution, instance: Instance) -> Dict[str, Any]:
    """JSON document of a solution, with the simulated schedule of feasible binary solutions."""
    schedule = None
    if solution.feasible and solution.assignment.is_binary:
        schedule = simulate_schedule(solution.assignment, solution.allocation, instance).model_dump()
    return json_safe({
        'scheme': solution.scheme,
        'feasible': solution.feasible,
        'detail': solution.detail,
        'objective': solution.objective,
        'assignment': solution.assignment.array.tolist(),
        'choices': solution.assignment.choices() if solution.assignment.is_binary else None,
        't_off': list(solution.allocation.t_off),
        't_dl': list(solution.allocation.t_dl),
        'i1': solution.allocation.i1,
        'node_energy': list(solution.node_energy),
        'energy_budgets': [node.energy_budget for node in instance.nodes],
        'schedule': schedule,
    })


def _validation_messages(error: ValidationError, prefix: str) -> List[str]:
    return [f"{prefix}{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in error.errors()]


class ExperimentOrchestrator:
    """Loads settings and runs the solve, sweep, compare, verify and generate commands."""

    def __init__(self, config_path: str = 'config.yaml'):
        """
        Initialize the ExperimentOrchestrator.

        Args:
            config_path: Path to the YAML settings file

        Raises:
            InstanceValidationError: A settings section does not validate
        """
        self.config = self._load_config(config_path) or {}
        try:
            self.settings = SchemeSettings.from_config(self.config)
        except ValidationError as e:
            raise InstanceValidationError(_validation_messages(e, "settings: ")) from e
        self.file_manager = FileManager(self.config.get('output', {}))

    def _load_config(self, config_path: str) -> Dict[str, Any]:
        """
        Load configuration from YAML file.

        Args:
            config_path: Path to configuration file

        Returns:
            Configuration dictionary
        """
        try:
            with open(config_path, 'r', encoding='utf-8') as f:
                return yaml.safe_load(f) or {}
        except FileNotFoundError:
            logger.warning(f"⚠️ Configuration file not found: {config_path}, using defaults")
            return {}
        except yaml.YAMLError as e:
            logger.warning(f"⚠️ Error parsing configuration file: {e}, using defaults")
            return {}

    def _scenario(self, scenario_path: Optional[str] = None) -> ScenarioConfig:
        if scenario_path:
            return load_scenario_config(scenario_path)
        return scenario_from_settings(self.config.get('scenario'))

    def _preset(self, name: str) -> Dict[str, Any]:
        presets = self.config.get('presets')
        if presets is None:
            logger.debug("No presets in the settings, using the built-in figure presets")
            presets = DEFAULT_PRESETS
        if name not in presets:
            raise ValueError(f"unknown preset {name!r}; choose from {', '.join(sorted(presets))}")
        return presets[name]

    def _invalid(self, error: Exception) -> CommandResult:
        if isinstance(error, InstanceValidationError):
            print_error("Invalid input:")
            for violation in error.violations:
                print_error(f"  {violation}")
        else:
            print_error(f"Invalid input: {error}")
        return CommandResult(exit_code=EXIT_INVALID_INPUT, payload={'error': str(error)})

    def cmd_solve(
        self,
        instance_path: str,
        scheme: str = SchemeLabel.PROPOSED.value,
        seed: int = 0,
        output_path: Optional[str] = None,
    ) -> CommandResult:
        """
        Run one scheme on an instance file and write the solution document.

        Returns:
            CommandResult with the document as payload; exit 2 for bad input
            or an oversized enumeration, 3 when the solver runs out of steps
        """
        try:
            label = SchemeLabel(scheme)
            instance = load_instance(instance_path)
            solution = run_scheme(label, instance, seed, self.settings)
        except (InstanceValidationError, EnumerationLimitError, ValueError, OSError) as e:
            return self._invalid(e)
        except SolverIterationError as e:
            print_error(f"Solver did not converge: {e}")
            return CommandResult(exit_code=EXIT_MAX_ITER, payload={'error': str(e)})

        document = solution_document(solution, instance)
        target = Path(output_path) if output_path else self.file_manager.solution_path(
            f"{label.value}_{Path(instance_path).stem}"
        )
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(json.dumps(document, indent=2), encoding='utf-8')

        objective = f"{solution.objective:.6g} s" if solution.feasible else "infeasible"
        print_success(f"{label.value}: {objective} (K={instance.num_helpers}, L={instance.num_tasks})")
        print_file_saved(str(target), "json")
        return CommandResult(exit_code=EXIT_OK, payload=document)

    def cmd_sweep(
        self,
        axis: Optional[str] = None,
        values: Optional[Sequence[float]] = None,
        schemes: Optional[Sequence[str]] = None,
        seeds: Optional[Sequence[int]] = None,
        preset: Optional[str] = None,
        scenario_path: Optional[str] = None,
        jobs: Optional[int] = None,
        output_csv: Optional[str] = None,
        record_wall_time: Optional[bool] = None,
    ) -> CommandResult:
        """
        Sweep schemes along an axis and write the CSV plus a Markdown report.

        Flags win over the preset, the preset over config.yaml.
        """
        sweep_config = self.config.get('sweep', {}) or {}
        try:
            base = self._scenario(scenario_path)
            if preset:
                chosen = self._preset(preset)
                base = ScenarioConfig.model_validate({**base.model_dump(), **(chosen.get('overrides') or {})})
                axis = axis or chosen['axis']
                values = values or chosen['values']
            if not axis or not values:
                raise ValueError("a sweep needs --axis and --values, or --preset")
            axis = SweepAxis(axis)
            schemes = [SchemeLabel(s) for s in (schemes or sweep_config.get('schemes') or DEFAULT_SWEEP_SCHEMES)]
            if seeds is None:
                configured = sweep_config.get('seeds', '0..19')
                seeds = list(configured) if isinstance(configured, list) else parse_seeds(configured)
            seeds = [int(s) for s in seeds]
        except ValidationError as e:
            return self._invalid(InstanceValidationError(_validation_messages(e, "scenario: ")))
        except (InstanceValidationError, ValueError, OSError) as e:
            return self._invalid(e)

        jobs = jobs or sweep_config.get('jobs', 1)
        if record_wall_time is None:
            record_wall_time = sweep_config.get('record_wall_time', True)

        print_header(f"Sweep over {axis.value}")
        start_time = datetime.now()
        try:
            if jobs == 1:
                with create_progress() as progress:
                    task = progress.add_task("Sweeping", total=len(values) * len(seeds))
                    rows = sweep(
                        base, axis, values, schemes, seeds, self.settings, jobs, record_wall_time,
                        on_cell_done=lambda done, total: progress.update(task, completed=done),
                    )
            else:
                rows = sweep(base, axis, values, schemes, seeds, self.settings, jobs, record_wall_time)
        except (InstanceValidationError, ValueError) as e:
            return self._invalid(e)
        end_time = datetime.now()

        csv_path = write_sweep_csv(rows, output_csv or str(self.file_manager.sweep_path(axis.value)))
        print_file_saved(csv_path, "csv")
        report = SweepReportGenerator(str(self.file_manager.report_path())).generate_report(
            rows, {'settings': self.config, 'scenario': base.model_dump()}, start_time, end_time, csv_path
        )

        summary = summarize(rows)
        table = create_table(f"Mean latency (s) by {axis.value}")
        table.add_column("Scheme", style="cyan")
        for value in values:
            table.add_column(f"{value:g}", justify="right")
        for scheme in schemes:
            cells = []
            for value in values:
                entry = summary[(scheme, float(value))]
                mean = entry['mean_objective']
                cell = "inf" if math.isinf(mean) else f"{mean:.4g}"
                if entry['feasible_rate'] < 1.0:
                    cell += f" [dim]({entry['feasible_rate']:.0%})[/dim]"
                cells.append(cell)
            table.add_row(scheme.value, *cells)
        console.print(table)

        print_success(f"Sweep finished: {len(rows)} rows")
        return CommandResult(exit_code=EXIT_OK, payload={'csv': csv_path, 'report': report, 'rows': len(rows)})

    def cmd_compare(
        self,
        instance_path: Optional[str] = None,
        seed: int = 0,
        schemes: Optional[Sequence[str]] = None,
        scenario_path: Optional[str] = None,
    ) -> CommandResult:
        """
        Run several schemes on one instance and rank them against the relaxed bound.

        The instance is read from instance_path, or generated from the
        scenario settings with the given seed.
        """
        try:
            if instance_path:
                instance = load_instance(instance_path)
            else:
                config = self._scenario(scenario_path).model_copy(update={'seed': seed})
                instance, _ = generate_feasible_instance(config)
            labels = [SchemeLabel(s) for s in (schemes or [label.value for label in SchemeLabel])]
        except (InstanceValidationError, ValueError, OSError) as e:
            return self._invalid(e)

        try:
            bound = run_scheme(SchemeLabel.RELAXED_BOUND, instance, seed, self.settings).objective
        except SolverIterationError as e:
            print_warning(f"No relaxed bound: {e}")
            bound = math.inf
        entries = []
        for label in labels:
            start = time.perf_counter()
            try:
                solution = run_scheme(label, instance, seed, self.settings)
                objective, feasible, detail = solution.objective, solution.feasible, solution.detail
            except (SolverIterationError, EnumerationLimitError) as e:
                objective, feasible, detail = math.inf, False, str(e)
            entries.append({
                'scheme': label.value,
                'objective': objective if feasible else math.inf,
                'feasible': feasible,
                'gap': (objective - bound) / bound if feasible and math.isfinite(bound) and bound > 0 else math.inf,
                'wall_ms': (time.perf_counter() - start) * 1000.0,
                'detail': detail,
            })
        entries.sort(key=lambda entry: entry['objective'])

        table = create_table(f"Schemes on K={instance.num_helpers}, L={instance.num_tasks}")
        table.add_column("#", justify="right")
        table.add_column("Scheme", style="cyan")
        table.add_column("Latency (s)", justify="right")
        table.add_column("Gap to bound", justify="right")
        table.add_column("Wall (ms)", justify="right", style="dim")
        for rank, entry in enumerate(entries, start=1):
            latency = f"{entry['objective']:.6g}" if entry['feasible'] else "[red]infeasible[/red]"
            gap = f"{entry['gap']:.2%}" if math.isfinite(entry['gap']) else "-"
            table.add_row(str(rank), entry['scheme'], latency, gap, f"{entry['wall_ms']:.1f}")
        console.print(table)

        return CommandResult(exit_code=EXIT_OK, payload=json_safe({'bound': bound, 'ranking': entries}))

    def cmd_verify(self, seed_count: Optional[int] = None) -> CommandResult:
        """Run the property suite; exit 1 when any property fails."""
        seed_count = seed_count or (self.config.get('verify', {}) or {}).get('seed_count', 5)
        print_header(f"Verification on {seed_count} seeds")
        results = run_verification(seed_count, self.settings)
        print_check_tree("Properties", results)

        failed = [result.name for result in results if not result.passed]
        if failed:
            print_error(f"{len(failed)} of {len(results)} checks failed: {', '.join(failed)}")
        else:
            print_success(f"All {len(results)} checks passed")
        return CommandResult(
            exit_code=EXIT_CHECK_FAILED if failed else EXIT_OK,
            payload={'checks': [result.model_dump() for result in results]},
        )

    def cmd_generate(
        self, seed: int = 0, output_path: Optional[str] = None, scenario_path: Optional[str] = None
    ) -> CommandResult:
        """Write an instance drawn from the scenario settings."""
        try:
            config = self._scenario(scenario_path).model_copy(update={'seed': seed})
            instance, regenerations = generate_feasible_instance(config)
        except (InstanceValidationError, OSError) as e:
            return self._invalid(e)

        target = output_path or str(Path(self.file_manager.run_dir(self.file_manager.solutions_dir)) / f"instance_{seed}.json")
        path = save_instance(instance, target)
        if regenerations:
            print_warning(f"Seed {seed} needed {regenerations} regenerations to pass the feasibility check")
        print_info(f"Generated K={instance.num_helpers}, L={instance.num_tasks} instance")
        print_file_saved(path, "json")
        return CommandResult(exit_code=EXIT_OK, payload={'path': path, 'regenerations': regenerations})
