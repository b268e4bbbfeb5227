"""
Simulation study: random scenarios, sweeps, property checks and the CLI commands.
"""

from .orchestrator import CommandResult, ExperimentOrchestrator
from .scenario import (
    ScenarioConfig,
    SweepAxis,
    db_to_linear,
    generate_feasible_instance,
    generate_instance,
    load_scenario_config,
    save_scenario_config,
)
from .sweep_runner import SweepRow, sweep, write_sweep_csv
from .verification import CheckResult, run_verification

__all__ = [
    'CheckResult',
    'CommandResult',
    'ExperimentOrchestrator',
    'ScenarioConfig',
    'SweepAxis',
    'SweepRow',
    'db_to_linear',
    'generate_feasible_instance',
    'generate_instance',
    'load_scenario_config',
    'run_verification',
    'save_scenario_config',
    'sweep',
    'write_sweep_csv',
]
