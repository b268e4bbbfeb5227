"""
Shared fixtures: hand-built instances and small seeded scenarios.
"""

from typing import Sequence

import pytest
import yaml

from src.core.model import Channel, Instance, Node, Task, ensure_valid
from src.experiments.scenario import ScenarioConfig, generate_feasible_instance
from src.schemes import SchemeSettings

BANDWIDTH = 312500.0


def build_instance(
    input_bits: Sequence[float],
    output_bits: Sequence[float],
    cycles: Sequence[Sequence[float]],
    freqs: Sequence[float],
    budgets: Sequence[float],
    uplink: Sequence[float],
    downlink: Sequence[float],
    kappa: float = 1e-28,
    bandwidth: float = BANDWIDTH,
) -> Instance:
    """
    Instance from plain lists.

    `cycles` is L x (K+1) and `freqs`/`budgets` have K+1 entries, with the
    local node last in each.
    """
    num_nodes = len(freqs)

    def node(k: int) -> Node:
        return Node(
            cpu_freq=freqs[k],
            kappa=kappa,
            energy_budget=budgets[k],
            cycles_per_bit=tuple(row[k] for row in cycles),
        )

    return ensure_valid(Instance(
        tasks=tuple(Task(input_bits=t, output_bits=r) for t, r in zip(input_bits, output_bits)),
        local=node(num_nodes - 1),
        helpers=tuple(node(k) for k in range(num_nodes - 1)),
        channels=tuple(Channel(uplink_gain=h, downlink_gain=g) for h, g in zip(uplink, downlink)),
        bandwidth=bandwidth,
    ))


@pytest.fixture
def instance_factory():
    return build_instance


@pytest.fixture
def single_task_instance():
    """K=1, L=1: one 10^4-bit task with 10^3 result bits."""
    return build_instance(
        input_bits=[1e4],
        output_bits=[1e3],
        cycles=[[500.0, 1000.0]],
        freqs=[2e9, 1e9],
        budgets=[0.01, 0.01],
        uplink=[1e6],
        downlink=[1e6],
    )


@pytest.fixture
def two_helper_frame():
    """
    K=2, L=2 with one task per helper: helper 0 computes for 0.5 s and
    helper 1 for 3 s. Budgets are large enough for any slot length used here.
    """
    return build_instance(
        input_bits=[1000.0, 1000.0],
        output_bits=[100.0, 100.0],
        cycles=[[0.5, 1.0, 0.0], [1.0, 3.0, 0.0]],
        freqs=[1000.0, 1000.0, 1000.0],
        budgets=[1e3, 1e3, 1e3],
        uplink=[1.0, 1.0],
        downlink=[1.0, 1.0],
    )


@pytest.fixture
def settings():
    return SchemeSettings()


@pytest.fixture
def small_instance():
    """A seeded K=2, L=3 scenario that passes the sufficient feasibility check."""
    instance, _ = generate_feasible_instance(ScenarioConfig(num_helpers=2, num_tasks=3, seed=7))
    return instance


@pytest.fixture
def settings_file(tmp_path):
    """A YAML settings file with a small scenario and outputs under tmp_path."""
    path = tmp_path / "settings.yaml"
    path.write_text(yaml.safe_dump({
        'scenario': {'num_helpers': 2, 'num_tasks': 2},
        'sweep': {'jobs': 1, 'seeds': '0..1', 'record_wall_time': False},
        'output': {
            'solutions_dir': str(tmp_path / "solutions"),
            'sweeps_dir': str(tmp_path / "sweeps"),
            'report_dir': str(tmp_path / "reports"),
            'files_rotate': 2,
        },
        'verify': {'seed_count': 1},
    }), encoding='utf-8')
    return str(path)
