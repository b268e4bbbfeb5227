"""
Random instance generation for the simulation study.

Every random quantity comes from its own sub-stream of the scenario seed, so
overriding one parameter (budget, helper frequency, number of tasks) never
changes the others. Per-task draws are sequential, so an instance with L
tasks starts with the same tasks as one with fewer.
"""

import logging
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..core.errors import InstanceValidationError
from ..core.model import Channel, Instance, Node, Task, ensure_valid
from ..solver import sufficient_feasibility

logger = logging.getLogger(__name__)

_STREAMS = ("input_bits", "output_bits", "cycles", "distance", "uplink_fading", "downlink_fading")


class SweepAxis(str, Enum):
    ENERGY_DB = "energy_db"
    HELPER_FREQ = "helper_freq"
    NUM_TASKS = "num_tasks"


AXIS_FIELDS = {
    SweepAxis.ENERGY_DB: "energy_budget_db",
    SweepAxis.HELPER_FREQ: "helper_freq_hz",
    SweepAxis.NUM_TASKS: "num_tasks",
}


class ScenarioConfig(BaseModel):
    """Parameters of a random scenario; dB values are absolute (dBW for noise, dBJ for budgets)."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    num_helpers: int = Field(5, ge=1)
    num_tasks: int = Field(10, ge=1)
    bandwidth_hz: float = Field(312500.0, gt=0)
    noise_db: float = -144.0
    kappa: float = Field(1e-28, gt=0)
    local_freq_hz: float = Field(1e9, gt=0)
    helper_freq_hz: float = Field(2e9, gt=0)
    energy_budget_db: float = -20.0
    cell_radius_m: float = Field(500.0, gt=1)
    input_bits_max: float = Field(1e4, gt=0)
    output_bits_max: float = Field(1e3, gt=0)
    cycles_per_bit_max: float = Field(1e3, gt=0)
    pathloss_exponent: float = Field(3.0, gt=0)
    pathloss_ref_db_at_1m: float = -40.0
    seed: int = Field(0, ge=0)
    require_sufficient_feasibility: bool = True
    max_regenerations: int = Field(1000, ge=0)


def db_to_linear(x: float) -> float:
    """10^(x/10)"""
    return 10.0 ** (x / 10.0)


def apply_axis(config: ScenarioConfig, axis: SweepAxis, value: float) -> ScenarioConfig:
    """Copy of the config with the swept field set to `value`."""
    axis = SweepAxis(axis)
    if axis == SweepAxis.NUM_TASKS:
        value = int(value)
    return config.model_validate({**config.model_dump(), AXIS_FIELDS[axis]: value})


def reference_config(config: ScenarioConfig, axis: SweepAxis, values: Sequence[float]) -> ScenarioConfig:
    """
    The configuration whose feasibility stands for the whole sweep: the
    smallest budget, or the most tasks, or the fastest helper clock.

    Helper compute energy grows with the square of the clock, so a draw that
    passes at the fastest clock passes at every slower one.
    """
    axis = SweepAxis(axis)
    if axis == SweepAxis.ENERGY_DB:
        return apply_axis(config, axis, min(values))
    return apply_axis(config, axis, max(values))


def _generators(seed: int, attempt: int):
    sequence = np.random.SeedSequence(seed) if attempt == 0 else np.random.SeedSequence([seed, attempt])
    return dict(zip(_STREAMS, (np.random.default_rng(child) for child in sequence.spawn(len(_STREAMS)))))


def generate_instance(config: ScenarioConfig, attempt: int = 0) -> Instance:
    """
    Draw an instance.

    Task sizes and cycles per bit are uniform on [0, max]; helpers sit at a
    uniform distance in [1 m, radius] with unit-mean exponential fading on
    each link, drawn separately for uplink and downlink.

    Args:
        config: Scenario parameters
        attempt: Regeneration index; 0 is the plain seed

    Returns:
        A validated Instance
    """
    rng = _generators(config.seed, attempt)
    num_tasks, num_helpers = config.num_tasks, config.num_helpers

    inputs = rng["input_bits"].uniform(0.0, config.input_bits_max, size=num_tasks)
    outputs = rng["output_bits"].uniform(0.0, config.output_bits_max, size=num_tasks)
    cycles = rng["cycles"].uniform(0.0, config.cycles_per_bit_max, size=(num_tasks, num_helpers + 1))
    distance = rng["distance"].uniform(1.0, config.cell_radius_m, size=num_helpers)
    uplink_fading = rng["uplink_fading"].exponential(1.0, size=num_helpers)
    downlink_fading = rng["downlink_fading"].exponential(1.0, size=num_helpers)

    large_scale = db_to_linear(config.pathloss_ref_db_at_1m) * distance ** (-config.pathloss_exponent)
    noise = db_to_linear(config.noise_db)
    budget = db_to_linear(config.energy_budget_db)

    def node(freq: float, column: int) -> Node:
        return Node(
            cpu_freq=freq,
            kappa=config.kappa,
            energy_budget=budget,
            cycles_per_bit=tuple(float(c) for c in cycles[:, column]),
        )

    instance = Instance(
        tasks=tuple(Task(input_bits=float(t), output_bits=float(r)) for t, r in zip(inputs, outputs)),
        local=node(config.local_freq_hz, num_helpers),
        helpers=tuple(node(config.helper_freq_hz, k) for k in range(num_helpers)),
        channels=tuple(
            Channel(
                uplink_gain=float(large_scale[k] * uplink_fading[k] / noise),
                downlink_gain=float(large_scale[k] * downlink_fading[k] / noise),
            )
            for k in range(num_helpers)
        ),
        bandwidth=config.bandwidth_hz,
    )
    return ensure_valid(instance)


def generate_feasible_instance(
    config: ScenarioConfig, reference: Optional[ScenarioConfig] = None
) -> Tuple[Instance, int]:
    """
    Draw an instance whose reference counterpart passes the sufficient
    feasibility check, trying regeneration indices 0, 1, 2, ...

    The same regeneration index is used for the returned instance, so all
    points of a sweep share their randomness.

    Returns:
        (instance, regenerations used)

    Raises:
        InstanceValidationError: No index up to max_regenerations passes
    """
    if not config.require_sufficient_feasibility:
        return generate_instance(config), 0
    reference = (reference or config).model_copy(update={"seed": config.seed})

    for attempt in range(config.max_regenerations + 1):
        ok, _, _ = sufficient_feasibility(generate_instance(reference, attempt))
        if ok:
            if attempt:
                logger.debug(f"🎲 Seed {config.seed}: regenerated {attempt} times")
            return generate_instance(config, attempt), attempt
    raise InstanceValidationError([
        f"scenario: no draw for seed {config.seed} passed the sufficient feasibility check "
        f"in {config.max_regenerations + 1} attempts"
    ])


def load_scenario_config(path: str) -> ScenarioConfig:
    """Read a ScenarioConfig JSON document."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        return ScenarioConfig.model_validate_json(text)
    except ValidationError as e:
        raise InstanceValidationError(
            [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]
        ) from e


def save_scenario_config(config: ScenarioConfig, path: str) -> str:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(config.model_dump_json(indent=2), encoding="utf-8")
    return str(target)


def scenario_from_settings(section: Optional[dict]) -> ScenarioConfig:
    """ScenarioConfig from the `scenario` section of config.yaml."""
    try:
        return ScenarioConfig.model_validate(section or {})
    except ValidationError as e:
        raise InstanceValidationError(
            [f"scenario.{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]
        ) from e
