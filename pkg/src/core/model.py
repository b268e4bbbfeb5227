#!/usr/bin/env python3
"""
Domain types for the multi-helper offloading problem.

Index conventions used everywhere:
    - tasks are rows 0..L-1;
    - helpers are nodes 0..K-1, in TDMA order;
    - the local user is node K.

All quantities are SI: bits, seconds, joules, hertz, cycles/second.
Channel gains are stored already normalized by the receiver noise power.
"""

import math
from enum import Enum
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from .errors import InstanceValidationError

ROW_SUM_TOLERANCE = 1e-9
ENERGY_TOLERANCE = 1e-9

_FROZEN = ConfigDict(frozen=True)


class Task(BaseModel):
    """Input and output data sizes of one indivisible task."""

    model_config = _FROZEN

    input_bits: float
    output_bits: float


class Node(BaseModel):
    """A computing node: the local user or one helper."""

    model_config = _FROZEN

    cpu_freq: float
    kappa: float
    energy_budget: float
    cycles_per_bit: Tuple[float, ...]


class Channel(BaseModel):
    """Noise-normalized power gains of one helper's uplink and downlink."""

    model_config = _FROZEN

    uplink_gain: float
    downlink_gain: float


class Instance(BaseModel):
    """
    Full problem data.

    Construction only coerces types; call validate_instance() (or use
    load_instance / the scenario generator, which do) to check invariants.
    """

    model_config = _FROZEN

    tasks: Tuple[Task, ...]
    local: Node
    helpers: Tuple[Node, ...]
    channels: Tuple[Channel, ...]
    bandwidth: float

    @property
    def num_tasks(self) -> int:
        return len(self.tasks)

    @property
    def num_helpers(self) -> int:
        return len(self.helpers)

    @property
    def local_index(self) -> int:
        return len(self.helpers)

    @property
    def nodes(self) -> Tuple[Node, ...]:
        """Helpers in TDMA order followed by the local node."""
        return tuple(self.helpers) + (self.local,)

    def input_bits(self) -> np.ndarray:
        return np.array([task.input_bits for task in self.tasks], dtype=float)

    def output_bits(self) -> np.ndarray:
        return np.array([task.output_bits for task in self.tasks], dtype=float)

    def cycles_per_bit(self) -> np.ndarray:
        """L x (K+1) matrix of C(l, k); the last column is the local node."""
        return np.array([node.cycles_per_bit for node in self.nodes], dtype=float).T

    def cpu_freqs(self) -> np.ndarray:
        return np.array([node.cpu_freq for node in self.nodes], dtype=float)

    def kappas(self) -> np.ndarray:
        return np.array([node.kappa for node in self.nodes], dtype=float)

    def energy_budgets(self) -> np.ndarray:
        return np.array([node.energy_budget for node in self.nodes], dtype=float)

    def uplink_gains(self) -> np.ndarray:
        return np.array([channel.uplink_gain for channel in self.channels], dtype=float)

    def downlink_gains(self) -> np.ndarray:
        return np.array([channel.downlink_gain for channel in self.channels], dtype=float)

    def compute_seconds(self) -> np.ndarray:
        """L x (K+1) matrix of the time each node needs for each whole task."""
        return self.cycles_per_bit() * self.input_bits()[:, None] / self.cpu_freqs()[None, :]

    def compute_joules(self) -> np.ndarray:
        """L x (K+1) matrix of the energy each node spends on each whole task."""
        return (self.kappas()[None, :] * self.cycles_per_bit() * self.input_bits()[:, None]
                * self.cpu_freqs()[None, :] ** 2)


class AssignmentKind(str, Enum):
    FRACTIONAL = "fractional"
    BINARY = "binary"


class Assignment(BaseModel):
    """The L x (K+1) task assignment matrix, fractional or binary."""

    model_config = _FROZEN

    matrix: Tuple[Tuple[float, ...], ...]
    kind: AssignmentKind = AssignmentKind.FRACTIONAL

    @model_validator(mode="after")
    def _check_matrix(self) -> "Assignment":
        if not self.matrix:
            raise ValueError("assignment matrix has no rows")
        width = len(self.matrix[0])
        for l, row in enumerate(self.matrix):
            if len(row) != width:
                raise ValueError(f"row {l} has {len(row)} entries, expected {width}")
            for value in row:
                if not (0.0 <= value <= 1.0):
                    raise ValueError(f"row {l} has entry {value} outside [0, 1]")
                if self.kind == AssignmentKind.BINARY and value not in (0.0, 1.0):
                    raise ValueError(f"row {l} has non-binary entry {value}")
            if abs(math.fsum(row) - 1.0) > ROW_SUM_TOLERANCE:
                raise ValueError(f"row {l} sums to {math.fsum(row)}, expected 1")
        return self

    @classmethod
    def from_array(cls, array: np.ndarray, kind: AssignmentKind = AssignmentKind.FRACTIONAL) -> "Assignment":
        array = np.asarray(array, dtype=float)
        return cls(matrix=tuple(tuple(float(v) for v in row) for row in array), kind=kind)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=float)

    @property
    def num_tasks(self) -> int:
        return len(self.matrix)

    @property
    def num_nodes(self) -> int:
        return len(self.matrix[0])

    @property
    def is_binary(self) -> bool:
        return self.kind == AssignmentKind.BINARY

    def choices(self) -> List[int]:
        """Node index of every task (binary assignments only)."""
        if not self.is_binary:
            raise ValueError("choices() needs a binary assignment")
        return [row.index(1.0) for row in self.matrix]


class ResourceAllocation(BaseModel):
    """Offloading/downloading slot lengths and the first waiting time."""

    model_config = _FROZEN

    t_off: Tuple[float, ...]
    t_dl: Tuple[float, ...]
    i1: float

    @field_validator("t_off", "t_dl")
    @classmethod
    def _nonnegative_vector(cls, values: Tuple[float, ...]) -> Tuple[float, ...]:
        for value in values:
            if not math.isfinite(value) or value < 0.0:
                raise ValueError(f"slot length {value} must be finite and >= 0")
        return values

    @field_validator("i1")
    @classmethod
    def _nonnegative_scalar(cls, value: float) -> float:
        if not math.isfinite(value) or value < 0.0:
            raise ValueError(f"i1={value} must be finite and >= 0")
        return value

    @classmethod
    def zeros(cls, num_helpers: int) -> "ResourceAllocation":
        return cls(t_off=(0.0,) * num_helpers, t_dl=(0.0,) * num_helpers, i1=0.0)

    @property
    def objective(self) -> float:
        """The merged-recursion latency i1 + sum(t_dl)."""
        return self.i1 + math.fsum(self.t_dl)


class Solution(BaseModel):
    """Result of one scheme on one instance."""

    model_config = _FROZEN

    assignment: Assignment
    allocation: ResourceAllocation
    objective: float
    node_energy: Tuple[float, ...]
    feasible: bool
    scheme: str
    detail: str = ""


class ScheduleReport(BaseModel):
    """Simulated TDMA frame for a binary assignment and an allocation."""

    model_config = _FROZEN

    compute_time: Tuple[float, ...]
    waiting: Tuple[float, ...]
    completion: float
    total_latency: float
    offload_energy: float
    local_energy: float
    helper_compute_energy: Tuple[float, ...]
    helper_dl_energy: Tuple[float, ...]
    offload_power: Tuple[float, ...] = ()
    download_power: Tuple[float, ...] = ()
    offload_rate: Tuple[float, ...] = ()
    download_rate: Tuple[float, ...] = ()


def _finite(value: float) -> bool:
    return isinstance(value, (int, float)) and math.isfinite(value)


def validate_instance(instance: Instance) -> List[str]:
    """
    Check every instance invariant.

    Args:
        instance: Instance to check

    Returns:
        List of violations, each naming the field and the reason; empty when valid
    """
    violations = []
    num_tasks = len(instance.tasks)
    num_helpers = len(instance.helpers)

    if num_tasks < 1:
        violations.append("tasks: at least one task is required")
    if num_helpers < 1:
        violations.append("helpers: at least one helper is required")
    if len(instance.channels) != num_helpers:
        violations.append(f"channels: {len(instance.channels)} channels for {num_helpers} helpers")
    if not _finite(instance.bandwidth) or instance.bandwidth <= 0:
        violations.append(f"bandwidth: must be positive and finite, got {instance.bandwidth}")

    for l, task in enumerate(instance.tasks):
        for name in ("input_bits", "output_bits"):
            value = getattr(task, name)
            if not _finite(value) or value < 0:
                violations.append(f"tasks[{l}].{name}: must be finite and >= 0, got {value}")

    labelled_nodes = [("local", instance.local)] + [
        (f"helpers[{k}]", node) for k, node in enumerate(instance.helpers)
    ]
    for label, node in labelled_nodes:
        if not _finite(node.cpu_freq) or node.cpu_freq <= 0:
            violations.append(f"{label}.cpu_freq: must be positive and finite, got {node.cpu_freq}")
        if not _finite(node.kappa) or node.kappa < 0:
            violations.append(f"{label}.kappa: must be finite and >= 0, got {node.kappa}")
        if not _finite(node.energy_budget) or node.energy_budget <= 0:
            violations.append(f"{label}.energy_budget: must be positive and finite, got {node.energy_budget}")
        if len(node.cycles_per_bit) != num_tasks:
            violations.append(
                f"{label}.cycles_per_bit: length {len(node.cycles_per_bit)} does not match {num_tasks} tasks"
            )
        elif any(not _finite(c) or c < 0 for c in node.cycles_per_bit):
            violations.append(f"{label}.cycles_per_bit: entries must be finite and >= 0")

    for k, channel in enumerate(instance.channels):
        for name in ("uplink_gain", "downlink_gain"):
            value = getattr(channel, name)
            if not _finite(value) or value <= 0:
                violations.append(f"channels[{k}].{name}: must be positive and finite, got {value}")

    return violations


def ensure_valid(instance: Instance) -> Instance:
    """Raise InstanceValidationError if the instance has any violation."""
    violations = validate_instance(instance)
    if violations:
        raise InstanceValidationError(violations)
    return instance


def check_dimensions(assignment: Assignment, instance: Instance) -> None:
    if assignment.num_tasks != instance.num_tasks or assignment.num_nodes != instance.num_helpers + 1:
        raise ValueError(
            f"assignment is {assignment.num_tasks}x{assignment.num_nodes}, "
            f"instance needs {instance.num_tasks}x{instance.num_helpers + 1}"
        )


def assignment_from_choices(choices: Sequence[int], num_nodes: int) -> Assignment:
    """Binary assignment with task l on node choices[l]."""
    matrix = np.zeros((len(choices), num_nodes))
    matrix[np.arange(len(choices)), np.asarray(choices, dtype=int)] = 1.0
    return Assignment.from_array(matrix, AssignmentKind.BINARY)


def task_sets(assignment: Assignment) -> List[List[int]]:
    """The per-node task index sets of a binary assignment."""
    sets: List[List[int]] = [[] for _ in range(assignment.num_nodes)]
    for l, node in enumerate(assignment.choices()):
        sets[node].append(l)
    return sets


def assignment_from_sets(sets: Sequence[Sequence[int]], num_tasks: int) -> Assignment:
    """Rebuild a binary assignment from per-node task index sets."""
    choices = [-1] * num_tasks
    for node, members in enumerate(sets):
        for l in members:
            if choices[l] != -1:
                raise ValueError(f"task {l} appears in more than one set")
            choices[l] = node
    missing = [l for l, node in enumerate(choices) if node == -1]
    if missing:
        raise ValueError(f"tasks {missing} are not assigned to any node")
    return assignment_from_choices(choices, len(sets))


def all_local(instance: Instance) -> Assignment:
    return assignment_from_choices([instance.local_index] * instance.num_tasks, instance.num_helpers + 1)


def assigned_bits(assignment: Assignment, instance: Instance) -> Tuple[np.ndarray, np.ndarray]:
    """
    Bits each helper receives and returns under an assignment.

    Returns:
        (input bits per helper, output bits per helper), both length K
    """
    pi = assignment.array[:, :instance.num_helpers]
    return instance.input_bits() @ pi, instance.output_bits() @ pi


def load_instance(path: str) -> Instance:
    """Read an instance JSON document and validate it."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        instance = Instance.model_validate_json(text)
    except ValidationError as e:
        raise InstanceValidationError(
            [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]
        ) from e
    return ensure_valid(instance)


def save_instance(instance: Instance, path: str) -> str:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(instance.model_dump_json(indent=2), encoding="utf-8")
    return str(target)
