"""
Task assignment schemes: the relax-round-resolve algorithm, the baselines and
the exhaustive oracle, with a registry keyed by scheme label.
"""

from enum import Enum
from typing import Optional

from ..core.model import Instance, Solution
from .baselines import heuristic_channel, heuristic_compute, local_execution, random_search, random_selection
from .exhaustive import exhaustive
from .proposed import algorithm1, relaxed_bound
from .rounding import repair_assignment, round_assignment
from .settings import SchemeSettings


class SchemeLabel(str, Enum):
    PROPOSED = "proposed"
    HEURISTIC1 = "heuristic1"
    HEURISTIC2 = "heuristic2"
    RANDOM_SELECTION = "random_selection"
    RANDOM_SEARCH = "random_search"
    LOCAL_EXECUTION = "local_execution"
    EXHAUSTIVE = "exhaustive"
    RELAXED_BOUND = "relaxed_bound"


def run_scheme(
    label: SchemeLabel, instance: Instance, seed: int = 0, settings: Optional[SchemeSettings] = None
) -> Solution:
    """
    Run one scheme on an instance.

    Args:
        label: Scheme to run (a SchemeLabel or its string value)
        instance: Problem data
        seed: Seed of the random schemes; ignored by the others
        settings: Scheme settings

    Returns:
        The scheme's Solution
    """
    settings = settings or SchemeSettings()
    label = SchemeLabel(label)
    if label == SchemeLabel.PROPOSED:
        return algorithm1(instance, settings)
    if label == SchemeLabel.HEURISTIC1:
        return heuristic_channel(instance, settings)
    if label == SchemeLabel.HEURISTIC2:
        return heuristic_compute(instance, settings)
    if label == SchemeLabel.RANDOM_SELECTION:
        return random_selection(instance, seed, settings)
    if label == SchemeLabel.RANDOM_SEARCH:
        return random_search(instance, seed, settings=settings)
    if label == SchemeLabel.LOCAL_EXECUTION:
        return local_execution(instance, settings)
    if label == SchemeLabel.EXHAUSTIVE:
        return exhaustive(instance, settings=settings)
    return relaxed_bound(instance, settings)


__all__ = [
    'SchemeLabel',
    'SchemeSettings',
    'algorithm1',
    'exhaustive',
    'heuristic_channel',
    'heuristic_compute',
    'local_execution',
    'random_search',
    'random_selection',
    'relaxed_bound',
    'repair_assignment',
    'round_assignment',
    'run_scheme',
]
