"""
Latency-minimizing task offloading for multi-helper mobile edge computing.
"""

from .core.model import Assignment, Instance, ResourceAllocation, Solution
from .schemes import SchemeLabel, run_scheme

__all__ = [
    'Assignment',
    'Instance',
    'ResourceAllocation',
    'SchemeLabel',
    'Solution',
    'run_scheme',
]
