"""
Rounding a fractional assignment and repairing budget violations.
"""

import logging
from typing import List, Set

import numpy as np

from ..core.model import Assignment, Instance, assignment_from_choices, check_dimensions
from ..solver import fixed_assignment_margins

logger = logging.getLogger(__name__)


def round_assignment(fractional: Assignment) -> Assignment:
    """
    Put each task on the node with its largest share.

    Ties go to the lowest helper index; the local node is the last column
    and so loses every tie.
    """
    choices = np.argmax(fractional.array, axis=1)
    return assignment_from_choices([int(c) for c in choices], fractional.num_nodes)


def repair_assignment(binary: Assignment, fractional: Assignment, instance: Instance) -> Assignment:
    """
    Move tasks until every node has a positive energy margin.

    Each move looks at the most violated node and considers the tasks whose
    move would raise its margin: tasks placed on it, and for the local node
    also the offloaded tasks whose uplink it pays for. The move taken is the
    one onto the node with the largest fractional share that the task has
    not been on yet. Stops after L*K moves.

    Args:
        binary: Rounded assignment
        fractional: Relaxed assignment guiding the moves
        instance: Problem data

    Returns:
        The repaired assignment; may still have non-positive margins when
        the moves run out
    """
    check_dimensions(binary, instance)
    check_dimensions(fractional, instance)
    shares = fractional.array
    local = instance.local_index
    choices: List[int] = binary.choices()
    visited: List[Set[int]] = [{node} for node in choices]
    assignment = binary

    for move in range(instance.num_tasks * instance.num_helpers):
        margins = fixed_assignment_margins(instance, assignment)
        if np.all(margins > 0):
            return assignment
        worst = int(np.argmin(margins))

        best = None
        for l, node in enumerate(choices):
            if node != worst and not (worst == local and node != local):
                continue
            for target in range(assignment.num_nodes):
                if target in visited[l]:
                    continue
                trial = list(choices)
                trial[l] = target
                gain = fixed_assignment_margins(instance, assignment_from_choices(trial, assignment.num_nodes))[worst]
                if gain <= margins[worst]:
                    continue
                if best is None or shares[l, target] > best[0]:
                    best = (shares[l, target], l, target)
        if best is None:
            logger.debug(f"🔧 No move raises the margin of node {worst}")
            break

        _, task, target = best
        logger.debug(f"🔧 Move {move + 1}: task {task} from node {choices[task]} to node {target}")
        choices[task] = target
        visited[task].add(target)
        assignment = assignment_from_choices(choices, assignment.num_nodes)

    return assignment
