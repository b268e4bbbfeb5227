#!/usr/bin/env python3
"""
Closed-form latency and energy evaluation for a TDMA offloading frame.

The frame has three phases: the local user offloads to helpers 1..K in
order, helpers compute, then helpers return results in the same order.
Local computation runs concurrently with all remote phases.
"""

import logging
import math
from typing import List, Tuple

import numpy as np

from .errors import ScheduleError
from .model import (
    ENERGY_TOLERANCE,
    Assignment,
    Instance,
    ResourceAllocation,
    ScheduleReport,
    assigned_bits,
    check_dimensions,
)

logger = logging.getLogger(__name__)

ABS_TOLERANCE = 1e-9
REL_TOLERANCE = 1e-9
NEGLIGIBLE_BITS = 1e-9


def _close_enough(lhs: float, rhs: float) -> bool:
    """lhs <= rhs up to the engine tolerance."""
    return lhs <= rhs + ABS_TOLERANCE + REL_TOLERANCE * abs(rhs)


def local_compute(assignment: Assignment, instance: Instance) -> Tuple[float, float]:
    """
    Time and energy of the tasks kept on the local node.

    Args:
        assignment: Fractional or binary assignment
        instance: Problem data

    Returns:
        (seconds, joules)
    """
    check_dimensions(assignment, instance)
    share = assignment.array[:, instance.local_index]
    cycles = float(share @ (instance.cycles_per_bit()[:, instance.local_index] * instance.input_bits()))
    freq = instance.local.cpu_freq
    return cycles / freq, instance.local.kappa * cycles * freq ** 2


def remote_compute(assignment: Assignment, helper_index: int, instance: Instance) -> Tuple[float, float]:
    """
    Time and energy helper k spends on its assigned tasks.

    Args:
        assignment: Fractional or binary assignment
        helper_index: Zero-based helper position in TDMA order
        instance: Problem data

    Returns:
        (seconds, joules)
    """
    check_dimensions(assignment, instance)
    if not 0 <= helper_index < instance.num_helpers:
        raise IndexError(f"helper index {helper_index} out of range for {instance.num_helpers} helpers")
    helper = instance.helpers[helper_index]
    share = assignment.array[:, helper_index]
    cycles = float(share @ (instance.cycles_per_bit()[:, helper_index] * instance.input_bits()))
    return cycles / helper.cpu_freq, helper.kappa * cycles * helper.cpu_freq ** 2


def link_power(bits: float, duration: float, gain: float, bandwidth: float) -> float:
    """Transmit power needed to push `bits` through the link in `duration` seconds."""
    if bits == 0:
        return 0.0
    if duration <= 0:
        raise ValueError(f"{bits} bits need a positive slot, got duration={duration}")
    return math.expm1(math.log(2.0) * bits / (duration * bandwidth)) / gain


def link_energy(bits: float, duration: float, gain: float, bandwidth: float) -> float:
    """Energy of a slot: duration * link_power, zero for an empty link."""
    if bits == 0:
        return 0.0
    return duration * link_power(bits, duration, gain, bandwidth)


def link_rate(power: float, gain: float, bandwidth: float) -> float:
    """Achievable rate in bits/second at a given transmit power."""
    return bandwidth * math.log2(1.0 + power * gain)


def _compute_times(assignment: Assignment, instance: Instance) -> List[float]:
    times = [remote_compute(assignment, k, instance)[0] for k in range(instance.num_helpers)]
    times.append(local_compute(assignment, instance)[0])
    return times


def _check_slots(assignment: Assignment, alloc: ResourceAllocation, instance: Instance) -> Tuple[np.ndarray, np.ndarray]:
    if not assignment.is_binary:
        raise ScheduleError("schedules can only be simulated for binary assignments")
    check_dimensions(assignment, instance)
    num_helpers = instance.num_helpers
    if len(alloc.t_off) != num_helpers or len(alloc.t_dl) != num_helpers:
        raise ScheduleError(f"allocation must have {num_helpers} offload and download slots")

    bits_in, bits_out = assigned_bits(assignment, instance)
    for k in range(num_helpers):
        if bits_in[k] > 0 and alloc.t_off[k] <= 0:
            raise ScheduleError(f"{bits_in[k]:g} input bits assigned but no offload slot", k)
        if bits_in[k] == 0 and alloc.t_off[k] != 0:
            raise ScheduleError("offload slot given without input bits", k)
        if bits_out[k] > 0 and alloc.t_dl[k] <= 0:
            raise ScheduleError(f"{bits_out[k]:g} output bits assigned but no download slot", k)
        if bits_out[k] == 0 and alloc.t_dl[k] != 0:
            raise ScheduleError("download slot given without output bits", k)
    return bits_in, bits_out


def _waiting_times(t_off, t_dl, compute) -> List[float]:
    waiting = []
    offloaded = 0.0
    for k in range(len(t_off)):
        offloaded += t_off[k]
        if k == 0:
            waiting.append(max(t_off[0] + compute[0], math.fsum(t_off)))
        else:
            waiting.append(max(offloaded + compute[k], waiting[k - 1] + t_dl[k - 1]))
    return waiting


def simulate_schedule(assignment: Assignment, alloc: ResourceAllocation, instance: Instance) -> ScheduleReport:
    """
    Run the max-recursion of the TDMA frame.

    Args:
        assignment: Binary assignment
        alloc: Slot lengths; slots of helpers without bits must be zero
        instance: Problem data

    Returns:
        ScheduleReport with waiting times, completion, total latency and energies
    """
    bits_in, bits_out = _check_slots(assignment, alloc, instance)
    num_helpers = instance.num_helpers
    bandwidth = instance.bandwidth
    uplink = instance.uplink_gains()
    downlink = instance.downlink_gains()

    compute = _compute_times(assignment, instance)
    waiting = _waiting_times(alloc.t_off, alloc.t_dl, compute)
    completion = waiting[-1] + alloc.t_dl[-1]
    total = max(compute[instance.local_index], completion)

    off_power = [link_power(bits_in[k], alloc.t_off[k], uplink[k], bandwidth) for k in range(num_helpers)]
    dl_power = [link_power(bits_out[k], alloc.t_dl[k], downlink[k], bandwidth) for k in range(num_helpers)]

    return ScheduleReport(
        compute_time=tuple(compute),
        waiting=tuple(waiting),
        completion=completion,
        total_latency=total,
        offload_energy=math.fsum(
            link_energy(bits_in[k], alloc.t_off[k], uplink[k], bandwidth) for k in range(num_helpers)
        ),
        local_energy=local_compute(assignment, instance)[1],
        helper_compute_energy=tuple(remote_compute(assignment, k, instance)[1] for k in range(num_helpers)),
        helper_dl_energy=tuple(
            link_energy(bits_out[k], alloc.t_dl[k], downlink[k], bandwidth) for k in range(num_helpers)
        ),
        offload_power=tuple(off_power),
        download_power=tuple(dl_power),
        offload_rate=tuple(link_rate(off_power[k], uplink[k], bandwidth) for k in range(num_helpers)),
        download_rate=tuple(link_rate(dl_power[k], downlink[k], bandwidth) for k in range(num_helpers)),
    )


def energy_audit(assignment: Assignment, alloc: ResourceAllocation, instance: Instance) -> Tuple[Tuple[float, ...], bool]:
    """
    Per-node energy of an assignment and allocation.

    Returns:
        (node energies with the local node last, True if every node is within budget)
    """
    check_dimensions(assignment, instance)
    bits_in, bits_out = assigned_bits(assignment, instance)
    bandwidth = instance.bandwidth
    uplink = instance.uplink_gains()
    downlink = instance.downlink_gains()

    energies = []
    for k in range(instance.num_helpers):
        compute_energy = remote_compute(assignment, k, instance)[1]
        energies.append(compute_energy + _slot_energy(bits_out[k], alloc.t_dl[k], downlink[k], bandwidth))
    offload = math.fsum(
        _slot_energy(bits_in[k], alloc.t_off[k], uplink[k], bandwidth) for k in range(instance.num_helpers)
    )
    energies.append(local_compute(assignment, instance)[1] + offload)

    budgets = instance.energy_budgets()
    ok = all(energy <= budget + ENERGY_TOLERANCE for energy, budget in zip(energies, budgets))
    return tuple(energies), ok


def _slot_energy(bits: float, duration: float, gain: float, bandwidth: float) -> float:
    # fractional loads can leave a few stray bits on a zero-length slot
    if duration <= 0:
        return math.inf if bits >= NEGLIGIBLE_BITS else 0.0
    return link_energy(bits, duration, gain, bandwidth)


def merged_constraint_violations(assignment: Assignment, alloc: ResourceAllocation, instance: Instance) -> List[str]:
    """
    Constraints of the merged-recursion problem that the allocation breaks.

    Covers the first-waiting-time constraints, the local deadline, the
    per-helper compute deadlines and the energy budgets.
    """
    compute = _compute_times(assignment, instance)
    t_off, t_dl, i1 = alloc.t_off, alloc.t_dl, alloc.i1
    bits_in, _ = assigned_bits(assignment, instance)
    problems = []

    if not _close_enough(math.fsum(t_off), i1):
        problems.append(f"offloading ends at {math.fsum(t_off):.6g}s after i1={i1:.6g}s")
    if not _close_enough(t_off[0] + compute[0], i1):
        problems.append(f"helper 0 finishes at {t_off[0] + compute[0]:.6g}s after i1={i1:.6g}s")
    if not _close_enough(compute[instance.local_index], alloc.objective):
        problems.append(f"local compute {compute[instance.local_index]:.6g}s exceeds {alloc.objective:.6g}s")
    for k in range(1, instance.num_helpers):
        if bits_in[k] == 0:
            continue
        deadline = i1 + math.fsum(t_dl[:k]) - math.fsum(t_off[:k + 1])
        if not _close_enough(compute[k], deadline):
            problems.append(f"helper {k} compute {compute[k]:.6g}s misses its slot deadline {deadline:.6g}s")

    energies, _ = energy_audit(assignment, alloc, instance)
    for k, (energy, budget) in enumerate(zip(energies, instance.energy_budgets())):
        if energy > budget + ENERGY_TOLERANCE:
            label = "local" if k == instance.local_index else f"helper {k}"
            problems.append(f"{label} uses {energy:.6g} J over its {budget:.6g} J budget")
    return problems


def tighten_schedule(assignment: Assignment, alloc: ResourceAllocation, instance: Instance) -> ResourceAllocation:
    """
    Stretch downloads so the simulated frame meets the merged recursion exactly.

    When helper k is still computing after its predecessor's download ends,
    the latest earlier helper with results to send slows its download until
    helper k can start right after the chain. Whatever is left up to
    max(local compute, i1 + sum(t_dl)) goes to the last sender. Longer slots
    never cost more energy, and the latency of the frame is unchanged.

    t_off is kept as given. i1 is not: it is recomputed as the simulated
    first waiting time, so it may differ from the input while i1 + sum(t_dl)
    stays the same.

    Args:
        assignment: Binary assignment
        alloc: Allocation feasible for the merged problem
        instance: Problem data

    Returns:
        Allocation with the same t_off, t_dl' >= t_dl, and i1' equal to the
        simulated first waiting time, so that simulate_schedule() reports
        exactly i1' + sum(t_dl')
    """
    _, bits_out = _check_slots(assignment, alloc, instance)
    problems = merged_constraint_violations(assignment, alloc, instance)
    if problems:
        raise ScheduleError("cannot tighten an infeasible allocation: " + "; ".join(problems))

    num_helpers = instance.num_helpers
    compute = _compute_times(assignment, instance)
    local_time = compute[instance.local_index]
    t_off = list(alloc.t_off)
    t_dl = list(alloc.t_dl)
    target = max(local_time, alloc.objective)
    senders = [k for k in range(num_helpers) if bits_out[k] > 0]

    for k in range(1, num_helpers):
        waiting = _waiting_times(t_off, t_dl, compute)
        gap = math.fsum(t_off[:k + 1]) + compute[k] - (waiting[k - 1] + t_dl[k - 1])
        earlier = [j for j in senders if j < k]
        if gap > 0 and earlier:
            t_dl[earlier[-1]] += gap

    if senders:
        for _ in range(num_helpers + 2):
            completion = _waiting_times(t_off, t_dl, compute)[-1] + t_dl[-1]
            slack = target - max(local_time, completion)
            if slack <= 0:
                break
            t_dl[senders[-1]] += slack

    completion = _waiting_times(t_off, t_dl, compute)[-1] + t_dl[-1]
    i1 = max(0.0, max(local_time, completion) - math.fsum(t_dl))
    if i1 < alloc.i1 - ABS_TOLERANCE:
        logger.debug(f"Tightened i1 from {alloc.i1:.6g}s to {i1:.6g}s")
    return ResourceAllocation(t_off=tuple(t_off), t_dl=tuple(t_dl), i1=i1)
