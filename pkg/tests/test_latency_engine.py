"""
Tests for the closed-form latency and energy engine.
"""

import math

import numpy as np
import pytest

from src.core.errors import ScheduleError
from src.core.latency_engine import (
    energy_audit,
    link_energy,
    link_power,
    link_rate,
    local_compute,
    merged_constraint_violations,
    remote_compute,
    simulate_schedule,
    tighten_schedule,
)
from src.core.model import Assignment, ResourceAllocation, all_local, assignment_from_choices

B = 312500.0


@pytest.fixture
def compute_instance(instance_factory):
    """K=1, L=1: C=500 on a 2 GHz helper, C=1000 on a 1 GHz local node."""
    return instance_factory(
        input_bits=[1e4], output_bits=[1e3], cycles=[[500.0, 1e3]],
        freqs=[2e9, 1e9], budgets=[1.0, 1.0], uplink=[1.0], downlink=[1.0],
    )


class TestCompute:
    """Time and energy of local and remote computation."""

    def test_nothing_local(self, compute_instance):
        assert local_compute(assignment_from_choices([0], 2), compute_instance) == (0.0, 0.0)

    def test_one_local_task(self, compute_instance):
        seconds, joules = local_compute(assignment_from_choices([1], 2), compute_instance)
        assert seconds == pytest.approx(1e-2)
        assert joules == pytest.approx(1e-3)

    def test_half_local_task(self, compute_instance):
        seconds, joules = local_compute(Assignment.from_array(np.array([[0.5, 0.5]])), compute_instance)
        assert seconds == pytest.approx(5e-3)
        assert joules == pytest.approx(5e-4)

    def test_one_remote_task(self, compute_instance):
        seconds, joules = remote_compute(assignment_from_choices([0], 2), 0, compute_instance)
        assert seconds == pytest.approx(2.5e-3)
        assert joules == pytest.approx(2e-3)

    def test_doubling_frequency(self, compute_instance):
        """Twice the clock halves the time and quadruples the energy."""
        helper = compute_instance.helpers[0].model_copy(update={'cpu_freq': 4e9})
        faster = compute_instance.model_copy(update={'helpers': (helper,)})
        seconds, joules = remote_compute(assignment_from_choices([0], 2), 0, faster)
        assert seconds == pytest.approx(1.25e-3)
        assert joules == pytest.approx(8e-3)

    def test_idle_helper(self, compute_instance):
        assert remote_compute(assignment_from_choices([1], 2), 0, compute_instance) == (0.0, 0.0)

    def test_helper_index_out_of_range(self, compute_instance):
        with pytest.raises(IndexError):
            remote_compute(assignment_from_choices([1], 2), 1, compute_instance)


class TestLink:
    """Shannon-rate power and energy of one slot."""

    def test_no_bits_no_power(self):
        assert link_power(0.0, 1.0, 1.0, B) == 0.0
        assert link_energy(0.0, 0.0, 1.0, B) == 0.0

    @pytest.mark.parametrize("bits,gain,expected", [(312500.0, 1.0, 1.0), (625000.0, 0.5, 6.0)])
    def test_power(self, bits, gain, expected):
        assert link_power(bits, 1.0, gain, B) == pytest.approx(expected)

    def test_energy_one_second(self):
        assert link_energy(312500.0, 1.0, 1.0, B) == pytest.approx(1.0)

    def test_energy_approaches_limit(self):
        """A long slot costs just above bits*ln2/(gain*B)."""
        energy = link_energy(312500.0, 1000.0, 1.0, B)
        assert energy == pytest.approx(0.693388, rel=1e-5)
        assert energy > math.log(2.0)

    def test_energy_decreases_with_duration(self):
        energies = [link_energy(1e4, t, 1e3, B) for t in (1e-3, 1e-2, 1e-1, 1.0)]
        assert all(a > b for a, b in zip(energies, energies[1:]))

    def test_rate_inverts_power(self):
        power = link_power(5e4, 0.2, 3.0, B)
        assert link_rate(power, 3.0, B) * 0.2 == pytest.approx(5e4)

    def test_bits_need_a_slot(self):
        with pytest.raises(ValueError):
            link_power(1.0, 0.0, 1.0, B)


class TestSimulateSchedule:
    """The max-recursion of the TDMA frame."""

    def test_all_local(self, two_helper_frame):
        allocation = ResourceAllocation.zeros(2)
        report = simulate_schedule(all_local(two_helper_frame), allocation, two_helper_frame)
        assert report.completion == 0.0
        assert report.total_latency == report.compute_time[-1]

    def test_one_helper(self, instance_factory):
        """t_off=2, compute 3, t_dl=1: I_1 = 5 and the frame ends at 6."""
        instance = instance_factory(
            input_bits=[1000.0], output_bits=[100.0], cycles=[[3.0, 0.0]],
            freqs=[1000.0, 1000.0], budgets=[1e3, 1e3], uplink=[1.0], downlink=[1.0],
        )
        allocation = ResourceAllocation(t_off=(2.0,), t_dl=(1.0,), i1=5.0)
        report = simulate_schedule(assignment_from_choices([0], 2), allocation, instance)
        assert report.waiting == pytest.approx((5.0,))
        assert report.completion == pytest.approx(6.0)
        assert report.total_latency == pytest.approx(6.0)

    def test_two_helpers(self, two_helper_frame):
        """I_1 = max(1.5, 2) = 2 and I_2 = max(5, 3) = 5, so T = 6."""
        allocation = ResourceAllocation(t_off=(1.0, 1.0), t_dl=(1.0, 1.0), i1=4.0)
        report = simulate_schedule(assignment_from_choices([0, 1], 3), allocation, two_helper_frame)
        assert report.compute_time[:2] == pytest.approx((0.5, 3.0))
        assert report.waiting == pytest.approx((2.0, 5.0))
        assert report.completion == pytest.approx(6.0)
        assert report.total_latency == pytest.approx(6.0)

    def test_powers_and_rates(self, two_helper_frame):
        allocation = ResourceAllocation(t_off=(1.0, 1.0), t_dl=(1.0, 1.0), i1=4.0)
        report = simulate_schedule(assignment_from_choices([0, 1], 3), allocation, two_helper_frame)
        assert report.offload_rate == pytest.approx((1000.0, 1000.0))
        assert report.download_rate == pytest.approx((100.0, 100.0))
        assert report.offload_energy == pytest.approx(sum(report.offload_power))

    def test_fractional_assignment_rejected(self, two_helper_frame):
        half = Assignment.from_array(np.array([[0.5, 0.5, 0.0], [0.0, 0.0, 1.0]]))
        with pytest.raises(ScheduleError):
            simulate_schedule(half, ResourceAllocation(t_off=(1.0, 1.0), t_dl=(1.0, 0.0), i1=2.0), two_helper_frame)

    def test_slot_without_bits_rejected(self, two_helper_frame):
        allocation = ResourceAllocation(t_off=(1.0, 1.0), t_dl=(1.0, 1.0), i1=4.0)
        with pytest.raises(ScheduleError) as info:
            simulate_schedule(assignment_from_choices([0, 0], 3), allocation, two_helper_frame)
        assert info.value.helper_index == 1


class TestEnergyAudit:

    def test_all_local_within_budget(self, two_helper_frame):
        energies, ok = energy_audit(all_local(two_helper_frame), ResourceAllocation.zeros(2), two_helper_frame)
        assert ok
        assert energies[:2] == (0.0, 0.0)

    def test_budget_below_local_compute(self, compute_instance):
        local = compute_instance.local.model_copy(update={'energy_budget': 5e-4})
        poor = compute_instance.model_copy(update={'local': local})
        energies, ok = energy_audit(assignment_from_choices([1], 2), ResourceAllocation.zeros(1), poor)
        assert energies[-1] == pytest.approx(1e-3)
        assert not ok

    def test_single_offloaded_task(self, compute_instance):
        """Helper pays compute plus download, the local node pays the upload."""
        allocation = ResourceAllocation(t_off=(0.1,), t_dl=(0.05,), i1=0.2)
        energies, _ = energy_audit(assignment_from_choices([0], 2), allocation, compute_instance)
        assert energies[0] == pytest.approx(2e-3 + link_energy(1e3, 0.05, 1.0, B))
        assert energies[1] == pytest.approx(link_energy(1e4, 0.1, 1.0, B))


class TestTightenSchedule:
    """Stretching downloads so the simulated frame matches the merged recursion."""

    assignment = assignment_from_choices([0, 1], 3)

    def test_slack_moves_to_earlier_download(self, two_helper_frame):
        """Helper 1 computes past its slot, so helper 0's download absorbs the gap."""
        allocation = ResourceAllocation(t_off=(1.0, 1.0), t_dl=(1.0, 1.0), i1=4.0)
        tightened = tighten_schedule(self.assignment, allocation, two_helper_frame)
        assert tightened.t_off == allocation.t_off
        assert tightened.t_dl == pytest.approx((3.0, 1.0))
        assert tightened.i1 == pytest.approx(2.0)
        assert tightened.i1 + sum(tightened.t_dl) == pytest.approx(allocation.i1 + sum(allocation.t_dl))
        assert tightened.objective == pytest.approx(allocation.objective)
        report = simulate_schedule(self.assignment, tightened, two_helper_frame)
        assert report.total_latency == pytest.approx(6.0)

    def test_tight_schedule_is_a_fixed_point(self, two_helper_frame):
        allocation = ResourceAllocation(t_off=(1.0, 1.0), t_dl=(3.0, 1.0), i1=2.0)
        tightened = tighten_schedule(self.assignment, allocation, two_helper_frame)
        assert tightened.t_dl == pytest.approx(allocation.t_dl)
        assert tightened.i1 == pytest.approx(allocation.i1)

    def test_energy_never_increases(self, two_helper_frame):
        allocation = ResourceAllocation(t_off=(1.0, 1.0), t_dl=(1.0, 1.0), i1=4.0)
        before, _ = energy_audit(self.assignment, allocation, two_helper_frame)
        after, _ = energy_audit(self.assignment, tighten_schedule(self.assignment, allocation, two_helper_frame), two_helper_frame)
        assert all(a <= b for a, b in zip(after, before))

    def test_infeasible_allocation_rejected(self, two_helper_frame):
        """i1 = 3 leaves helper 1 no time to compute."""
        allocation = ResourceAllocation(t_off=(1.0, 1.0), t_dl=(1.0, 1.0), i1=3.0)
        assert merged_constraint_violations(self.assignment, allocation, two_helper_frame)
        with pytest.raises(ScheduleError):
            tighten_schedule(self.assignment, allocation, two_helper_frame)
