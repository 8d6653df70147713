"""
Tests for the guidance and stabilization cost functionals.
"""

import numpy as np
from django.test import SimpleTestCase

from controls.models import Constant
from dynamics.integrators import integrate
from dynamics.models import FrictionParams, SystemState
from kernels.models import DEFAULT_KERNELS
from main.exceptions import UsageError
from optimal_control.costs import GuidanceCost, StabilizationCost, cost_guidance, trapezoid_weights
from optimal_control.models import CostWeights


def resting_states(n_nodes, driver=(-1.0, 0.0), evader=(0.0, 0.0)):
    """Node states of one driver and one evader that never move."""
    x = SystemState.at_rest([driver], [evader]).to_vector()
    return np.tile(x, (n_nodes, 1))


class TrapezoidWeightsTest(SimpleTestCase):
    """Test the quadrature weights."""

    def test_uniform(self):
        """Test half weights at the ends of a uniform grid"""
        np.testing.assert_allclose(trapezoid_weights([0.5, 0.5, 0.5]), [0.25, 0.5, 0.5, 0.25])

    def test_integrates_linear_exactly(self):
        """Test that the weights integrate t exactly on an uneven grid"""
        times = np.array([0.0, 0.3, 1.0, 1.2, 2.0])
        self.assertAlmostEqual(trapezoid_weights(np.diff(times)) @ times, 2.0)


class GuidanceCostTest(SimpleTestCase):
    """Test J = terminal error + delta1 effort + delta2 t_f."""

    def test_zero_at_target_without_effort(self):
        """Test that J = 0 when the evader ends on the target and kappa_c = 0"""
        cost = GuidanceCost(CostWeights(), (0.0, 0.0), 1, 1)
        breakdown = cost.evaluate(resting_states(11), np.zeros((11, 1)), np.full(10, 0.1))
        self.assertEqual(breakdown.total, 0.0)
        self.assertEqual(breakdown.position_error, 0.0)

    def test_effort_only(self):
        """Test that kappa_c = 1 on [0, 10] with delta1 = 0.001 costs 0.01"""
        cost = GuidanceCost(CostWeights(delta1=0.001), (0.0, 0.0), 1, 1)
        breakdown = cost.evaluate(resting_states(101), np.ones((101, 1)), np.full(100, 0.1))
        self.assertAlmostEqual(breakdown.total, 0.01)
        self.assertAlmostEqual(breakdown.control_effort, 10.0)
        self.assertAlmostEqual(breakdown.t_f, 10.0)

    def test_effort_scales_with_delta1(self):
        """Test that the running control cost is linear in delta1"""
        kappa_c = np.linspace(-1.0, 2.0, 21)[:, None]
        steps = np.full(20, 0.25)
        low = GuidanceCost(CostWeights(delta1=0.001), (0.0, 0.0), 1, 1).evaluate(resting_states(21), kappa_c, steps)
        high = GuidanceCost(CostWeights(delta1=0.01), (0.0, 0.0), 1, 1).evaluate(resting_states(21), kappa_c, steps)
        self.assertAlmostEqual(high.running_control, 10.0 * low.running_control)

    def test_terminal_and_time_terms(self):
        """Test the squared final distance and the time price"""
        cost = GuidanceCost(CostWeights(delta1=0.0, delta2=0.01), (3.0, 4.0), 1, 1)
        breakdown = cost.evaluate(resting_states(11), np.zeros((11, 1)), np.full(10, 0.2))
        self.assertAlmostEqual(breakdown.terminal, 25.0)
        self.assertAlmostEqual(breakdown.position_error, 5.0)
        self.assertAlmostEqual(breakdown.time, 0.02)
        self.assertAlmostEqual(breakdown.total, 25.02)

    def test_negative_weight(self):
        """Test that negative weights are rejected"""
        with self.assertRaises(UsageError):
            CostWeights(delta2=-0.1)

    def test_cost_of_a_run(self):
        """Test cost_guidance on an integrated run with constant kappa_c = 1"""
        initial = SystemState.at_rest([(-3.0, 0.0)], [(0.0, 0.0)])
        schedule = Constant(1.0, 1.0)
        traj = integrate(initial, schedule, DEFAULT_KERNELS, FrictionParams.uniform(2.0), 10.0, 100)
        total, breakdown = cost_guidance(traj, schedule, CostWeights(delta1=0.001), (0.0, 0.0))
        self.assertAlmostEqual(breakdown.running_control, 0.01)
        final = traj.evader_pos[-1, 0]
        self.assertAlmostEqual(breakdown.terminal, float(final @ final))
        self.assertAlmostEqual(total, breakdown.terminal + 0.01)


class StabilizationCostTest(SimpleTestCase):
    """Test the running tracking cost."""

    def test_unit_distance_for_unit_time(self):
        """Test that an evader held at distance 1 from the target for t_f = 1 costs 1"""
        cost = StabilizationCost(CostWeights(delta1=0.0, delta3=0.0), (1.0, 0.0), 1, 1)
        breakdown = cost.evaluate(resting_states(11, driver=(-1.0, 0.0)), np.zeros((11, 1)), np.full(10, 0.1))
        self.assertAlmostEqual(breakdown.total, 1.0)
        self.assertEqual(breakdown.terminal, 0.0)

    def test_driver_terms_weighted_by_delta3(self):
        """Test that drivers away from the target cost delta3 times their squared distance"""
        cost = StabilizationCost(CostWeights(delta1=0.0, delta3=0.1), (0.0, 0.0), 1, 1)
        breakdown = cost.evaluate(resting_states(11, driver=(2.0, 0.0)), np.zeros((11, 1)), np.full(10, 0.1))
        self.assertAlmostEqual(breakdown.running_state, 0.4)

    def test_gradient_matches_differences(self):
        """Test the running-state gradient against central differences"""
        cost = StabilizationCost(CostWeights(delta3=0.3), (1.0, 1.0), 2, 1)
        rng = np.random.default_rng(5)
        x = rng.normal(size=12)
        grad = cost.running_state_gradient(x)
        for index in range(12):
            step = np.zeros(12)
            step[index] = 1e-6
            fd = (cost.running_state(x + step) - cost.running_state(x - step)) / 2e-6
            self.assertAlmostEqual(grad[index], fd, places=6)
