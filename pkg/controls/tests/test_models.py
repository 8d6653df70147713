"""
Tests for control schedules, bounds and the time-scaling map.
"""

import numpy as np
from django.test import SimpleTestCase

from controls.models import (
    Constant,
    ControlBounds,
    OffBangOff,
    SampledGrid,
    ScheduleSequence,
    TimeScaling,
)
from main.exceptions import UsageError


class ControlBoundsTest(SimpleTestCase):
    """Test ControlBounds."""

    def test_defaults(self):
        """Test the default box"""
        bounds = ControlBounds()
        self.assertEqual((bounds.kp_min, bounds.kp_max, bounds.kc_min, bounds.kc_max), (0.0, 1.0, -5.0, 5.0))

    def test_inverted_bounds_rejected(self):
        """Test that kp_min above kp_max is rejected"""
        with self.assertRaises(UsageError):
            ControlBounds(kp_min=1.0, kp_max=0.0)
        with self.assertRaises(UsageError):
            ControlBounds(kc_min=2.0, kc_max=-2.0)


class ScheduleTest(SimpleTestCase):
    """Test schedule construction and values."""

    def test_off_bang_off_closed_interval(self):
        """Test that kappa_c is on at both switch times and off outside"""
        schedule = OffBangOff(t1=2.0, t2=9.256, kappa_c=1.0)
        self.assertEqual(schedule.values(2.0)[1][0], 1.0)
        self.assertEqual(schedule.values(9.256)[1][0], 1.0)
        self.assertEqual(schedule.values(1.999)[1][0], 0.0)
        self.assertEqual(schedule.values(9.3)[1][0], 0.0)
        self.assertEqual(schedule.values(0.0)[0][0], 1.0)

    def test_off_bang_off_order_enforced(self):
        """Test that t1 after t2 is rejected"""
        with self.assertRaises(UsageError):
            OffBangOff(t1=5.0, t2=2.0, kappa_c=1.0)

    def test_sampled_grid_interpolates(self):
        """Test linear interpolation between nodes"""
        grid = SampledGrid.uniform(2.0, np.ones(3), [0.0, 1.0, 3.0])
        kp, kc = grid.values(1.5)
        self.assertEqual(kp[0], 1.0)
        self.assertAlmostEqual(kc[0], 2.0)
        self.assertEqual(grid.n_drivers, 1)
        self.assertEqual(grid.t_f, 2.0)

    def test_sampled_grid_needs_increasing_nodes(self):
        """Test that repeated node times are rejected"""
        with self.assertRaises(UsageError):
            SampledGrid(node_times=[0.0, 1.0, 1.0], kappa_p=np.ones(3), kappa_c=np.zeros(3))

    def test_sequence_reads_local_time(self):
        """Test that each piece of a sequence is read from its own start"""
        sequence = ScheduleSequence(starts=(0.0, 10.0), pieces=(Constant(1.0, 1.0), OffBangOff(t1=1.0, t2=2.0, kappa_c=-2.0)))
        piece, local = sequence.locate(11.5)
        self.assertIsInstance(piece, OffBangOff)
        self.assertAlmostEqual(local, 1.5)
        piece, local = sequence.locate(3.0)
        self.assertIsInstance(piece, Constant)

    def test_sequence_starts_at_zero(self):
        """Test that a sequence must begin at time 0"""
        with self.assertRaises(UsageError):
            ScheduleSequence(starts=(1.0,), pieces=(Constant(1.0, 0.0),))


class TimeScalingTest(SimpleTestCase):
    """Test the time-scaling map."""

    def test_uniform(self):
        """Test that the uniform profile is T(s) = t_f s"""
        scaling = TimeScaling.uniform(2.0)
        self.assertAlmostEqual(scaling.forward(0.5), 1.0)
        self.assertAlmostEqual(scaling.inverse(1.0), 0.5)

    def test_two_segment_profile(self):
        """Test that speeds (1, 3) renormalized to t_f = 2 give T(0.5) = 0.5 and T(1) = 2"""
        scaling = TimeScaling(t_f=2.0, speeds=[1.0, 3.0])
        self.assertAlmostEqual(scaling.forward(0.5), 0.5)
        self.assertAlmostEqual(scaling.forward(1.0), 2.0)
        self.assertEqual(scaling.forward(0.0), 0.0)

    def test_renormalized_to_final_time(self):
        """Test that any profile is rescaled so that T(1) = t_f"""
        scaling = TimeScaling(t_f=3.0, speeds=[2.0, 5.0, 1.0, 4.0])
        self.assertAlmostEqual(scaling.forward(1.0), 3.0, places=12)
        self.assertAlmostEqual(scaling.speeds.mean(), 3.0, places=12)

    def test_inverse_on_nodes(self):
        """Test that T(T^{-1}(t)) = t on the grid nodes"""
        scaling = TimeScaling(t_f=5.0, speeds=[1.0, 3.0, 0.5, 2.0])
        nodes = scaling.forward(np.linspace(0.0, 1.0, 41))
        np.testing.assert_allclose(scaling.forward(scaling.inverse(nodes)), nodes, atol=1e-12)

    def test_step_sizes_follow_segments(self):
        """Test that steps inside a segment equal its speed over n"""
        scaling = TimeScaling(t_f=2.0, speeds=[1.0, 3.0])
        np.testing.assert_allclose(scaling.step_sizes(4), [0.25, 0.25, 0.75, 0.75])

    def test_speeds_clamped(self):
        """Test that extreme speeds are clamped before renormalizing"""
        scaling = TimeScaling(t_f=1.0, speeds=[0.001, 1.0], c1=0.1, c2=10.0)
        np.testing.assert_allclose(scaling.speeds, [0.2 / 1.1, 2.0 / 1.1])

    def test_rescaling_stays_in_clamp(self):
        """Test that renormalizing never pushes a speed back outside [c1, c2]"""
        scaling = TimeScaling(t_f=2.0, speeds=[100.0, 0.01, 0.01, 0.01], c1=0.5, c2=5.0)
        self.assertTrue(np.all(scaling.speeds >= 0.5))
        self.assertTrue(np.all(scaling.speeds <= 5.0))
        self.assertAlmostEqual(scaling.speeds.mean(), 2.0, places=12)
        self.assertAlmostEqual(scaling.forward(1.0), 2.0, places=12)
        np.testing.assert_allclose(scaling.speeds, [5.0, 1.0, 1.0, 1.0])

    def test_unreachable_mean_rejected(self):
        """Test that a final time outside the speed clamp is rejected"""
        with self.assertRaises(UsageError):
            TimeScaling(t_f=6.0, speeds=[1.0, 2.0], c1=0.5, c2=5.0)

    def test_non_positive_final_time_rejected(self):
        """Test that t_f <= 0 is rejected"""
        with self.assertRaises(UsageError):
            TimeScaling(t_f=0.0)
