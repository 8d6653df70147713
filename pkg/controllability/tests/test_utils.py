"""
Tests for the off-bang-off and constant-control shooting searches.
"""

import numpy as np
import pytest
from django.test import SimpleTestCase

from controllability.models import ReachSpec
from controllability.utils import (
    concatenate_trajectories,
    constant_control_reach,
    reach_from,
    reach_point,
    reach_waypoints,
)
from controls.models import Constant
from dynamics.integrators import integrate
from dynamics.models import FrictionParams, SystemState
from kernels.models import DEFAULT_KERNELS
from main.exceptions import NoOrbitError, TheoryScopeError, UsageError
from scenarios.models import Scenario


def one_on_one(driver=(-3.0, 0.0), evader=(0.0, 0.0), nu=2.0):
    return Scenario.model_validate({
        'name': 'one_on_one',
        'drivers': [{'position': list(driver)}],
        'evaders': [{'position': list(evader)}],
        'friction': {'nu_d': nu, 'nu_e': nu},
    })


class ReachPointTest(SimpleTestCase):
    """Test reach_point on cheap configurations."""

    def test_aligned_pursuit(self):
        """Test that pure pursuit pushes the evader through a target on its axis"""
        spec = ReachSpec(target=(2.0, 0.0), pursuit_only=True, grid=9, budget=60, n_steps=200)
        result = reach_point(one_on_one(), spec)
        self.assertTrue(result.reached)
        self.assertEqual(result.status, 'reached')
        self.assertLessEqual(result.achieved_error, 0.05)
        self.assertEqual(result.schedule.t1, result.schedule.t2)
        self.assertGreater(result.t_f, 0.5)
        self.assertLess(result.t_f, 25.0)
        final = result.trajectory.barycenters()[-1]
        self.assertAlmostEqual(np.linalg.norm(final - (2.0, 0.0)), result.achieved_error)

    def test_coincident_start(self):
        """Test that a driver starting on the evader is rejected"""
        initial = SystemState.at_rest([(0.0, 0.0)], [(0.0, 0.0)])
        with self.assertRaises(UsageError):
            reach_from(initial, DEFAULT_KERNELS, FrictionParams.uniform(2.0), ReachSpec(target=(1.0, 1.0)))

    def test_unequal_friction(self):
        """Test that unequal friction is outside the theory"""
        initial = SystemState.at_rest([(-3.0, 0.0)], [(0.0, 0.0)])
        friction = FrictionParams(nu_d=[2.0], nu_e=[3.0])
        with self.assertRaises(TheoryScopeError):
            reach_from(initial, DEFAULT_KERNELS, friction, ReachSpec(target=(1.0, 1.0)))

    def test_no_orbit(self):
        """Test that kappa_c = nu * sqrt(gamma_m) admits no circumvention orbit"""
        with self.assertRaises(NoOrbitError):
            reach_point(one_on_one(), ReachSpec(target=(-1.0, 1.0), kappa_c=2.0))

    def test_needs_one_pair(self):
        """Test that two drivers are rejected"""
        scenario = Scenario.model_validate({
            'name': 'two_drivers',
            'drivers': [{'position': [-3.0, 0.5]}, {'position': [-3.0, -0.5]}],
            'evaders': [{'position': [0.0, 0.0]}],
        })
        with self.assertRaises(UsageError):
            reach_point(scenario, ReachSpec(target=(-1.0, 1.0)))


class WaypointsTest(SimpleTestCase):
    """Test chained reach legs."""

    def test_no_targets(self):
        """Test that an empty tour is reached with no legs"""
        result = reach_waypoints(one_on_one(), [], ReachSpec(target=(0.0, 0.0)))
        self.assertTrue(result.reached)
        self.assertEqual(len(result), 0)

    def test_concatenation_shifts_clocks(self):
        """Test that joined legs run on one increasing clock without repeated nodes"""
        initial = SystemState.at_rest([(-3.0, 0.0)], [(0.0, 0.0)])
        friction = FrictionParams.uniform(2.0)
        first = integrate(initial, Constant(1.0, 0.0), DEFAULT_KERNELS, friction, 1.0, 10)
        restart = first.final_state
        second_start = SystemState(
            t=0.0,
            driver_pos=restart.driver_pos,
            driver_vel=restart.driver_vel,
            evader_pos=restart.evader_pos,
            evader_vel=restart.evader_vel,
        )
        second = integrate(second_start, Constant(1.0, 1.0), DEFAULT_KERNELS, friction, 2.0, 20)
        joined = concatenate_trajectories([first, second])
        self.assertEqual(len(joined.times), 31)
        self.assertAlmostEqual(joined.times[-1], 3.0)
        self.assertTrue(np.all(np.diff(joined.times) > 0))
        np.testing.assert_array_equal(joined.state_vectors()[10], first.state_vectors()[-1])


@pytest.mark.reproduction
class ReachReproductionTest(SimpleTestCase):
    """Test the searches against the published runs."""

    def setUp(self):
        from scenarios.loaders import load_bundled

        self.scenario = load_bundled('off_bang_off_reach')

    def test_off_bang_off(self):
        """Test that the off-bang-off search finds t2 near 9.26 and t_f near 13.04"""
        result = reach_point(self.scenario, ReachSpec(target=(-1.0, 1.0), kappa_c=1.0, t1=2.0, tolerance=0.05))
        self.assertTrue(result.reached)
        self.assertLess(abs(result.schedule.t2 - 9.256), 0.5)
        self.assertLess(abs(result.t_f - 13.0421), 1.0)

    def test_mirror_symmetry(self):
        """Test that reflecting the target and the control sign reflects the result"""
        upper = reach_point(self.scenario, ReachSpec(target=(-1.0, 1.0), kappa_c=1.0, t1=2.0))
        lower = reach_point(self.scenario, ReachSpec(target=(-1.0, -1.0), kappa_c=-1.0, t1=2.0))
        self.assertAlmostEqual(upper.schedule.t2, lower.schedule.t2, places=6)
        self.assertAlmostEqual(upper.t_f, lower.t_f, places=6)

    def test_constant_control(self):
        """Test that the best constant control is close to kappa_c = 1.5662 at t_f = 5.1727"""
        result = constant_control_reach(self.scenario, (-1.0, 1.0), tol=0.05)
        self.assertTrue(result.reached)
        self.assertLess(abs(result.kappa_c - 1.5662), 0.1)
        self.assertLess(abs(result.t_f - 5.1727), 0.3)

    def test_waypoint_tour(self):
        """Test that every leg of the six-point tour is reached"""
        from scenarios.loaders import load_bundled

        tour = load_bundled('waypoint_tour')
        spec = ReachSpec(target=tour.reach.waypoints[0], kappa_c=1.0, tolerance=0.2)
        result = reach_waypoints(tour, tour.reach.waypoints, spec)
        self.assertTrue(result.reached)
        self.assertEqual(len(result), 6)
