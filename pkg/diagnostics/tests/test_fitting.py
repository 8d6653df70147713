"""
Tests for fitting asymptotic motions to simulated runs.
"""

import numpy as np
from django.test import SimpleTestCase

from controls.models import Constant
from diagnostics.fitting import fit_circle, fit_circumvention, fit_pursuit
from diagnostics.utils import circumvention_reference, pursuit_reference, reference_state
from dynamics.integrators import integrate
from dynamics.models import FrictionParams, HerdingModel, SystemState, Trajectory
from kernels.models import DEFAULT_KERNELS
from main.exceptions import UsageError


def sampled_reference(ref, kappa_c, t_f=20.0, n_steps=200):
    times = np.linspace(0.0, t_f, n_steps + 1)
    states = np.array([reference_state(ref, t).to_vector() for t in times])
    model = HerdingModel(DEFAULT_KERNELS, FrictionParams.uniform(2.0))
    kp = np.ones((n_steps + 1, 1))
    kc = np.full((n_steps + 1, 1), kappa_c)
    return Trajectory.from_vectors(times, states, kp, kc, 1, 1, model=model)


def simulated(kappa_c, t_f, n_steps):
    initial = SystemState.at_rest([(-3.0, 0.0)], [(0.0, 0.0)])
    return integrate(initial, Constant(1.0, kappa_c), DEFAULT_KERNELS, FrictionParams.uniform(2.0), t_f, n_steps)


class FitPursuitTest(SimpleTestCase):
    """Test fit_pursuit."""

    def test_exact_member(self):
        """Test that a run on the linear motion fits with no residual"""
        ref = pursuit_reference(DEFAULT_KERNELS, 2.0, 0.7, (1.0, -0.5))
        report = fit_pursuit(sampled_reference(ref, 0.0))
        self.assertLess(report.residual, 1e-9)
        self.assertAlmostEqual(report.reference.phi0, 0.7, places=10)
        np.testing.assert_allclose(report.reference.u_e_star, [1.0, -0.5], atol=1e-9)

    def test_simulated_run_converges(self):
        """Test that a pursuit run settles on a line at distance r_p"""
        traj = simulated(0.0, 30.0, 3000)
        report = fit_pursuit(traj)
        self.assertLess(report.residual, 1e-3)
        u, _ = traj.relative()
        self.assertLess(abs(np.linalg.norm(u[-1]) - 1.0), 1e-4)

    def test_short_tail_rejected(self):
        """Test that a tail of a few nodes is a usage error"""
        with self.assertRaises(UsageError):
            fit_pursuit(simulated(0.0, 1.0, 5))


class FitCircumventionTest(SimpleTestCase):
    """Test fit_circumvention."""

    def test_exact_member(self):
        """Test that a run on the periodic motion fits with no residual"""
        ref = circumvention_reference(DEFAULT_KERNELS, 1.0, 2.0, phi1=0.3, u_c_star=(2.0, 1.0))
        report = fit_circumvention(sampled_reference(ref, 1.0))
        self.assertLess(report.residual, 1e-9)
        np.testing.assert_allclose(report.reference.u_c_star, [2.0, 1.0], atol=1e-9)
        self.assertAlmostEqual(report.angular_velocity, 0.5, places=9)

    def test_simulated_run_converges(self):
        """Test that a long kappa_c = 1 run settles at r_c turning at 0.5"""
        report = fit_circumvention(simulated(1.0, 60.0, 6000))
        self.assertAlmostEqual(report.radius, 2.0 / np.sqrt(3.0), delta=1e-3)
        self.assertAlmostEqual(report.angular_velocity, 0.5, delta=1e-3)
        self.assertLess(report.residual, 1e-2)

    def test_pursuit_run_rejected(self):
        """Test that a run without circumvention cannot be fitted to a circle"""
        with self.assertRaises(UsageError):
            fit_circumvention(simulated(0.0, 5.0, 100))


class FitCircleTest(SimpleTestCase):
    """Test the circle fit."""

    def test_noisy_circle(self):
        """Test that a slightly noisy circle is recovered"""
        rng = np.random.default_rng(4)
        angles = rng.uniform(0, 2 * np.pi, 200)
        points = np.column_stack([3 + 2 * np.cos(angles), -1 + 2 * np.sin(angles)]) + rng.normal(scale=1e-4, size=(200, 2))
        center, radius = fit_circle(points)
        np.testing.assert_allclose(center, [3.0, -1.0], atol=1e-4)
        self.assertAlmostEqual(radius, 2.0, delta=1e-4)
