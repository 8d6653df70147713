"""
Tests for energy, Lyapunov functional, reference motions and dissipation checks.
"""

import math

import numpy as np
from django.test import SimpleTestCase

from controls.models import Constant, OffBangOff
from diagnostics.models import RelativeState
from diagnostics.utils import (
    check_dissipation,
    circumvention_reference,
    circumvention_reference_at,
    energy,
    energy_rate_defect,
    lyapunov_kappa,
    lyapunov_series,
    observed_order,
    pursuit_reference,
    pursuit_reference_at,
    quadratic_growth_bound,
    reference_state,
)
from dynamics.integrators import integrate
from dynamics.models import FrictionParams, SystemState
from dynamics.utils import perp
from kernels.models import DEFAULT_KERNELS
from main.exceptions import NoOrbitError, TheoryScopeError, UsageError


def one_on_one_run(schedule, t_f, n_steps, driver=(-3.0, 0.0), driver_vel=(0.0, 0.0), nu=2.0):
    initial = SystemState(t=0.0, driver_pos=[driver], driver_vel=[driver_vel], evader_pos=[(0.0, 0.0)], evader_vel=[(0.0, 0.0)])
    return integrate(initial, schedule, DEFAULT_KERNELS, FrictionParams.uniform(nu), t_f, n_steps)


class EnergyTest(SimpleTestCase):
    """Test E and L_kappa at hand-checked states."""

    def test_energy_values(self):
        """Test E at rest on r_p, with kinetic energy only, and at r = 2"""
        self.assertAlmostEqual(energy(RelativeState(u=(1, 0), v=(0, 0)), DEFAULT_KERNELS), 0.0, places=12)
        self.assertAlmostEqual(energy(RelativeState(u=(2, 0), v=(1, 1)), DEFAULT_KERNELS), 1.806853, places=6)
        self.assertAlmostEqual(energy(RelativeState(u=(1, 0), v=(0, 2)), DEFAULT_KERNELS), 2.0, places=12)

    def test_lyapunov_values(self):
        """Test that L_kappa subtracts (kappa_c / nu) u^perp . v"""
        rel = RelativeState(u=(1, 0), v=(0, 1))
        self.assertAlmostEqual(lyapunov_kappa(rel, 1.0, 2.0, DEFAULT_KERNELS), 0.0, places=12)
        at_rest = RelativeState(u=(1.7, -0.3), v=(0, 0))
        self.assertAlmostEqual(lyapunov_kappa(at_rest, 1.3, 2.0, DEFAULT_KERNELS), energy(at_rest, DEFAULT_KERNELS), places=14)

    def test_lyapunov_without_circumvention_is_energy(self):
        """Test that kappa_c = 0 gives back E for random states"""
        rng = np.random.default_rng(2)
        for _ in range(10):
            rel = RelativeState(u=rng.uniform(0.5, 3.0, 2), v=rng.normal(size=2))
            self.assertEqual(lyapunov_kappa(rel, 0.0, 2.0, DEFAULT_KERNELS), energy(rel, DEFAULT_KERNELS))


class ReferenceMotionTest(SimpleTestCase):
    """Test the pursuit and circumvention reference motions."""

    def test_pursuit_reference(self):
        """Test the linear pursuit motion at t = 0 and t = 2 for two offset angles"""
        ref = pursuit_reference(DEFAULT_KERNELS, 2.0, 0.0, (0.0, 0.0))
        u_d, u_e = pursuit_reference_at(ref, 0.0)
        np.testing.assert_allclose(u_e, [0.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(u_d, [1.0, 0.0], atol=1e-12)
        u_d, u_e = pursuit_reference_at(ref, 2.0)
        np.testing.assert_allclose(u_e, [-1.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(u_d, [0.0, 0.0], atol=1e-12)
        rotated = pursuit_reference(DEFAULT_KERNELS, 2.0, math.pi / 2, (0.0, 0.0))
        np.testing.assert_allclose(pursuit_reference_at(rotated, 2.0)[1], [0.0, -1.0], atol=1e-12)

    def test_circumvention_radii(self):
        """Test r_c, r_d and r_e for kappa_c = 1, nu = 2"""
        ref = circumvention_reference(DEFAULT_KERNELS, 1.0, 2.0)
        self.assertAlmostEqual(ref.r_c, 2.0 / math.sqrt(3.0), places=10)
        self.assertAlmostEqual(ref.r_e, 0.75 * ref.r_c / math.sqrt(1.0625), places=10)
        self.assertAlmostEqual(ref.r_e, 0.8406, delta=1e-3)
        self.assertAlmostEqual(ref.r_d, 1.5842, delta=1e-4)
        self.assertGreater(ref.r_d, ref.r_e)
        self.assertEqual(ref.angular_velocity, 0.5)

    def test_circumvention_separation(self):
        """Test that driver and evader stay r_c apart"""
        ref = circumvention_reference(DEFAULT_KERNELS, 1.0, 2.0, phi1=0.4, u_c_star=(1.0, -2.0))
        for t in np.linspace(0.0, 20.0, 17):
            u_d, u_e = circumvention_reference_at(ref, t)
            self.assertAlmostEqual(np.linalg.norm(u_d - u_e), ref.r_c, delta=1e-9)

    def test_circumvention_angular_velocity(self):
        """Test that both circles turn at kappa_c / nu"""
        ref = circumvention_reference(DEFAULT_KERNELS, 1.0, 2.0)
        t = 0.8
        for index in (0, 1):
            start = circumvention_reference_at(ref, 0.0)[index] - ref.u_c_star
            later = circumvention_reference_at(ref, t)[index] - ref.u_c_star
            turned = math.atan2(start[0] * later[1] - start[1] * later[0], start @ later)
            self.assertAlmostEqual(turned, 0.5 * t, places=12)

    def test_references_solve_the_system(self):
        """Test that integrating from a reference state stays on the reference"""
        friction = FrictionParams.uniform(2.0)
        for ref, schedule in (
            (circumvention_reference(DEFAULT_KERNELS, 1.0, 2.0, phi1=1.1, u_c_star=(0.5, 0.5)), Constant(1.0, 1.0)),
            (circumvention_reference(DEFAULT_KERNELS, -1.5, 2.0, phi1=-0.3), Constant(1.0, -1.5)),
            (pursuit_reference(DEFAULT_KERNELS, 2.0, 2.0, (1.0, 1.0)), Constant(1.0, 0.0)),
        ):
            traj = integrate(reference_state(ref, 0.0), schedule, DEFAULT_KERNELS, friction, 5.0, 1000)
            u_d, u_e = reference_state(ref, 5.0).driver_pos[0], reference_state(ref, 5.0).evader_pos[0]
            np.testing.assert_allclose(traj.driver_pos[-1, 0], u_d, atol=1e-7)
            np.testing.assert_allclose(traj.evader_pos[-1, 0], u_e, atol=1e-7)

    def test_no_orbit_at_boundary(self):
        """Test that |kappa_c| = nu sqrt(gamma_m) has no reference"""
        with self.assertRaises(NoOrbitError):
            circumvention_reference(DEFAULT_KERNELS, 2.0, 2.0)


class DissipationTest(SimpleTestCase):
    """Test check_dissipation in every mode."""

    def test_pursuit_energy_nonincreasing(self):
        """Test that E never increases in pursuit mode"""
        report = check_dissipation(one_on_one_run(Constant(1.0, 0.0), 10.0, 1000), 'pursuit')
        self.assertTrue(report.passed)
        self.assertLess(report.values[-1], report.values[0])

    def test_circumvention_lyapunov_nonincreasing(self):
        """Test that L_kappa never increases under constant kappa_c = 1"""
        report = check_dissipation(one_on_one_run(Constant(1.0, 1.0), 10.0, 1000), 'circumvention')
        self.assertTrue(report.passed)

    def test_release_decay(self):
        """Test that a released driver slows as e^{-nu t}"""
        traj = one_on_one_run(Constant(0.0, 0.0), 3.0, 1000, driver=(-30.0, 0.0), driver_vel=(0.5, -1.0))
        report = check_dissipation(traj, 'release')
        self.assertTrue(report.passed)
        self.assertLess(report.max_violation, 1e-6)

    def test_random_scenarios(self):
        """Test both dissipation identities on random equal-friction runs"""
        rng = np.random.default_rng(20)
        for _ in range(10):
            angle = rng.uniform(0, 2 * math.pi)
            radius = rng.uniform(1.5, 4.0)
            driver = (radius * math.cos(angle), radius * math.sin(angle))
            driver_vel = tuple(rng.normal(scale=0.5, size=2))
            nu = rng.uniform(1.0, 3.0)
            kappa_c = rng.uniform(-0.9, 0.9) * nu
            pursuit = one_on_one_run(Constant(1.0, 0.0), 5.0, 1000, driver, driver_vel, nu)
            self.assertTrue(check_dissipation(pursuit, 'pursuit').passed)
            circling = one_on_one_run(Constant(1.0, kappa_c), 5.0, 1000, driver, driver_vel, nu)
            self.assertTrue(check_dissipation(circling, 'circumvention').passed)

    def test_unequal_friction_refused(self):
        """Test that unequal friction is outside the theory"""
        initial = SystemState.at_rest([(-3.0, 0.0)], [(0.0, 0.0)])
        traj = integrate(initial, Constant(1.0, 0.0), DEFAULT_KERNELS, FrictionParams(nu_d=[2.0], nu_e=[3.0]), 1.0, 10)
        with self.assertRaises(TheoryScopeError):
            check_dissipation(traj, 'pursuit')

    def test_controls_must_match_mode(self):
        """Test that a run whose controls differ from the checked mode is refused"""
        circling = one_on_one_run(Constant(1.0, 1.0), 1.0, 100)
        for mode in ('pursuit', 'release'):
            with self.subTest(mode=mode), self.assertRaises(UsageError):
                check_dissipation(circling, mode)
        released = one_on_one_run(Constant(0.0, 0.0), 1.0, 100)
        with self.assertRaises(UsageError):
            check_dissipation(released, 'circumvention')

    def test_varying_circumvention_refused(self):
        """Test that the Lyapunov check needs one kappa_c for the whole run"""
        traj = one_on_one_run(OffBangOff(t1=0.5, t2=5.0, kappa_c=1.0), 1.0, 100)
        with self.assertRaises(UsageError):
            check_dissipation(traj, 'circumvention')

    def test_energy_rate_second_order(self):
        """Test that the finite-difference energy rate converges at order two"""
        coarse = energy_rate_defect(one_on_one_run(Constant(1.0, 0.0), 4.0, 200))
        fine = energy_rate_defect(one_on_one_run(Constant(1.0, 0.0), 4.0, 400))
        self.assertGreaterEqual(observed_order(coarse, fine), 1.9)


class GrowthBoundTest(SimpleTestCase):
    """Test the quadratic lower bound of L_kappa."""

    def test_default_kernels(self):
        """Test epsilon and m0 for kappa_c = 1, nu = 2"""
        bound = quadratic_growth_bound(DEFAULT_KERNELS, 1.0, 2.0)
        self.assertAlmostEqual(bound.epsilon, 0.25)
        self.assertGreater(bound.m0, 3.5)
        self.assertLess(bound.m0, 4.5)

    def test_bound_holds_on_samples(self):
        """Test L_kappa >= (epsilon / 2)(|u|^2 + |v|^2) beyond m0"""
        bound = quadratic_growth_bound(DEFAULT_KERNELS, 1.0, 2.0)
        rng = np.random.default_rng(9)
        radii = rng.uniform(bound.m0 + 0.1, 40.0, 500)
        angles = rng.uniform(0, 2 * math.pi, 500)
        u = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
        v = rng.normal(scale=10.0, size=(500, 2))
        values = lyapunov_series(u, v, 1.0, 2.0, DEFAULT_KERNELS)
        lower = 0.5 * bound.epsilon * ((u * u).sum(axis=1) + (v * v).sum(axis=1))
        self.assertTrue(np.all(values >= lower))
        # the cross term is what the bound has to absorb
        self.assertTrue(np.any((perp(u) * v).sum(axis=1) > 0))

    def test_no_bound_outside_admissible_region(self):
        """Test that |kappa_c| >= nu sqrt(gamma_m) is rejected"""
        with self.assertRaises(NoOrbitError):
            quadratic_growth_bound(DEFAULT_KERNELS, 2.5, 2.0)
