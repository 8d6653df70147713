"""
Tests for the vector-Jacobian products against central differences.
"""

import numpy as np
from django.test import SimpleTestCase

from dynamics.jacobians import control_vjp, state_vjp
from dynamics.models import FrictionParams, HerdingModel, SystemState
from dynamics.utils import system_rhs
from kernels.models import DEFAULT_KERNELS, KernelSet


def numeric_jacobian(func, x, eps=1e-6):
    columns = []
    for i in range(len(x)):
        step = np.zeros_like(x)
        step[i] = eps
        columns.append((func(x + step) - func(x - step)) / (2 * eps))
    return np.array(columns).T


class StateVjpTest(SimpleTestCase):
    """Test state_vjp for several population sizes."""

    def setUp(self):
        self.rng = np.random.default_rng(11)

    def make_case(self, n_drivers, n_evaders, kernels=DEFAULT_KERNELS):
        drivers = np.array([(-2.0, 0.3 + 0.8 * j) for j in range(n_drivers)])
        evaders = np.array([(0.5 * i, 0.4 * (i % 2)) for i in range(n_evaders)])
        state = SystemState(
            t=0.0,
            driver_pos=drivers,
            driver_vel=self.rng.normal(size=drivers.shape),
            evader_pos=evaders,
            evader_vel=self.rng.normal(size=evaders.shape),
        )
        friction = FrictionParams(nu_d=1.0 + self.rng.random(n_drivers), nu_e=1.0 + self.rng.random(n_evaders))
        model = HerdingModel(kernels, friction)
        kp = self.rng.random(n_drivers)
        kc = self.rng.normal(size=n_drivers)
        return state.to_vector(), kp, kc, model

    def assert_vjp_matches(self, n_drivers, n_evaders, kernels=DEFAULT_KERNELS):
        x, kp, kc, model = self.make_case(n_drivers, n_evaders, kernels)
        jacobian = numeric_jacobian(lambda y: system_rhs(y, kp, kc, model), x)
        cotangent = self.rng.normal(size=len(x))
        np.testing.assert_allclose(state_vjp(x, kp, kc, model, cotangent), jacobian.T @ cotangent, rtol=1e-6, atol=1e-7)

    def test_one_driver_one_evader(self):
        """Test the single-pair system"""
        self.assert_vjp_matches(1, 1)

    def test_two_drivers_two_evaders(self):
        """Test a system with both same-population interactions"""
        self.assert_vjp_matches(2, 2)

    def test_three_drivers_four_evaders(self):
        """Test a larger system with unequal friction"""
        self.assert_vjp_matches(3, 4)

    def test_opposite_flocking_sign(self):
        """Test the alternative evader-evader sign convention"""
        kernels = KernelSet(DEFAULT_KERNELS.f_d, DEFAULT_KERNELS.f_e, DEFAULT_KERNELS.psi_d, DEFAULT_KERNELS.psi_e, psi_e_sign=-1)
        self.assert_vjp_matches(2, 3, kernels)


class ControlVjpTest(SimpleTestCase):
    """Test control_vjp."""

    def test_matches_central_differences(self):
        """Test both control gradients against differences of the right-hand side"""
        rng = np.random.default_rng(3)
        state = SystemState.at_rest([(-2.0, 0.5), (-1.0, -1.5)], [(0.0, 0.0), (0.3, 0.2)])
        model = HerdingModel(DEFAULT_KERNELS, FrictionParams.uniform(2.0, 2, 2))
        x = state.to_vector()
        kp, kc = np.array([0.7, 0.2]), np.array([1.0, -0.5])
        cotangent = rng.normal(size=len(x))
        g_kp, g_kc = control_vjp(x, model, cotangent)

        jac_kp = numeric_jacobian(lambda p: system_rhs(x, p, kc, model), kp)
        jac_kc = numeric_jacobian(lambda c: system_rhs(x, kp, c, model), kc)
        np.testing.assert_allclose(g_kp, jac_kp.T @ cotangent, rtol=1e-7, atol=1e-9)
        np.testing.assert_allclose(g_kc, jac_kc.T @ cotangent, rtol=1e-7, atol=1e-9)
