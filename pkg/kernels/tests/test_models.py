"""
Tests for kernel families and KernelSet.
"""

import numpy as np
from django.test import SimpleTestCase

from kernels.models import (
    DEFAULT_KERNELS,
    Constant,
    DifferenceOfInversePowers,
    InversePower,
    KernelSet,
    build_kernel,
)


class KernelFamilyTest(SimpleTestCase):
    """Test the analytic kernel families."""

    def test_default_values(self):
        """Test that the default kernels evaluate to their closed forms"""
        r = np.array([0.05, 0.1, 0.5, 2.0])
        np.testing.assert_allclose(DEFAULT_KERNELS.f_d(r), 1.0)
        np.testing.assert_allclose(DEFAULT_KERNELS.f_e(r), 1.0 / r**2)
        np.testing.assert_allclose(DEFAULT_KERNELS.psi_d(r), 1.0 / (2.0 * r**4))
        np.testing.assert_allclose(DEFAULT_KERNELS.psi_e(r), 10.0 * (0.1**2 / r**2 - 0.1**4 / r**4), rtol=1e-12)

    def test_flocking_kernel_sign(self):
        """Test that psi_e is negative below 0.1 and positive above"""
        self.assertLess(DEFAULT_KERNELS.psi_e(0.05), 0.0)
        self.assertAlmostEqual(DEFAULT_KERNELS.psi_e(0.1), 0.0, places=12)
        self.assertGreater(DEFAULT_KERNELS.psi_e(0.5), 0.0)

    def test_derivatives_match_central_differences(self):
        """Test that analytic derivatives agree with central differences"""
        r = np.linspace(0.2, 3.0, 15)
        eps = 1e-6
        for kernel in (Constant(2.0), InversePower(1.5, 3), DifferenceOfInversePowers(0.1, 2, 0.001, 4)):
            numeric = (kernel(r + eps) - kernel(r - eps)) / (2 * eps)
            np.testing.assert_allclose(kernel.derivative(r), numeric, rtol=1e-6, atol=1e-9)

    def test_moment_primitive_differentiates_to_moment(self):
        """Test that d/dr of the moment primitive is r * phi(r)"""
        r = np.linspace(0.3, 4.0, 12)
        eps = 1e-6
        for kernel in (Constant(1.0), InversePower(1.0, 2), InversePower(0.5, 4), DifferenceOfInversePowers(0.1, 2, 0.001, 4)):
            numeric = (kernel.moment_primitive(r + eps) - kernel.moment_primitive(r - eps)) / (2 * eps)
            np.testing.assert_allclose(numeric, r * kernel(r), rtol=1e-6, atol=1e-9)


class KernelSetTest(SimpleTestCase):
    """Test KernelSet construction and serialization."""

    def test_gamma_read_from_far_field(self):
        """Test that gamma_m defaults to the far-field value of f_d"""
        self.assertEqual(DEFAULT_KERNELS.gamma_m, 1.0)

    def test_bad_sign_switch_rejected(self):
        """Test that psi_e_sign must be +1 or -1"""
        with self.assertRaises(ValueError):
            KernelSet(Constant(1.0), InversePower(1.0, 2), InversePower(0.5, 4), Constant(0.0), psi_e_sign=0)

    def test_config_rebuilds_same_kernels(self):
        """Test that to_config feeds build_kernel back to equal kernels"""
        config = DEFAULT_KERNELS.to_config()
        rebuilt = KernelSet(
            f_d=build_kernel(config['f_d']),
            f_e=build_kernel(config['f_e']),
            psi_d=build_kernel(config['psi_d']),
            psi_e=build_kernel(config['psi_e']),
            psi_e_sign=config['psi_e_sign'],
        )
        self.assertEqual(rebuilt, DEFAULT_KERNELS)

    def test_zero_family(self):
        """Test that the zero family builds a vanishing kernel"""
        kernel = build_kernel({'family': 'zero'})
        self.assertEqual(kernel(3.0), 0.0)
        self.assertEqual(kernel.to_config(), {'family': 'zero'})

    def test_unknown_family_rejected(self):
        """Test that an unknown family name raises ValueError"""
        with self.assertRaises(ValueError):
            build_kernel({'family': 'gaussian', 'width': 1.0})
