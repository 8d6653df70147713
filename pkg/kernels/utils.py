"""
Derived equilibrium quantities of a kernel set: the relative force, the
pursuit radius r_p, the circumvention radius r_c and the radial potential.
"""
from typing import NamedTuple
import logging
import math

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from main.conf import herding_setting
from main.exceptions import KernelDomainError, KernelInvalidError, NoOrbitError

logger = logging.getLogger(__name__)


class PotentialValue(NamedTuple):
    value: float
    singular: bool


def eval_relative_force(k, r):
    """
    Evaluate the relative force f(r) = f_d(r) - f_e(r).

    Args:
        k: KernelSet
        r: Positive distance

    Returns:
        float

    Raises:
        KernelDomainError: If r is not positive or the value is not finite

    Example:
        eval_relative_force(DEFAULT_KERNELS, 2.0)  # 0.75
    """
    r = float(r)
    if not r > 0 or not math.isfinite(r):
        raise KernelDomainError(f"Kernel distance must be positive and finite, got {r}")
    with np.errstate(all='ignore'):
        value = float(k.relative(r))
    if not math.isfinite(value):
        raise KernelDomainError(f"Relative force is not finite at r={r}")
    return value


def _polish(func, derivative, root):
    # One Newton step, kept only if it reduces the residual
    slope = derivative(root)
    if slope == 0 or not math.isfinite(slope):
        return root
    candidate = root - func(root) / slope
    if candidate > 0 and abs(func(candidate)) < abs(func(root)):
        return candidate
    return root


def _bracket_sign_change(func, start, stop):
    """Walk geometrically from start to stop; return the first (a, b) with func(a) < 0 <= func(b)."""
    a = start
    fa = func(a)
    while a < stop:
        b = min(2.0 * a, stop)
        fb = func(b)
        if fa < 0 <= fb:
            return a, b
        a, fa = b, fb
    return None


def solve_rp(k):
    """
    Find r_p, the sign-change root of f = f_d - f_e.

    Args:
        k: KernelSet

    Returns:
        float with |f(r_p)| below the root tolerance

    Raises:
        KernelInvalidError: If no sign change is found in the bracket search interval

    Example:
        solve_rp(DEFAULT_KERNELS)  # 1.0
    """
    lo = herding_setting('ROOT_BRACKET_MIN')
    hi = herding_setting('ROOT_BRACKET_MAX')
    bracket = _bracket_sign_change(lambda r: eval_relative_force(k, r), lo, hi)
    if bracket is None:
        raise KernelInvalidError(f"f = f_d - f_e has no sign change on [{lo}, {hi}]")
    root = brentq(lambda r: eval_relative_force(k, r), *bracket, xtol=herding_setting('ROOT_TOL'))
    return _polish(lambda r: eval_relative_force(k, r), lambda r: float(k.relative_derivative(r)), root)


def solve_rc(k, kappa_c, nu):
    """
    Find the circumvention radius r_c >= r_p solving f(r_c) = (kappa_c / nu)**2.

    Args:
        k: KernelSet
        kappa_c: Circumvention control value
        nu: Common friction coefficient

    Returns:
        float

    Raises:
        NoOrbitError: If |kappa_c| >= nu * sqrt(gamma_m)

    Example:
        solve_rc(DEFAULT_KERNELS, 1.0, 2.0)  # 2/sqrt(3)
    """
    if nu <= 0:
        raise NoOrbitError(f"Friction must be positive, got {nu}")
    if abs(kappa_c) >= nu * math.sqrt(k.gamma_m):
        raise NoOrbitError(
            f"No circumvention orbit: |kappa_c|={abs(kappa_c)} >= nu*sqrt(gamma_m)={nu * math.sqrt(k.gamma_m)}"
        )
    r_p = solve_rp(k)
    level = (kappa_c / nu) ** 2
    if level == 0:
        return r_p

    def residual(r):
        return eval_relative_force(k, r) - level

    hi = herding_setting('ROOT_BRACKET_MAX')
    b = r_p
    while residual(b) < 0:
        if b >= hi:
            raise NoOrbitError(f"f(r) stays below (kappa_c/nu)^2={level} up to r={hi}")
        b = min(2.0 * b, hi)
    if b == r_p:
        return r_p
    root = brentq(residual, r_p, b, xtol=herding_setting('ROOT_TOL'))
    return _polish(residual, lambda r: float(k.relative_derivative(r)), root)


def evaluate_potential(k, r):
    """
    Radial potential P(r) = integral from r_p to r of s f(s) ds, with saturation flag.

    Near a singular f_e the integral grows without bound as r -> 0; below the
    singularity distance, or when the value exceeds the saturation level, the
    saturation level is returned with ``singular=True``.

    Args:
        k: KernelSet
        r: Positive distance

    Returns:
        PotentialValue(value, singular)
    """
    r = float(r)
    if not r > 0:
        raise KernelDomainError(f"Potential requires r > 0, got {r}")
    saturation = herding_setting('POTENTIAL_SATURATION')
    if r < herding_setting('SINGULARITY_DISTANCE'):
        logger.warning(f"Potential saturated at r={r}")
        return PotentialValue(saturation, True)
    r_p = solve_rp(k)
    if r == r_p:
        return PotentialValue(0.0, False)
    with np.errstate(all='ignore'):
        value, _ = quad(lambda s: s * float(k.relative(s)), r_p, r, epsabs=1e-13, epsrel=1e-12, limit=200)
    if not math.isfinite(value) or value > saturation:
        logger.warning(f"Potential saturated at r={r}")
        return PotentialValue(saturation, True)
    return PotentialValue(value, False)


def potential(k, r):
    """
    Radial potential P(r) by adaptive quadrature.

    Example:
        potential(DEFAULT_KERNELS, 2.0)  # 1.5 - ln 2
    """
    return evaluate_potential(k, r).value


def closed_form_potential(k, r):
    """P(r) from the families' analytic moment primitives; used to cross-check quadrature."""
    r_p = solve_rp(k)
    fd, fe = k.f_d, k.f_e
    return float(
        (fd.moment_primitive(r) - fd.moment_primitive(r_p))
        - (fe.moment_primitive(r) - fe.moment_primitive(r_p))
    )


def check_kernels(k, samples=400):
    """
    Check the kernel-set invariants numerically.

    f_d must be finite, bounded and nonnegative, f_e finite and nonnegative and
    vanishing at large r, and f must be negative below r_p, nonnegative above it,
    with f'(r_p) > 0.

    Args:
        k: KernelSet
        samples: Number of grid points between the bracket limits

    Returns:
        r_p

    Raises:
        KernelInvalidError: If any invariant fails
    """
    errors = {}
    lo = herding_setting('ROOT_BRACKET_MIN')
    hi = herding_setting('ROOT_BRACKET_MAX')
    grid = np.geomspace(lo, hi, samples)

    with np.errstate(all='ignore'):
        fd = np.asarray(k.f_d(grid), dtype=float)
        fe = np.asarray(k.f_e(grid), dtype=float)
        far = float(k.f_e(1e6))

    if not np.all(np.isfinite(fd)) or fd.max() > 1e8 or fd.min() < 0:
        errors['f_d'] = 'f_d must be bounded and nonnegative'
    if not np.all(np.isfinite(fe)) or fe.min() < 0:
        errors['f_e'] = 'f_e must be finite and nonnegative'
    elif abs(far) > 1e-6:
        errors['f_e'] = 'f_e must vanish at large r'
    if not k.gamma_m > 0:
        errors['gamma_m'] = 'the limit of f_d at infinity must be positive'

    if errors:
        raise KernelInvalidError('; '.join(f"{key}: {value}" for key, value in errors.items()))

    r_p = solve_rp(k)
    f = fd - fe
    below = grid < r_p * (1 - 1e-9)
    above = grid > r_p * (1 + 1e-9)
    if np.any(f[below] >= 0):
        raise KernelInvalidError(f"f must be negative on (0, r_p={r_p})")
    if np.any(f[above] < -1e-12):
        raise KernelInvalidError(f"f must be nonnegative on [r_p={r_p}, inf)")
    if not float(k.relative_derivative(r_p)) > 0:
        raise KernelInvalidError(f"f'(r_p) must be positive at r_p={r_p}")
    return r_p
