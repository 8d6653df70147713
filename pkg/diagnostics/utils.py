"""
Energy and Lyapunov functionals, closed-form asymptotic motions and the
numerical checks built on them.
"""
import logging
import math

import numpy as np

from diagnostics.models import (
    CircumventionReference,
    DissipationReport,
    GrowthBound,
    PursuitReference,
)
from dynamics.models import SystemState
from dynamics.utils import perp
from kernels.utils import potential, solve_rc, solve_rp
from main.conf import herding_setting
from main.exceptions import NoOrbitError, TheoryScopeError, UsageError

logger = logging.getLogger(__name__)

DISSIPATION_MODES = ('pursuit', 'circumvention', 'release')

# (kappa_p, kappa_c) each mode runs under; None is any constant
MODE_CONTROLS = {'pursuit': (1.0, 0.0), 'circumvention': (1.0, None), 'release': (0.0, 0.0)}


def energy(rel, kernels):
    """
    Standard energy E = |v|^2 / 2 + P(|u|).

    Example:
        energy(RelativeState(u=(2, 0), v=(1, 1)), DEFAULT_KERNELS)  # 1.806853
    """
    return 0.5 * float(rel.v @ rel.v) + potential(kernels, rel.radius)


def lyapunov_kappa(rel, kappa_c, nu, kernels):
    """L_kappa = E - (kappa_c / nu) u^perp . v"""
    return energy(rel, kernels) - (kappa_c / nu) * float(perp(rel.u) @ rel.v)


def potential_series(kernels, radii):
    """Vectorized P(r) from the kernels' analytic moment primitives."""
    r_p = solve_rp(kernels)
    radii = np.asarray(radii, dtype=float)
    f_d, f_e = kernels.f_d, kernels.f_e
    return (f_d.moment_primitive(radii) - f_d.moment_primitive(r_p)) - (f_e.moment_primitive(radii) - f_e.moment_primitive(r_p))


def energy_series(u, v, kernels):
    """E at every node of (n, 2) relative position/velocity arrays."""
    return 0.5 * (v * v).sum(axis=1) + potential_series(kernels, np.hypot(u[:, 0], u[:, 1]))


def lyapunov_series(u, v, kappa_c, nu, kernels):
    return energy_series(u, v, kernels) - (kappa_c / nu) * (perp(u) * v).sum(axis=1)


def pursuit_reference(kernels, nu, phi0, u_e_star):
    """Build the linear pursuit motion with offset angle phi0 and evader anchor u_e_star."""
    r_p = solve_rp(kernels)
    u_star = r_p * np.array([math.cos(phi0), math.sin(phi0)])
    velocity = -float(kernels.f_d(r_p)) * u_star / nu
    return PursuitReference(
        phi0=float(phi0) % (2 * math.pi),
        u_e_star=np.asarray(u_e_star, dtype=float),
        r_p=r_p,
        velocity=velocity,
    )


def pursuit_reference_at(ref, t):
    """
    Positions on the linear pursuit motion at time t.

    Returns:
        (u_d, u_e) 2-vectors

    Example:
        pursuit_reference_at(pursuit_reference(DEFAULT_KERNELS, 2.0, 0.0, (0, 0)), 2.0)  # ((0, 0), (-1, 0))
    """
    u_e = ref.velocity * t + ref.u_e_star
    return u_e + ref.u_star, u_e


def circumvention_reference(kernels, kappa_c, nu, phi1=0.0, u_c_star=(0.0, 0.0)):
    """
    Build the periodic circumvention motion for constant kappa_c.

    With w = kappa_c / nu and z = u_d - u_e = r_c e^{i(wt + phi1)}, the evader
    is u_c* + A e^{iwt} with A = f_e(r_c) r_c e^{i phi1} / (w^2 - i nu w); the
    driver is the evader plus z.

    Raises:
        NoOrbitError: If kappa_c = 0 or |kappa_c| >= nu sqrt(gamma_m)
    """
    if kappa_c == 0:
        raise NoOrbitError("Circumvention needs a nonzero kappa_c")
    r_c = solve_rc(kernels, kappa_c, nu)
    w = kappa_c / nu
    offset = r_c * np.exp(1j * phi1)
    amplitude = float(kernels.f_e(r_c)) * offset / (w * w - 1j * nu * w)
    driver_amplitude = amplitude + offset
    return CircumventionReference(
        phi1=float(phi1),
        u_c_star=np.asarray(u_c_star, dtype=float),
        kappa_c=float(kappa_c),
        nu=float(nu),
        r_c=r_c,
        r_d=abs(driver_amplitude),
        r_e=abs(amplitude),
        phi_d=float(np.angle(driver_amplitude)),
        phi_e=float(np.angle(amplitude)),
        evader_amplitude=complex(amplitude),
    )


def _to_plane(z):
    return np.array([z.real, z.imag])


def circumvention_reference_at(ref, t):
    """Positions (u_d, u_e) on the circumvention motion at time t."""
    rotation = np.exp(1j * ref.angular_velocity * t)
    u_e = ref.u_c_star + _to_plane(ref.evader_amplitude * rotation)
    u_d = u_e + _to_plane(ref.r_c * np.exp(1j * ref.phi1) * rotation)
    return u_d, u_e


def reference_state(ref, t):
    """SystemState (one driver, one evader) on a reference motion, velocities included."""
    if isinstance(ref, PursuitReference):
        u_d, u_e = pursuit_reference_at(ref, t)
        return SystemState(t=t, driver_pos=[u_d], driver_vel=[ref.velocity], evader_pos=[u_e], evader_vel=[ref.velocity])
    w = ref.angular_velocity
    rotation = np.exp(1j * w * t)
    u_d, u_e = circumvention_reference_at(ref, t)
    evader_vel = 1j * w * ref.evader_amplitude * rotation
    driver_vel = evader_vel + 1j * w * ref.r_c * np.exp(1j * ref.phi1) * rotation
    return SystemState(t=t, driver_pos=[u_d], driver_vel=[_to_plane(driver_vel)], evader_pos=[u_e], evader_vel=[_to_plane(evader_vel)])


def require_equal_friction(traj):
    if traj.model is None:
        raise UsageError("Diagnostics need a trajectory that carries its model")
    if not traj.model.friction.equal_friction:
        raise TheoryScopeError("Diagnostics based on the relative equation require equal friction")
    return traj.model.friction.nu


def _require_mode_controls(traj, mode):
    kappa_p, kappa_c = MODE_CONTROLS[mode]
    if not np.allclose(traj.kp, kappa_p):
        raise UsageError(f"{mode} dissipation needs kappa_p = {kappa_p} throughout the run")
    if kappa_c is None:
        kappa_c = float(traj.kc[0, 0])
        if not np.allclose(traj.kc, kappa_c):
            raise UsageError(f"{mode} dissipation needs a constant kappa_c")
    elif not np.allclose(traj.kc, kappa_c):
        raise UsageError(f"{mode} dissipation needs kappa_c = {kappa_c} throughout the run")


def check_dissipation(traj, mode, tolerance=None):
    """
    Check that the functional matching the control mode never increases.

    pursuit: E along the run; circumvention: L_kappa with the run's constant
    kappa_c; release: |v_d(t)| against |v_d(0)| e^{-nu t} for the first driver.

    Args:
        traj: Trajectory with constant controls matching ``mode``
        mode: 'pursuit', 'circumvention' or 'release'
        tolerance: Allowed upward step (defaults to HERDING['DISSIPATION_TOLERANCE'])

    Returns:
        DissipationReport

    Raises:
        UsageError: If the controls of the run do not match ``mode``
    """
    if mode not in DISSIPATION_MODES:
        raise UsageError(f"Unknown dissipation mode {mode!r}, expected one of {DISSIPATION_MODES}")
    _require_mode_controls(traj, mode)
    tolerance = herding_setting('DISSIPATION_TOLERANCE') if tolerance is None else tolerance
    nu = require_equal_friction(traj)

    if mode == 'release':
        speed = np.hypot(traj.driver_vel[:, 0, 0], traj.driver_vel[:, 0, 1])
        deviation = np.abs(speed - speed[0] * np.exp(-nu * traj.times))
        report = DissipationReport(mode, speed, float(deviation.max()), tolerance)
    else:
        kernels = traj.model.kernels
        u, v = traj.relative()
        if mode == 'pursuit':
            values = energy_series(u, v, kernels)
        else:
            values = lyapunov_series(u, v, float(traj.kc[0, 0]), nu, kernels)
        violation = float(max(np.diff(values).max(initial=0.0), 0.0))
        report = DissipationReport(mode, values, violation, tolerance)

    if not report.passed:
        logger.warning(f"{mode} dissipation check failed: violation {report.max_violation:.3e} > {tolerance:.1e}")
    return report


def energy_rate_defect(traj):
    """
    Largest gap between the central-difference rate of E and -nu |v|^2
    over interior nodes of a pursuit-mode run.
    """
    nu = require_equal_friction(traj)
    u, v = traj.relative()
    values = energy_series(u, v, traj.model.kernels)
    steps = np.diff(traj.times)
    rate = (values[2:] - values[:-2]) / (steps[1:] + steps[:-1])
    expected = -nu * (v[1:-1] * v[1:-1]).sum(axis=1)
    return float(np.abs(rate - expected).max())


def observed_order(coarse_error, fine_error, refinement=2.0):
    """Convergence order from errors at step h and h / refinement."""
    if coarse_error <= 0 or fine_error <= 0:
        raise UsageError("Observed order needs positive errors")
    return math.log(coarse_error / fine_error) / math.log(refinement)


def quadratic_growth_bound(kernels, kappa_c, nu, r_max=50.0, samples=2000):
    """
    Constants for the quadratic lower bound of L_kappa.

    Young's inequality with weight sqrt(gamma_m) gives
    L_kappa >= (1 - w/sqrt(gamma)) |v|^2 / 2 + P(r) - (w sqrt(gamma) / 2) r^2, w = |kappa_c| / nu.
    epsilon is half the smaller of the two limiting coefficients; m0 is the
    first sampled radius past which the radial part dominates (epsilon / 2) r^2.

    Returns:
        GrowthBound

    Raises:
        NoOrbitError: If |kappa_c| >= nu sqrt(gamma_m)
        UsageError: If the bound does not settle before r_max
    """
    root_gamma = math.sqrt(kernels.gamma_m)
    w = abs(kappa_c) / nu
    if w >= root_gamma:
        raise NoOrbitError(f"|kappa_c| / nu = {w} must stay below sqrt(gamma_m) = {root_gamma}")
    epsilon = 0.5 * min(1.0 - w / root_gamma, root_gamma * (root_gamma - w))

    radii = np.linspace(0.05, r_max, samples)
    radial = potential_series(kernels, radii) - 0.5 * w * root_gamma * radii**2
    violated = np.nonzero(radial < 0.5 * epsilon * radii**2)[0]
    if len(violated) == 0:
        return GrowthBound(epsilon=epsilon, m0=float(radii[0]))
    last = violated[-1]
    if last == samples - 1:
        raise UsageError(f"Quadratic growth not reached by r_max={r_max}")
    return GrowthBound(epsilon=epsilon, m0=float(radii[last + 1]))
