"""
Right-hand sides of the general M-driver/N-evader system and of the
one-driver/one-evader relative equation.
"""
import numpy as np
from scipy.spatial.distance import cdist

from dynamics.models import Derivative, HerdingModel, SystemState, split_vector
from main.exceptions import SingularityError


def perp(a):
    """Rotate 2-vectors by +90 degrees: (a, b) -> (-b, a). Works on (..., 2) arrays."""
    a = np.asarray(a, dtype=float)
    return np.stack([-a[..., 1], a[..., 0]], axis=-1)


def barycenter(state):
    """
    Arithmetic mean of the evader positions.

    Args:
        state: SystemState

    Returns:
        (2,) array
    """
    return state.evader_pos.mean(axis=0)


def gathering_radius(state):
    """Largest distance from an evader to the evader barycenter."""
    offsets = state.evader_pos - barycenter(state)
    return float(np.max(np.hypot(offsets[:, 0], offsets[:, 1])))


def min_driver_evader_distance(driver_pos, evader_pos):
    return float(cdist(np.atleast_2d(driver_pos), np.atleast_2d(evader_pos)).min())


def _off_diagonal_weights(kernel, offsets, guard, kind):
    """Kernel weights for all ordered pairs of one population, zero on the diagonal."""
    count = offsets.shape[0]
    dist = np.hypot(offsets[..., 0], offsets[..., 1])
    off = ~np.eye(count, dtype=bool)
    if dist[off].min() < guard:
        masked = np.where(off, dist, np.inf)
        a, b = np.unravel_index(np.argmin(masked), masked.shape)
        raise SingularityError(f"{kind} agents {a} and {b} coincide", kind=kind, pair=(int(a), int(b)))
    return np.where(off, kernel(np.where(off, dist, 1.0)), 0.0)


def system_rhs(x, kp, kc, model):
    """
    Right-hand side F(x, kappa) of the general system on the flat state layout.

    Driver j:  -kp_j f_d(|w_j|) w_j + kc_j w_j^perp - nu_dj v_dj
               + (1/M) sum_l psi_d(|u_dj - u_dl|) (u_dj - u_dl),   w_j = u_dj - u_ec
    Evader i:  -(1/M) sum_j f_e(|u_dj - u_ei|) (u_dj - u_ei)
               + s (1/N) sum_k psi_e(|u_ek - u_ei|) (u_ek - u_ei) - nu_ei v_ei
    with s = kernels.psi_e_sign.

    Args:
        x: Flat state vector
        kp, kc: (M,) pursuit and circumvention controls
        model: HerdingModel

    Returns:
        Flat derivative vector

    Raises:
        SingularityError: If a driver meets an evader, or two agents of one
            population coincide
    """
    k = model.kernels
    n_drivers, n_evaders = model.n_drivers, model.n_evaders
    guard = model.singularity_distance
    dp, ep, dv, ev = split_vector(x, n_drivers, n_evaders)

    w = dp - ep.mean(axis=0)
    rw = np.hypot(w[:, 0], w[:, 1])
    acc_d = (-kp * k.f_d(rw))[:, None] * w + kc[:, None] * perp(w) - model.friction.nu_d[:, None] * dv

    # de[i, j] = u_dj - u_ei
    de = dp[None, :, :] - ep[:, None, :]
    r_de = np.hypot(de[..., 0], de[..., 1])
    if r_de.min() < guard:
        i, j = np.unravel_index(np.argmin(r_de), r_de.shape)
        raise SingularityError(
            f"Driver {j} and evader {i} coincide (distance {r_de[i, j]:.3e})",
            kind='driver-evader', pair=(int(j), int(i)),
        )
    acc_e = -(k.f_e(r_de)[..., None] * de).sum(axis=1) / n_drivers - model.friction.nu_e[:, None] * ev

    if n_drivers > 1:
        # dd[j, l] = u_dj - u_dl
        dd = dp[:, None, :] - dp[None, :, :]
        weights = _off_diagonal_weights(k.psi_d, dd, guard, 'driver')
        acc_d = acc_d + (weights[..., None] * dd).sum(axis=1) / n_drivers

    if n_evaders > 1:
        # ee[i, k] = u_ek - u_ei
        ee = ep[None, :, :] - ep[:, None, :]
        weights = _off_diagonal_weights(k.psi_e, ee, guard, 'evader')
        acc_e = acc_e + k.psi_e_sign * (weights[..., None] * ee).sum(axis=1) / n_evaders

    return np.concatenate([dv.ravel(), ev.ravel(), acc_d.ravel(), acc_e.ravel()])


def rhs_general(state, controls, kernels, friction):
    """
    Evaluate the general system at one state.

    Args:
        state: SystemState
        controls: Per-driver (kappa_p, kappa_c) pairs, shape (M, 2)
        kernels: KernelSet
        friction: FrictionParams

    Returns:
        Derivative

    Example:
        rhs_general(state, [(1.0, 0.0)], DEFAULT_KERNELS, FrictionParams.uniform(2.0))
    """
    controls = np.asarray(controls, dtype=float).reshape(state.n_drivers, 2)
    model = HerdingModel(kernels=kernels, friction=friction)
    dx = system_rhs(state.to_vector(), controls[:, 0], controls[:, 1], model)
    return Derivative.from_vector(dx, state.n_drivers, state.n_evaders)


def rhs_relative(u, v, kappa_p, kappa_c, kernels, nu):
    """
    Relative equation u'' = -(kp f_d(|u|) - f_e(|u|)) u - nu u' + kc u^perp.

    Args:
        u, v: Relative position and velocity (2-vectors)
        kappa_p, kappa_c: Scalar controls
        kernels: KernelSet
        nu: Common friction coefficient

    Returns:
        (velocity, acceleration) pair of 2-vectors
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    r = float(np.hypot(u[0], u[1]))
    if r == 0.0:
        raise SingularityError("Relative position vanished", kind='driver-evader', pair=(0, 0))
    acc = -(kappa_p * kernels.f_d(r) - kernels.f_e(r)) * u - nu * v + kappa_c * perp(u)
    return v.copy(), acc


def relative_rhs_vector(y, kappa_p, kappa_c, kernels, nu):
    """rhs_relative on the packed vector (u, v)."""
    vel, acc = rhs_relative(y[:2], y[2:], kappa_p, kappa_c, kernels, nu)
    return np.concatenate([vel, acc])


def translate_state(state, offset):
    offset = np.asarray(offset, dtype=float)
    return SystemState(
        t=state.t,
        driver_pos=state.driver_pos + offset,
        driver_vel=state.driver_vel,
        evader_pos=state.evader_pos + offset,
        evader_vel=state.evader_vel,
    )


def mirror_state(state):
    """Reflect a state across the x-axis."""
    flip = np.array([1.0, -1.0])
    return SystemState(
        t=state.t,
        driver_pos=state.driver_pos * flip,
        driver_vel=state.driver_vel * flip,
        evader_pos=state.evader_pos * flip,
        evader_vel=state.evader_vel * flip,
    )
