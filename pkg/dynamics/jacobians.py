"""
Vector-Jacobian products of the system right-hand side.

For a cotangent c (same layout as the state), state_vjp returns
(dF/dx)^T c and control_vjp returns (dF/dkappa_p)^T c, (dF/dkappa_c)^T c.
These drive the discrete adjoint in optimal_control.
"""
import numpy as np

from dynamics.models import split_vector
from dynamics.utils import perp


def _radial_jacobian_apply(kernel, offsets, cotangent, mask=None):
    """
    Apply the (symmetric) Jacobian of d -> phi(|d|) d to a cotangent:
    phi c + (phi'/r) (d . c) d, for stacked offsets.
    """
    dist = np.hypot(offsets[..., 0], offsets[..., 1])
    if mask is not None:
        dist = np.where(mask, dist, 1.0)
    value = kernel(dist)
    slope = kernel.derivative(dist) / dist
    if mask is not None:
        value = np.where(mask, value, 0.0)
        slope = np.where(mask, slope, 0.0)
    projection = (offsets * cotangent).sum(axis=-1)
    return value[..., None] * cotangent + (slope * projection)[..., None] * offsets


def state_vjp(x, kp, kc, model, cotangent):
    """
    Return (dF/dx)^T cotangent at state x.

    Args:
        x: Flat state vector
        kp, kc: (M,) controls
        model: HerdingModel
        cotangent: Flat vector with the state layout

    Returns:
        Flat vector with the state layout
    """
    k = model.kernels
    n_drivers, n_evaders = model.n_drivers, model.n_evaders
    dp, ep, dv, ev = split_vector(x, n_drivers, n_evaders)
    c_dp, c_ep, c_ad, c_ae = split_vector(np.asarray(cotangent, dtype=float), n_drivers, n_evaders)

    g_dp = np.zeros_like(dp)
    g_ep = np.zeros_like(ep)
    # position rates are the velocities
    g_dv = c_dp - model.friction.nu_d[:, None] * c_ad
    g_ev = c_ep - model.friction.nu_e[:, None] * c_ae

    # pursuit and circumvention about the barycenter
    w = dp - ep.mean(axis=0)
    rw = np.hypot(w[:, 0], w[:, 1])
    radial = k.f_d(rw)[:, None] * c_ad + (k.f_d.derivative(rw) / rw * (w * c_ad).sum(axis=1))[:, None] * w
    q = -kp[:, None] * radial - kc[:, None] * perp(c_ad)
    g_dp += q
    g_ep -= q.sum(axis=0) / n_evaders

    # repulsion of evaders by drivers, de[i, j] = u_dj - u_ei
    de = dp[None, :, :] - ep[:, None, :]
    s = -_radial_jacobian_apply(k.f_e, de, np.broadcast_to(c_ae[:, None, :], de.shape)) / n_drivers
    g_dp += s.sum(axis=0)
    g_ep -= s.sum(axis=1)

    if n_drivers > 1:
        dd = dp[:, None, :] - dp[None, :, :]
        off = ~np.eye(n_drivers, dtype=bool)
        s = _radial_jacobian_apply(k.psi_d, dd, np.broadcast_to(c_ad[:, None, :], dd.shape), off) / n_drivers
        g_dp += s.sum(axis=1)
        g_dp -= s.sum(axis=0)

    if n_evaders > 1:
        # ee[i, k] = u_ek - u_ei
        ee = ep[None, :, :] - ep[:, None, :]
        off = ~np.eye(n_evaders, dtype=bool)
        s = k.psi_e_sign * _radial_jacobian_apply(k.psi_e, ee, np.broadcast_to(c_ae[:, None, :], ee.shape), off) / n_evaders
        g_ep += s.sum(axis=0)
        g_ep -= s.sum(axis=1)

    return np.concatenate([g_dp.ravel(), g_ep.ravel(), g_dv.ravel(), g_ev.ravel()])


def control_vjp(x, model, cotangent):
    """
    Return ((dF/dkappa_p)^T c, (dF/dkappa_c)^T c), each of shape (M,).

    F is affine in the controls, so the result does not depend on their values.
    """
    k = model.kernels
    dp, ep, _, _ = split_vector(x, model.n_drivers, model.n_evaders)
    _, _, c_ad, _ = split_vector(np.asarray(cotangent, dtype=float), model.n_drivers, model.n_evaders)
    w = dp - ep.mean(axis=0)
    rw = np.hypot(w[:, 0], w[:, 1])
    g_kp = ((-k.f_d(rw))[:, None] * w * c_ad).sum(axis=1)
    g_kc = (perp(w) * c_ad).sum(axis=1)
    return g_kp, g_kc
