"""
A posteriori estimation of the asymptotic pursuit and circumvention motions
from the tail of a one-driver, one-evader run.
"""
import logging
import math

import numpy as np

from diagnostics.models import FitReport
from diagnostics.utils import (
    circumvention_reference,
    circumvention_reference_at,
    pursuit_reference,
    require_equal_friction,
)
from main.conf import herding_setting
from main.exceptions import UsageError

logger = logging.getLogger(__name__)

MIN_TAIL_NODES = 5


def _tail(traj, tail_fraction):
    tail_fraction = herding_setting('TAIL_FRACTION') if tail_fraction is None else tail_fraction
    if not 0 < tail_fraction <= 1:
        raise UsageError(f"tail_fraction must lie in (0, 1], got {tail_fraction}")
    index = traj.tail_indices(tail_fraction)
    if len(index) < MIN_TAIL_NODES:
        raise UsageError(f"Tail has {len(index)} nodes, need at least {MIN_TAIL_NODES}")
    return index


def _circular_mean(angles):
    return math.atan2(np.sin(angles).mean(), np.cos(angles).mean())


def fit_pursuit(traj, tail_fraction=None):
    """
    Fit the linear pursuit motion to the tail of a pursuit-mode run.

    The evader track is fitted by a least-squares line; phi0 is the direction
    of the mean relative position u_d - u_e.

    Args:
        traj: Trajectory with one driver and one evader, carrying its model
        tail_fraction: Share of the run used (defaults to HERDING['TAIL_FRACTION'])

    Returns:
        FitReport whose residual is the largest distance of u_e from the line
    """
    nu = require_equal_friction(traj)
    index = _tail(traj, tail_fraction)
    times = traj.times[index]
    u, _ = traj.relative()
    u_e = traj.evader_pos[index, 0]

    coeffs = np.polyfit(times, u_e, 1)
    line = np.outer(times, coeffs[0]) + coeffs[1]
    residual = float(np.hypot(*(u_e - line).T).max())

    mean_offset = u[index].mean(axis=0)
    phi0 = math.atan2(mean_offset[1], mean_offset[0])
    reference = pursuit_reference(traj.model.kernels, nu, phi0, coeffs[1])
    radius = float(np.hypot(u[index, 0], u[index, 1]).mean())
    logger.debug(f"Pursuit fit: phi0={reference.phi0:.6f}, residual={residual:.3e}")
    return FitReport(reference=reference, residual=residual, radius=radius, angular_velocity=0.0)


def fit_circle(points):
    """
    Circle through (n, 2) points: algebraic fit followed by one Gauss-Newton
    step on the geometric distances.

    Returns:
        (center, radius)
    """
    x, y = points[:, 0], points[:, 1]
    design = np.column_stack([x, y, np.ones_like(x)])
    (a, b, c), *_ = np.linalg.lstsq(design, x * x + y * y, rcond=None)
    center = np.array([a / 2.0, b / 2.0])
    radius = math.sqrt(max(c + center @ center, 0.0))

    offsets = points - center
    dist = np.hypot(offsets[:, 0], offsets[:, 1])
    if np.all(dist > 0):
        jacobian = np.column_stack([-offsets[:, 0] / dist, -offsets[:, 1] / dist, -np.ones_like(dist)])
        step, *_ = np.linalg.lstsq(jacobian, -(dist - radius), rcond=None)
        center = center + step[:2]
        radius = radius + step[2]
    return center, float(radius)


def fit_circumvention(traj, tail_fraction=None):
    """
    Fit the periodic circumvention motion to the tail of a constant-kappa_c run.

    The evader circle gives the center u_c*; the unwrapped angle of
    u = u_d - u_e gives the angular velocity; phi1 is the circular mean of
    angle(u) - (kappa_c / nu) t.

    Returns:
        FitReport whose residual is the largest distance of u_e from the
        reference evader circle motion over the tail
    """
    nu = require_equal_friction(traj)
    index = _tail(traj, tail_fraction)
    kappa_c = float(traj.kc[index[0], 0])
    if not np.allclose(traj.kc[index], kappa_c) or kappa_c == 0:
        raise UsageError("Circumvention fit needs a constant nonzero kappa_c over the tail")

    times = traj.times[index]
    u, _ = traj.relative()
    u = u[index]
    angles = np.unwrap(np.arctan2(u[:, 1], u[:, 0]))
    angular_velocity = float(np.polyfit(times, angles, 1)[0])
    phi1 = _circular_mean(angles - (kappa_c / nu) * times)

    center, _ = fit_circle(traj.evader_pos[index, 0])
    reference = circumvention_reference(traj.model.kernels, kappa_c, nu, phi1, center)
    expected = np.array([circumvention_reference_at(reference, t)[1] for t in times])
    residual = float(np.hypot(*(traj.evader_pos[index, 0] - expected).T).max())
    radius = float(np.hypot(u[:, 0], u[:, 1]).mean())
    logger.debug(f"Circumvention fit: radius={radius:.6f}, omega={angular_velocity:.6f}, residual={residual:.3e}")
    return FitReport(reference=reference, residual=residual, radius=radius, angular_velocity=angular_velocity)
