"""
The steering (circumvention) and stopping (pursuit) feedback laws.
"""
import logging

import numpy as np

from dynamics.utils import barycenter, gathering_radius, perp
from feedback.models import HysteresisState, SteeringValue

logger = logging.getLogger(__name__)

DEGENERATE_NORM = 1e-9


def feedback_circumvention(state, params, j):
    """
    Steering law for driver j.

    kappa_c = -kappa_bar_c * (f . perp(d)) / (|f| |d|) with f = u_f - u_ec and
    d = u_dj - u_ec. The value is positive when the driver lies on the left
    of the ray from the barycenter u_ec to the target, so the driver turns
    counter-clockwise to get behind the herd.

    Args:
        state: SystemState
        params: FeedbackParams
        j: Driver index

    Returns:
        SteeringValue; (0, True) when the barycenter sits on the target or on the driver
    """
    center = barycenter(state)
    to_target = params.target - center
    to_driver = state.driver_pos[j] - center
    target_norm, driver_norm = np.linalg.norm(to_target), np.linalg.norm(to_driver)
    if target_norm < DEGENERATE_NORM or driver_norm < DEGENERATE_NORM:
        return SteeringValue(0.0, True)
    value = -params.kappa_bar_c * float(to_target @ perp(to_driver)) / (target_norm * driver_norm)
    return SteeringValue(float(np.clip(value, -params.kappa_bar_c, params.kappa_bar_c)), False)


def next_hysteresis(radius, params, hysteresis):
    """Stopping-law transition for a given gathering radius."""
    if not hysteresis.stopped and radius > params.gather_on:
        return HysteresisState(stopped=True)
    if hysteresis.stopped and radius < params.gather_off:
        return HysteresisState(stopped=False)
    return hysteresis


def feedback_pursuit(state, params, hysteresis):
    """
    Stopping law: every driver stops pursuing once the gathering radius
    exceeds ``gather_on`` and resumes when it falls below ``gather_off``.

    Returns:
        (kappa_p per driver, updated HysteresisState)
    """
    updated = next_hysteresis(gathering_radius(state), params, hysteresis)
    kp = np.zeros(state.n_drivers) if updated.stopped else np.ones(state.n_drivers)
    return kp, updated
