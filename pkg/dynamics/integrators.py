"""
Fixed-step classical Runge-Kutta integration of the herding system.
"""
import logging

import numpy as np

from controls.utils import control_function
from dynamics.models import HerdingModel, Trajectory
from dynamics.utils import relative_rhs_vector, system_rhs
from main.conf import herding_setting
from main.exceptions import DivergenceError, UsageError

logger = logging.getLogger(__name__)


def rk4_step(func, t, x, h):
    """One classical fourth-order Runge-Kutta step of x' = func(t, x)."""
    k1 = func(t, x)
    k2 = func(t + 0.5 * h, x + 0.5 * h * k1)
    k3 = func(t + 0.5 * h, x + 0.5 * h * k2)
    k4 = func(t + h, x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_grid(t_f, n_steps):
    if n_steps is None:
        n_steps = herding_setting('N_STEPS')
    if int(n_steps) != n_steps or n_steps < 1:
        raise UsageError(f"n_steps must be a positive integer, got {n_steps}")
    if not t_f > 0:
        raise UsageError(f"t_f must be positive, got {t_f}")
    return int(n_steps)


def integrate(initial, schedule, kernels, friction, t_f, n_steps=None, bounds=None):
    """
    Integrate the general system on a uniform grid over [0, t_f].

    The integration clock starts at 0 whatever ``initial.t`` says; schedules
    are read in that local time.

    Args:
        initial: SystemState
        schedule: ControlSchedule
        kernels: KernelSet
        friction: FrictionParams sized to the state
        t_f: Final time
        n_steps: Number of RK4 steps (defaults to HERDING['N_STEPS'])
        bounds: ControlBounds used to clamp sampled controls

    Returns:
        Trajectory with n_steps + 1 nodes, controls sampled at the nodes

    Raises:
        SingularityError: If a stage evaluates the right-hand side at a collision
        DivergenceError: If the state stops being finite
    """
    n_steps = _check_grid(t_f, n_steps)
    model = HerdingModel(kernels=kernels, friction=friction)
    if model.n_drivers != initial.n_drivers or model.n_evaders != initial.n_evaders:
        raise UsageError("Friction coefficients do not match the number of agents")

    controls_at = control_function(schedule, model.n_drivers, model.n_evaders, bounds)

    def vector_field(t, x):
        kp, kc = controls_at(t, x)
        return system_rhs(x, kp, kc, model)

    times = np.linspace(0.0, float(t_f), n_steps + 1)
    states = np.empty((n_steps + 1, model.dimension))
    kp_nodes = np.empty((n_steps + 1, model.n_drivers))
    kc_nodes = np.empty((n_steps + 1, model.n_drivers))

    x = initial.to_vector()
    states[0] = x
    kp_nodes[0], kc_nodes[0] = controls_at(times[0], x)
    for k in range(n_steps):
        x = rk4_step(vector_field, times[k], x, times[k + 1] - times[k])
        if not np.all(np.isfinite(x)):
            raise DivergenceError(f"State became non-finite after t={times[k]}", last_valid_time=float(times[k]))
        states[k + 1] = x
        kp_nodes[k + 1], kc_nodes[k + 1] = controls_at(times[k + 1], x)

    logger.debug(f"Integrated {model.n_drivers} drivers / {model.n_evaders} evaders to t={t_f} in {n_steps} steps")
    return Trajectory.from_vectors(times, states, kp_nodes, kc_nodes, model.n_drivers, model.n_evaders, model=model)


def integrate_relative(u0, v0, kappa_p, kappa_c, kernels, nu, t_f, n_steps=None):
    """
    Integrate the relative equation with constant controls.

    Returns:
        (times, u, v) with u, v of shape (n_steps + 1, 2)
    """
    n_steps = _check_grid(t_f, n_steps)
    times = np.linspace(0.0, float(t_f), n_steps + 1)
    y = np.concatenate([np.asarray(u0, dtype=float), np.asarray(v0, dtype=float)])
    out = np.empty((n_steps + 1, 4))
    out[0] = y

    def vector_field(t, y):
        return relative_rhs_vector(y, kappa_p, kappa_c, kernels, nu)

    for k in range(n_steps):
        y = rk4_step(vector_field, times[k], y, times[k + 1] - times[k])
        if not np.all(np.isfinite(y)):
            raise DivergenceError(f"Relative state became non-finite after t={times[k]}", last_valid_time=float(times[k]))
        out[k + 1] = y
    return times, out[:, :2], out[:, 2:]
