"""
Sampling, projection and time rescaling of control schedules.
"""
import numpy as np

from controls.models import (
    ControlBounds,
    FeedbackRef,
    SampledGrid,
    ScheduleSequence,
)
from dynamics.models import SystemState
from main.exceptions import UsageError


def _broadcast(values, n_drivers):
    if n_drivers is None:
        return np.array(values, dtype=float)
    try:
        return np.broadcast_to(np.asarray(values, dtype=float), (n_drivers,)).copy()
    except ValueError:
        raise UsageError(f"Schedule has {len(values)} drivers, expected {n_drivers}")


def _feedback_values(schedule, state, hysteresis=None):
    from feedback.models import HysteresisState
    from feedback.utils import feedback_circumvention, feedback_pursuit

    kc = np.array([
        feedback_circumvention(state, schedule.params, j).kappa_c
        for j in range(state.n_drivers)
    ])
    if schedule.gathering:
        kp, _ = feedback_pursuit(state, schedule.params, hysteresis or HysteresisState())
    else:
        kp = np.ones(state.n_drivers)
    return kp, kc


def _has_gathering(schedule):
    if isinstance(schedule, ScheduleSequence):
        return any(_has_gathering(piece) for piece in schedule.pieces)
    return isinstance(schedule, FeedbackRef) and schedule.gathering


def sample(schedule, t, state=None, bounds=None, n_drivers=None, hysteresis=None):
    """
    Evaluate a schedule at time t.

    Args:
        schedule: ControlSchedule
        t: Time in the schedule's own clock
        state: SystemState, required for feedback schedules
        bounds: ControlBounds applied to the result (defaults to ControlBounds())
        n_drivers: Broadcast scalar schedules to this many drivers
        hysteresis: HysteresisState for gathering feedback; only read, never updated

    Returns:
        (kappa_p, kappa_c) arrays, one entry per driver

    Raises:
        UsageError: If a feedback schedule is sampled without a state

    Example:
        sample(OffBangOff(t1=2, t2=9.256, kappa_c=1.0), 5.0)  # (array([1.]), array([1.]))
    """
    bounds = bounds or ControlBounds()
    if state is not None and n_drivers is None:
        n_drivers = state.n_drivers

    if isinstance(schedule, ScheduleSequence):
        piece, local = schedule.locate(t)
        return sample(piece, local, state=state, bounds=bounds, n_drivers=n_drivers, hysteresis=hysteresis)

    if isinstance(schedule, FeedbackRef):
        if state is None:
            raise UsageError("A feedback schedule can only be sampled with the current state")
        kp, kc = _feedback_values(schedule, state, hysteresis)
    else:
        kp, kc = schedule.values(t)

    return bounds.clamp_kp(_broadcast(kp, n_drivers)), bounds.clamp_kc(_broadcast(kc, n_drivers))


def control_function(schedule, n_drivers, n_evaders, bounds=None):
    """
    Adapt a schedule to the integrator: return a function (t, x) -> (kp, kc)
    on the flat state vector.

    Raises:
        UsageError: For a gathering feedback schedule, whose stopping law keeps
            a hysteresis memory between steps (use feedback.runner.run_closed_loop)
    """
    bounds = bounds or ControlBounds()
    if _has_gathering(schedule):
        raise UsageError("Gathering feedback needs the closed-loop runner, not a plain integration")

    if not schedule.needs_state:
        def controls_at(t, x):
            return sample(schedule, t, bounds=bounds, n_drivers=n_drivers)
    else:
        def controls_at(t, x):
            state = SystemState.from_vector(t, x, n_drivers, n_evaders)
            return sample(schedule, t, state=state, bounds=bounds, n_drivers=n_drivers)

    return controls_at


def project_bounds(schedule, bounds):
    """
    Clamp every node value of a sampled grid into the bounds.

    Args:
        schedule: SampledGrid
        bounds: ControlBounds

    Returns:
        SampledGrid on the same nodes
    """
    return SampledGrid(
        node_times=schedule.node_times,
        kappa_p=bounds.clamp_kp(schedule.kappa_p),
        kappa_c=bounds.clamp_kc(schedule.kappa_c),
    )


def to_sampled_grid(schedule, node_times, n_drivers, bounds=None):
    """Sample an open-loop schedule at the given node times."""
    if schedule.needs_state:
        raise UsageError("Feedback schedules have no open-loop node values")
    node_times = np.asarray(node_times, dtype=float)
    kp = np.empty((len(node_times), n_drivers))
    kc = np.empty((len(node_times), n_drivers))
    for k, t in enumerate(node_times):
        kp[k], kc[k] = sample(schedule, t, bounds=bounds, n_drivers=n_drivers)
    return SampledGrid(node_times=node_times, kappa_p=kp, kappa_c=kc)


def rescale_time(schedule, scaling):
    """
    Move a grid defined on s in [0, 1] to physical time t = T(s).

    Args:
        schedule: SampledGrid whose node times lie in [0, 1]
        scaling: TimeScaling

    Returns:
        (SampledGrid on [0, t_f], T, T^{-1}); the grid satisfies
        kappa(T(s_k)) = kappa_bar(s_k) at every node s_k

    Example:
        grid, T, T_inv = rescale_time(SampledGrid.uniform(1.0, kp, kc), TimeScaling.uniform(2.0))
    """
    if schedule.node_times[0] != 0.0 or abs(schedule.node_times[-1] - 1.0) > 1e-12:
        raise UsageError("rescale_time expects a schedule on s in [0, 1]")
    rescaled = SampledGrid(
        node_times=scaling.forward(schedule.node_times),
        kappa_p=schedule.kappa_p,
        kappa_c=schedule.kappa_c,
    )
    return rescaled, scaling.forward, scaling.inverse


def control_effort(node_times, values):
    """
    Exact integral of the square of a piecewise-linear signal.

    Args:
        node_times: (n+1,) node times
        values: (n+1,) or (n+1, M) node values

    Returns:
        float, or (M,) array for multi-column input
    """
    steps = np.diff(np.asarray(node_times, dtype=float))
    values = np.asarray(values, dtype=float)
    a, b = values[:-1], values[1:]
    if values.ndim > 1:
        steps = steps[:, None]
    return (steps / 3.0 * (a * a + a * b + b * b)).sum(axis=0)
