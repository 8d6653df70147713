"""
Closed-loop simulation: the steering law is re-evaluated at every Runge-Kutta
stage, the stopping law once per step from the state at the start of the step.
"""
import logging

import numpy as np

from controls.models import ControlBounds
from controls.utils import control_effort
from dynamics.integrators import _check_grid, rk4_step
from dynamics.models import HerdingModel, SystemState, Trajectory
from dynamics.utils import barycenter, gathering_radius, min_driver_evader_distance, system_rhs
from feedback.models import STOP_RULES, ClosedLoopReport, HysteresisState
from feedback.utils import feedback_circumvention, next_hysteresis
from main.exceptions import DivergenceError, UsageError

logger = logging.getLogger(__name__)


class _Steering:
    """Steering law on flat state vectors, counting degenerate evaluations."""

    def __init__(self, params, model, bounds):
        self.params = params
        self.model = model
        self.bounds = bounds
        self.degenerate = 0

    def __call__(self, t, x):
        state = SystemState.from_vector(t, x, self.model.n_drivers, self.model.n_evaders)
        values = [feedback_circumvention(state, self.params, j) for j in range(self.model.n_drivers)]
        self.degenerate += sum(value.degenerate for value in values)
        return self.bounds.clamp_kc(np.array([value.kappa_c for value in values]))


def run_closed_loop(scenario, params, t_f, n_steps=None, stop_rule='target', gathering=False, bounds=None, seed=None):
    """
    Simulate the feedback laws on a scenario.

    Args:
        scenario: Scenario (initial_state, kernel_set and friction_params are used)
        params: FeedbackParams
        t_f: Horizon
        n_steps: Number of RK4 steps over [0, t_f] (defaults to HERDING['N_STEPS'])
        stop_rule: 'target' stops once the barycenter is within params.stop_radius
            of the target; 'horizon' always runs to t_f
        gathering: Apply the hysteresis stopping law to kappa_p (otherwise kappa_p = 1)
        bounds: ControlBounds (defaults to ControlBounds())
        seed: Seed of the evader placement, recorded in the report

    Returns:
        (Trajectory, ClosedLoopReport); the trajectory ends at the stop time

    Raises:
        SingularityError: If two agents collide
        DivergenceError: If the state stops being finite
    """
    if stop_rule not in STOP_RULES:
        raise UsageError(f"Unknown stop rule {stop_rule!r}, expected one of {STOP_RULES}")
    n_steps = _check_grid(t_f, n_steps)
    bounds = bounds or ControlBounds()
    params.check_bounds(bounds)

    initial = scenario.initial_state()
    model = HerdingModel(kernels=scenario.kernel_set(), friction=scenario.friction_params())
    m, n = model.n_drivers, model.n_evaders
    if m != initial.n_drivers or n != initial.n_evaders:
        raise UsageError("Friction coefficients do not match the number of agents")
    steering = _Steering(params, model, bounds)

    times = np.linspace(0.0, float(t_f), n_steps + 1)
    states = np.empty((n_steps + 1, model.dimension))
    kp_nodes = np.ones((n_steps + 1, m))
    kc_nodes = np.empty((n_steps + 1, m))

    hysteresis = HysteresisState()
    switch_times = []
    x = initial.to_vector()
    states[0] = x
    last = n_steps
    for k in range(n_steps + 1):
        state = SystemState.from_vector(times[k], x, m, n)
        kc_nodes[k] = steering(times[k], x)
        if gathering:
            updated = next_hysteresis(gathering_radius(state), params, hysteresis)
            if updated != hysteresis:
                switch_times.append(float(times[k]))
                logger.debug(f"Pursuit {'stopped' if updated.stopped else 'resumed'} at t={times[k]:.4f}")
            hysteresis = updated
            kp_nodes[k] = bounds.clamp_kp(np.zeros(m) if hysteresis.stopped else np.ones(m))

        if stop_rule == 'target' and np.linalg.norm(barycenter(state) - params.target) < params.stop_radius:
            last = k
            break
        if k == n_steps:
            break

        kp = kp_nodes[k]

        def vector_field(t, y):
            return system_rhs(y, kp, steering(t, y), model)

        x = rk4_step(vector_field, times[k], x, times[k + 1] - times[k])
        if not np.all(np.isfinite(x)):
            raise DivergenceError(f"State became non-finite after t={times[k]}", last_valid_time=float(times[k]))
        states[k + 1] = x

    traj = Trajectory.from_vectors(
        times[:last + 1], states[:last + 1], kp_nodes[:last + 1], kc_nodes[:last + 1], m, n,
        model=model, metadata={'seed': seed},
    )
    radius_history = np.array([gathering_radius(traj.state_at(i)) for i in range(last + 1)])
    final_error = float(np.linalg.norm(traj.barycenters()[-1] - params.target))
    report = ClosedLoopReport(
        stop_rule=stop_rule,
        control_time=traj.t_f,
        reached=final_error < params.stop_radius,
        running_cost=float(control_effort(traj.times, traj.kc).sum() / m),
        final_error=final_error,
        min_distance=min(min_driver_evader_distance(dp, ep) for dp, ep in zip(traj.driver_pos, traj.evader_pos)),
        radius_history=radius_history,
        switch_times=switch_times,
        degenerate_evaluations=steering.degenerate,
        seed=seed,
    )
    log = logger.info if report.reached or stop_rule == 'horizon' else logger.warning
    log(f"Closed loop {report.status} at t={report.control_time:.4f}, error={final_error:.4g}, running cost={report.running_cost:.4f}")
    return traj, report
