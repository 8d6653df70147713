"""
Shooting searches that steer the evader through a target point with
off-bang-off or constant circumvention controls.

Each search scans a coarse grid (one long simulation per row, final times
read off the dense trajectory) and refines the best cells with Nelder-Mead.
"""
import logging

import numpy as np
from scipy.optimize import minimize

from controllability.models import ConstantReachResult, ReachResult, WaypointsResult
from controls.models import Constant, OffBangOff, ScheduleSequence
from diagnostics.fitting import fit_circumvention
from dynamics.integrators import integrate
from dynamics.models import SystemState, Trajectory
from main.conf import herding_setting
from main.exceptions import DivergenceError, NoOrbitError, SingularityError, TheoryScopeError, UsageError

logger = logging.getLogger(__name__)

# Number of best grid cells used to seed the refinement
REFINEMENT_SEEDS = 3
# Simulated time after t1 used to settle on the stable orbit
ORBIT_SETTLING_TIME = 50.0


def _check_single_pair(initial, friction):
    if initial.n_drivers != 1 or initial.n_evaders != 1:
        raise UsageError("Reach searches need exactly one driver and one evader")
    if not friction.equal_friction:
        raise TheoryScopeError("Reach searches require equal friction")
    if np.allclose(initial.driver_pos[0], initial.evader_pos[0]):
        raise UsageError("singular initial data: driver and evader start at the same point")


def _restart(state):
    return SystemState(
        t=0.0,
        driver_pos=state.driver_pos,
        driver_vel=state.driver_vel,
        evader_pos=state.evader_pos,
        evader_vel=state.evader_vel,
    )


def _scan(initial, schedule, kernels, friction, horizon, n_steps, tf_grid, target):
    """Distance of the evader barycenter from the target at every tf_grid time, from one run."""
    try:
        traj = integrate(initial, schedule, kernels, friction, horizon, n_steps)
    except (SingularityError, DivergenceError) as exc:
        logger.debug(f"Scan run failed: {exc}")
        return np.full(len(tf_grid), np.inf)
    center = traj.barycenters()
    x = np.interp(tf_grid, traj.times, center[:, 0])
    y = np.interp(tf_grid, traj.times, center[:, 1])
    return np.hypot(x - target[0], y - target[1])


class _Search:
    """Objective wrapper that counts runs and keeps the best point seen."""

    def __init__(self, simulate, target, budget):
        self.simulate = simulate
        self.target = target
        self.budget = budget
        self.evaluations = 0
        self.best_error = np.inf
        self.best_point = None

    @property
    def remaining(self):
        return self.budget - self.evaluations

    def error_at(self, point):
        self.evaluations += 1
        try:
            traj = self.simulate(point)
        except (SingularityError, DivergenceError):
            return np.inf
        error = float(np.linalg.norm(traj.barycenters()[-1] - self.target))
        if error < self.best_error:
            self.best_error, self.best_point = error, np.array(point, dtype=float)
        return error

    def __call__(self, point):
        return self.error_at(point) ** 2

    def refine(self, start):
        if self.remaining <= 0:
            return
        minimize(
            self,
            np.asarray(start, dtype=float),
            method='Nelder-Mead',
            options={'maxfev': self.remaining, 'xatol': 1e-6, 'fatol': 1e-12},
        )


def _best_cells(errors, count=REFINEMENT_SEEDS):
    order = np.argsort(errors, axis=None)[:count]
    return [np.unravel_index(index, errors.shape) for index in order if np.isfinite(errors.flat[index])]


def _off_bang_off(spec, t1, t2, t_f):
    kappa_c = 0.0 if spec.pursuit_only else spec.kappa_c
    t2 = min(max(t2, t1), max(t_f, t1))
    return OffBangOff(t1=t1, t2=t2, kappa_c=kappa_c, kappa_p=spec.kappa_p)


def _reach_with_t1(initial, kernels, friction, spec, t1):
    tf_low, tf_high = spec.tf_range
    tf_grid = np.linspace(tf_low, tf_high, spec.grid)

    if spec.pursuit_only:
        rows = [t1]
    else:
        rows = np.linspace(t1, max(spec.t2_max, t1), spec.grid)
    errors = np.array([
        _scan(initial, _off_bang_off(spec, t1, t2, tf_high), kernels, friction, tf_high, spec.n_steps, tf_grid, spec.target)
        for t2 in rows
    ])

    def clip(point):
        if spec.pursuit_only:
            return t1, float(np.clip(point[0], tf_low, tf_high))
        return float(np.clip(point[0], t1, max(spec.t2_max, t1))), float(np.clip(point[1], tf_low, tf_high))

    def simulate(point):
        t2, t_f = clip(point)
        return integrate(initial, _off_bang_off(spec, t1, t2, t_f), kernels, friction, t_f, spec.n_steps)

    search = _Search(simulate, spec.target, spec.budget)
    for row, column in _best_cells(errors):
        start = [tf_grid[column]] if spec.pursuit_only else [rows[row], tf_grid[column]]
        search.refine(start)
        if search.best_error <= spec.tolerance:
            break

    if search.best_point is None:
        row, column = _best_cells(errors, 1)[0] if np.isfinite(errors).any() else (0, 0)
        search.best_point = np.array([tf_grid[column]] if spec.pursuit_only else [rows[row], tf_grid[column]])

    t2, t_f = clip(search.best_point)
    schedule = _off_bang_off(spec, t1, t2, t_f)
    traj = integrate(initial, schedule, kernels, friction, t_f, spec.n_steps)
    error = float(np.linalg.norm(traj.barycenters()[-1] - spec.target))
    return ReachResult(
        schedule=schedule,
        t_f=t_f,
        achieved_error=error,
        reached=error <= spec.tolerance,
        trajectory=traj,
        t1_tried=(t1,),
        evaluations=len(rows) + search.evaluations,
    )


def stable_orbit_exclusion(initial, kernels, friction, kappa_c, t1, kappa_p=1.0, n_steps=None):
    """
    Disc the evader cannot pass through once it circles under constant
    kappa_c switched on at t1.

    Returns:
        (center, r_e) of the settled evader circle

    Raises:
        NoOrbitError: If kappa_c admits no circumvention orbit
    """
    horizon = t1 + ORBIT_SETTLING_TIME
    n_steps = n_steps or int(100 * horizon)
    schedule = OffBangOff(t1=t1, t2=horizon, kappa_c=kappa_c, kappa_p=kappa_p)
    traj = integrate(initial, schedule, kernels, friction, horizon, n_steps)
    report = fit_circumvention(traj)
    return report.reference.u_c_star, report.reference.r_e


def reach_from(initial, kernels, friction, spec):
    """reach_point on explicit initial data."""
    _check_single_pair(initial, friction)
    nu = friction.nu
    if abs(spec.kappa_c) >= nu * np.sqrt(spec.kappa_p * kernels.gamma_m):
        raise NoOrbitError(f"|kappa_c|={abs(spec.kappa_c)} must stay below nu*sqrt(kappa_p*gamma_m)")

    best = _reach_with_t1(initial, kernels, friction, spec, spec.t1)
    tried = [spec.t1]
    evaluations = best.evaluations

    if not best.reached and not spec.pursuit_only and spec.kappa_c != 0:
        center, radius = stable_orbit_exclusion(initial, kernels, friction, spec.kappa_c, spec.t1, spec.kappa_p)
        if np.linalg.norm(spec.target - center) <= radius:
            logger.info(f"Target lies inside the stable orbit for t1={spec.t1}; retrying with {spec.retry_t1}")
            for t1 in spec.retry_t1:
                if t1 > spec.t2_max:
                    break
                attempt = _reach_with_t1(initial, kernels, friction, spec, t1)
                tried.append(t1)
                evaluations += attempt.evaluations
                if attempt.achieved_error < best.achieved_error:
                    best = attempt
                if best.reached:
                    break

    result = ReachResult(
        schedule=best.schedule,
        t_f=best.t_f,
        achieved_error=best.achieved_error,
        reached=best.reached,
        trajectory=best.trajectory,
        t1_tried=tuple(tried),
        evaluations=evaluations,
    )
    if result.reached:
        logger.info(f"Reached {spec.target.tolist()} with t2={result.schedule.t2:.4f}, t_f={result.t_f:.4f}, error={result.achieved_error:.4f}")
    else:
        logger.warning(f"Target {spec.target.tolist()} not reached; best error {result.achieved_error:.4f}")
    return result


def reach_point(scenario, spec):
    """
    Find an off-bang-off control that brings the evader within
    spec.tolerance of spec.target at some final time.

    Args:
        scenario: Scenario with one driver and one evader
        spec: ReachSpec

    Returns:
        ReachResult; a miss is reported with its best candidate, not raised

    Raises:
        UsageError: For more than one agent per population or coincident start
        TheoryScopeError: For unequal friction
        NoOrbitError: If kappa_c is too large for a circumvention orbit
    """
    return reach_from(scenario.initial_state(), scenario.kernel_set(), scenario.friction_params(), spec)


def concatenate_trajectories(trajectories):
    """Join legs that each start where the previous one ended, shifting their clocks."""
    times, states, kp, kc = [], [], [], []
    offset = 0.0
    for index, traj in enumerate(trajectories):
        keep = slice(0 if index == 0 else 1, None)
        times.append(traj.times[keep] + offset)
        states.append(traj.state_vectors()[keep])
        kp.append(traj.kp[keep])
        kc.append(traj.kc[keep])
        offset += traj.t_f
    first = trajectories[0]
    return Trajectory.from_vectors(
        np.concatenate(times), np.concatenate(states), np.concatenate(kp), np.concatenate(kc),
        first.n_drivers, first.n_evaders, model=first.model,
    )


def reach_waypoints(scenario, targets, spec):
    """
    Visit targets one by one, each leg starting from the end state of the
    previous one.

    Args:
        scenario: Scenario with one driver and one evader
        targets: Sequence of 2-vectors
        spec: ReachSpec used as a template; its target is replaced per leg

    Returns:
        WaypointsResult with the legs, the concatenated schedule and
        trajectory, and the index of the first missed leg if any
    """
    kernels, friction = scenario.kernel_set(), scenario.friction_params()
    state = scenario.initial_state()
    legs = []
    failed_leg = None
    for index, target in enumerate(targets):
        leg = reach_from(_restart(state), kernels, friction, spec.with_target(target))
        legs.append(leg)
        if not leg.reached:
            failed_leg = index
            break
        state = leg.trajectory.final_state

    if not legs:
        return WaypointsResult()
    starts = np.concatenate([[0.0], np.cumsum([leg.t_f for leg in legs])[:-1]])
    return WaypointsResult(
        legs=legs,
        schedule=ScheduleSequence(starts=tuple(starts), pieces=tuple(leg.schedule for leg in legs)),
        trajectory=concatenate_trajectories([leg.trajectory for leg in legs]),
        failed_leg=failed_leg,
    )


def constant_control_reach(scenario, target, tol=None, kappa_range=None, tf_range=(0.5, 25.0), grid=None, budget=None, n_steps=None):
    """
    Find a constant kappa_c (kappa_p = 1) and final time that bring the
    evader within tol of target.

    Args:
        scenario: Scenario with one driver and one evader
        target: 2-vector
        tol: Success radius (defaults to HERDING['REACH_TOLERANCE'])
        kappa_range: Search interval for kappa_c; defaults to 98% of the
            circumvention-orbit limit nu*sqrt(gamma_m) on either side
        tf_range: Search interval for t_f

    Returns:
        ConstantReachResult
    """
    initial, kernels, friction = scenario.initial_state(), scenario.kernel_set(), scenario.friction_params()
    _check_single_pair(initial, friction)
    tol = herding_setting('REACH_TOLERANCE') if tol is None else tol
    grid = grid or herding_setting('REACH_GRID')
    budget = herding_setting('REACH_BUDGET') if budget is None else budget
    n_steps = n_steps or herding_setting('N_STEPS')
    target = np.asarray(target, dtype=float)
    limit = 0.98 * friction.nu * np.sqrt(kernels.gamma_m)
    low, high = kappa_range or (-limit, limit)
    tf_low, tf_high = tf_range

    kappas = np.linspace(low, high, grid)
    tf_grid = np.linspace(tf_low, tf_high, grid)
    errors = np.array([
        _scan(initial, Constant(1.0, kappa), kernels, friction, tf_high, n_steps, tf_grid, target)
        for kappa in kappas
    ])

    def clip(point):
        return float(np.clip(point[0], low, high)), float(np.clip(point[1], tf_low, tf_high))

    def simulate(point):
        kappa, t_f = clip(point)
        return integrate(initial, Constant(1.0, kappa), kernels, friction, t_f, n_steps)

    search = _Search(simulate, target, budget)
    for row, column in _best_cells(errors):
        search.refine([kappas[row], tf_grid[column]])
        if search.best_error <= tol:
            break
    if search.best_point is None:
        row, column = _best_cells(errors, 1)[0] if np.isfinite(errors).any() else (0, 0)
        search.best_point = np.array([kappas[row], tf_grid[column]])

    kappa, t_f = clip(search.best_point)
    schedule = Constant(1.0, kappa)
    traj = integrate(initial, schedule, kernels, friction, t_f, n_steps)
    error = float(np.linalg.norm(traj.barycenters()[-1] - target))
    if error <= tol:
        logger.info(f"Constant control kappa_c={kappa:.4f} reaches {target.tolist()} at t_f={t_f:.4f}")
    else:
        logger.warning(f"Constant control search missed {target.tolist()}; best error {error:.4f}")
    return ConstantReachResult(
        kappa_c=kappa,
        t_f=t_f,
        achieved_error=error,
        reached=error <= tol,
        schedule=schedule,
        trajectory=traj,
        evaluations=grid + search.evaluations,
    )
