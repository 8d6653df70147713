"""
Projected gradient descent for the guidance and stabilization problems.
"""
import logging

import numpy as np

from controllability.models import ReachSpec
from controllability.utils import constant_control_reach, reach_point
from controls.models import Constant, SampledGrid, ScheduleSequence, TimeScaling
from controls.utils import rescale_time, to_sampled_grid
from dynamics.models import Trajectory
from main.conf import herding_setting
from main.exceptions import DivergenceError, SingularityError, UsageError
from optimal_control.adjoint import evaluate, gradient
from optimal_control.costs import trapezoid_weights
from optimal_control.models import CostWeights, Iterate, OcpProblem, OcpSolution

logger = logging.getLogger(__name__)

GUESS_KINDS = ('constant', 'off_bang_off', 'hand')


def build_initial_guess(scenario, kind, target=None, hand=None, n_steps=None):
    """
    Starting schedule and final time for the optimizer.

    Args:
        scenario: Scenario
        kind: 'constant' (best constant circumvention control), 'off_bang_off'
            (shooting search) or 'hand' (piecewise-constant rows)
        target: u_f (defaults to the scenario target)
        hand: Rows (start, kappa_c of each driver), first start 0
        n_steps: Grid of the searches

    Returns:
        (ControlSchedule, t_f)
    """
    target = scenario.target if target is None else target
    if kind == 'hand':
        rows = [list(row) for row in (hand if hand is not None else scenario.optimization.hand_guess)]
        if not rows:
            raise UsageError("A hand-specified guess needs at least one row (start, kappa_c...)")
        pieces = tuple(Constant(1.0, row[1:]) for row in rows)
        schedule = ScheduleSequence(starts=tuple(row[0] for row in rows), pieces=pieces)
        return schedule, float(scenario.integrator.t_f)

    if target is None:
        raise UsageError("The initial-guess searches need a target")
    if kind == 'constant':
        result = constant_control_reach(scenario, target, n_steps=n_steps)
        return result.schedule, result.t_f
    if kind == 'off_bang_off':
        block = scenario.reach
        spec = ReachSpec(target=target, kappa_c=block.kappa_c, t1=block.t1, tolerance=block.tolerance, n_steps=n_steps)
        result = reach_point(scenario, spec)
        return result.schedule, result.t_f
    raise UsageError(f"Unknown initial guess {kind!r}, expected one of {GUESS_KINDS}")


def problem_from_scenario(scenario, guess=None, t_f=None, n_steps=None, max_iter=None):
    """
    Build an OcpProblem from a scenario's optimization block.

    Without ``guess`` the block's initial_guess kind is searched for.
    """
    if scenario.target is None:
        raise UsageError("An optimization scenario needs a target")
    block = scenario.optimization
    n_steps = n_steps or scenario.integrator.n_steps
    if guess is None:
        guess, guess_tf = build_initial_guess(scenario, block.initial_guess, n_steps=n_steps)
        # a fixed horizon comes from the scenario, not from the search
        if block.final_time != 'fixed':
            t_f = t_f or guess_tf
    return OcpProblem(
        initial=scenario.initial_state(),
        kernels=scenario.kernel_set(),
        friction=scenario.friction_params(),
        target=scenario.target,
        guess=guess,
        t_f=float(t_f or scenario.integrator.t_f),
        cost=block.cost,
        weights=CostWeights(block.delta1, block.delta2, block.delta3),
        n_steps=n_steps,
        final_time=block.final_time,
        segments=block.segments,
        optimize_kp=block.optimize_kp,
        bounds=scenario.control_bounds(),
        max_iter=block.max_iter if max_iter is None else max_iter,
    )


def initial_iterate(problem):
    """Guess sampled on the s-grid mapped to [0, t_f], projected onto the bounds."""
    grid = to_sampled_grid(problem.guess, np.linspace(0.0, problem.t_f, problem.n_steps + 1), problem.n_drivers, problem.bounds)
    if problem.final_time == 'profile':
        time = np.full(problem.segments, problem.t_f)
    else:
        time = np.array([problem.t_f])
    return Iterate(kappa_p=grid.kappa_p, kappa_c=grid.kappa_c, time=time)


class _Projection:
    """Box projection and preconditioned descent direction over the free blocks."""

    def __init__(self, problem):
        self.problem = problem
        self.bounds = problem.bounds
        self.time_low, self.time_high = problem.time_bounds()

    def project(self, iterate):
        changes = {'kappa_c': self.bounds.clamp_kc(iterate.kappa_c)}
        if self.problem.optimize_kp:
            changes['kappa_p'] = self.bounds.clamp_kp(iterate.kappa_p)
        if self.problem.final_time != 'fixed':
            changes['time'] = np.clip(iterate.time, self.time_low, self.time_high)
        return iterate.replace(**changes)

    def trial(self, iterate, grad, alpha):
        """Projected step along the gradient scaled by the inverse trapezoid weights."""
        weights = trapezoid_weights(iterate.steps(self.problem))[:, None]
        changes = {'kappa_c': iterate.kappa_c - alpha * grad.kappa_c / weights}
        if self.problem.optimize_kp:
            changes['kappa_p'] = iterate.kappa_p - alpha * grad.kappa_p / weights
        if self.problem.final_time != 'fixed':
            changes['time'] = iterate.time - alpha * grad.time
        return self.project(iterate.replace(**changes))

    def decrease(self, iterate, trial, grad):
        """Predicted decrease g . (x - x_trial) over the free blocks."""
        total = float((grad.kappa_c * (iterate.kappa_c - trial.kappa_c)).sum())
        if self.problem.optimize_kp:
            total += float((grad.kappa_p * (iterate.kappa_p - trial.kappa_p)).sum())
        if self.problem.final_time != 'fixed':
            total += float(grad.time @ (iterate.time - trial.time))
        return total

    def gradient_norm(self, iterate, grad):
        """Norm of the projected gradient x - P(x - g)."""
        moved = self.project(iterate.replace(
            kappa_c=iterate.kappa_c - grad.kappa_c,
            kappa_p=iterate.kappa_p - grad.kappa_p,
            time=iterate.time - (grad.time if self.problem.final_time != 'fixed' else 0.0),
        ))
        total = ((iterate.kappa_c - moved.kappa_c) ** 2).sum()
        if self.problem.optimize_kp:
            total += ((iterate.kappa_p - moved.kappa_p) ** 2).sum()
        if self.problem.final_time != 'fixed':
            total += ((iterate.time - moved.time) ** 2).sum()
        return float(np.sqrt(total))


def _try(problem, iterate):
    try:
        return evaluate(problem, iterate)
    except (SingularityError, DivergenceError) as exc:
        logger.debug(f"Trial step rejected: {exc}")
        return None, None


def _solution(problem, iterate, breakdown, states, history, status, iterations, grad_norm):
    node_times = iterate.node_times(problem)
    scaling = None
    if problem.final_time == 'profile':
        low, high = problem.speed_bounds
        scaling = TimeScaling(t_f=iterate.t_f(problem), speeds=iterate.time, c1=low, c2=high)
        s_grid = SampledGrid(node_times=np.linspace(0.0, 1.0, problem.n_steps + 1), kappa_p=iterate.kappa_p, kappa_c=iterate.kappa_c)
        schedule, _, _ = rescale_time(s_grid, scaling)
    else:
        schedule = SampledGrid(node_times=node_times, kappa_p=iterate.kappa_p, kappa_c=iterate.kappa_c)
    traj = Trajectory.from_vectors(
        schedule.node_times, states, iterate.kappa_p, iterate.kappa_c,
        problem.n_drivers, problem.n_evaders, model=problem.model,
    )
    return OcpSolution(
        schedule=schedule,
        t_f=iterate.t_f(problem),
        breakdown=breakdown,
        history=history,
        status=status,
        iterations=iterations,
        trajectory=traj,
        time_scaling=scaling,
        gradient_norm=grad_norm,
    )


def solve_ocp(problem):
    """
    Minimize the problem's cost by projected gradient descent.

    Each iteration takes the gradient of the discrete cost, scales the node
    components by the inverse trapezoid weights, and backtracks from
    alpha = min(1, 2 alpha_prev) until the Armijo condition
    J(x_new) <= J(x) - c g . (x - x_new) holds.

    Stops on a relative cost change below HERDING['OCP_REL_TOL'], a projected
    gradient norm below HERDING['OCP_GRAD_TOL'] or after problem.max_iter
    iterations. After HERDING['OCP_MAX_HALVINGS'] rejected halvings the best
    iterate is returned with status 'stagnation'.

    Returns:
        OcpSolution
    """
    armijo = herding_setting('OCP_ARMIJO')
    max_halvings = herding_setting('OCP_MAX_HALVINGS')
    rel_tol = herding_setting('OCP_REL_TOL')
    grad_tol = herding_setting('OCP_GRAD_TOL')
    projection = _Projection(problem)

    iterate = initial_iterate(problem)
    breakdown, states = evaluate(problem, iterate)
    history = [breakdown.total]
    alpha = herding_setting('OCP_INITIAL_STEP')
    status, grad_norm, iterations = 'max_iter', None, 0

    for iterations in range(1, problem.max_iter + 1):
        _, grad = gradient(problem, iterate, states)
        grad_norm = projection.gradient_norm(iterate, grad)
        if grad_norm < grad_tol:
            status, iterations = 'converged', iterations - 1
            break

        alpha = min(1.0, 2.0 * alpha)
        for _ in range(max_halvings):
            trial = projection.trial(iterate, grad, alpha)
            trial_breakdown, trial_states = _try(problem, trial)
            if trial_breakdown is not None and trial_breakdown.total <= breakdown.total - armijo * projection.decrease(iterate, trial, grad):
                break
            alpha *= 0.5
        else:
            status, iterations = 'stagnation', iterations - 1
            logger.warning(f"Line search failed after {max_halvings} halvings; keeping cost {breakdown.total:.6g}")
            break

        previous = breakdown.total
        iterate, breakdown, states = trial, trial_breakdown, trial_states
        history.append(breakdown.total)
        logger.debug(f"Iteration {iterations}: cost={breakdown.total:.8g}, alpha={alpha:.3g}, |g|={grad_norm:.3e}")
        if abs(previous - breakdown.total) <= rel_tol * max(abs(previous), np.finfo(float).tiny):
            status = 'converged'
            break
    else:
        iterations = problem.max_iter

    solution = _solution(problem, iterate, breakdown, states, history, status, iterations, grad_norm)
    log = logger.warning if status == 'stagnation' else logger.info
    log(f"Optimization {status} after {iterations} iterations: cost={breakdown.total:.6g}, t_f={solution.t_f:.4f}")
    return solution
