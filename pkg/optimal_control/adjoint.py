"""
Exact gradients of the discrete RK4 cost (discretize-then-optimize).

On step k with length h the scheme reads

    k1 = F(x_k, c_k)           k2 = F(x_k + h/2 k1, c_m)
    k3 = F(x_k + h/2 k2, c_m)  k4 = F(x_k + h k3, c_{k+1})
    x_{k+1} = x_k + h/6 (k1 + 2 k2 + 2 k3 + k4)

with c_m = (c_k + c_{k+1}) / 2. The backward sweep applies the transposed
stage Jacobians in reverse order, so the result agrees with finite
differences of the same discrete cost at any step size.
"""
import logging

import numpy as np

from dynamics.jacobians import control_vjp, state_vjp
from dynamics.utils import system_rhs
from main.conf import herding_setting
from main.exceptions import DivergenceError
from optimal_control.costs import build_cost, node_kappa_c, trapezoid_weights
from optimal_control.models import Gradient, GradientCheck

logger = logging.getLogger(__name__)


def _stages(x, h, controls, model):
    """Stage points and slopes of one step; controls = (kp_k, kc_k, kp_m, kc_m, kp_k1, kc_k1)."""
    kp_a, kc_a, kp_m, kc_m, kp_b, kc_b = controls
    y1 = x
    k1 = system_rhs(y1, kp_a, kc_a, model)
    y2 = x + 0.5 * h * k1
    k2 = system_rhs(y2, kp_m, kc_m, model)
    y3 = x + 0.5 * h * k2
    k3 = system_rhs(y3, kp_m, kc_m, model)
    y4 = x + h * k3
    k4 = system_rhs(y4, kp_b, kc_b, model)
    return (y1, y2, y3, y4), (k1, k2, k3, k4)


def _step_controls(kappa_p, kappa_c, k):
    return (
        kappa_p[k], kappa_c[k],
        0.5 * (kappa_p[k] + kappa_p[k + 1]), 0.5 * (kappa_c[k] + kappa_c[k + 1]),
        kappa_p[k + 1], kappa_c[k + 1],
    )


def forward_pass(x0, model, kappa_p, kappa_c, steps):
    """
    Integrate with node controls and linear interpolation at the mid stages.

    Returns:
        (n+1, dim) node states
    """
    states = np.empty((len(steps) + 1, len(x0)))
    states[0] = x = np.asarray(x0, dtype=float)
    t = 0.0
    for k, h in enumerate(steps):
        _, (k1, k2, k3, k4) = _stages(x, h, _step_controls(kappa_p, kappa_c, k), model)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise DivergenceError(f"State became non-finite after t={t}", last_valid_time=t)
        states[k + 1] = x
        t += h
    return states


def backward_pass(states, kappa_p, kappa_c, steps, model, cost):
    """
    Reverse sweep for the gradient of cost.evaluate(states, kappa_c, steps).total.

    Returns:
        Gradient with costate[k] = dJ/dx_k, node-control and step gradients
    """
    n = len(steps)
    node_weights = trapezoid_weights(steps)
    delta1, delta2 = cost.weights.delta1, cost.weights.delta2
    n_drivers = kappa_c.shape[1]

    costate = np.empty_like(states)
    g_kp = np.zeros_like(kappa_p, dtype=float)
    g_kc = 2.0 * delta1 / n_drivers * node_weights[:, None] * kappa_c
    g_h = np.full(n, delta2, dtype=float)

    running = np.array([cost.running_state(x) for x in states])
    effort = (kappa_c ** 2).sum(axis=1) / n_drivers
    g_h += 0.5 * (running[:-1] + running[1:]) + 0.5 * delta1 * (effort[:-1] + effort[1:])

    lam = cost.terminal_gradient(states[-1]) + node_weights[-1] * cost.running_state_gradient(states[-1])
    costate[-1] = lam
    for k in range(n - 1, -1, -1):
        h, x = steps[k], states[k]
        controls = _step_controls(kappa_p, kappa_c, k)
        kp_a, kc_a, kp_m, kc_m, kp_b, kc_b = controls
        (y1, y2, y3, y4), (k1, k2, k3, k4) = _stages(x, h, controls, model)

        a4 = (h / 6.0) * lam
        gy4 = state_vjp(y4, kp_b, kc_b, model, a4)
        a3 = (h / 3.0) * lam + h * gy4
        gy3 = state_vjp(y3, kp_m, kc_m, model, a3)
        a2 = (h / 3.0) * lam + 0.5 * h * gy3
        gy2 = state_vjp(y2, kp_m, kc_m, model, a2)
        a1 = (h / 6.0) * lam + 0.5 * h * gy2
        gy1 = state_vjp(y1, kp_a, kc_a, model, a1)

        p1, c1 = control_vjp(y1, model, a1)
        p2, c2 = control_vjp(y2, model, a2)
        p3, c3 = control_vjp(y3, model, a3)
        p4, c4 = control_vjp(y4, model, a4)
        g_kp[k] += p1 + 0.5 * (p2 + p3)
        g_kp[k + 1] += p4 + 0.5 * (p2 + p3)
        g_kc[k] += c1 + 0.5 * (c2 + c3)
        g_kc[k + 1] += c4 + 0.5 * (c2 + c3)

        g_h[k] += lam @ (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        g_h[k] += gy2 @ (0.5 * k1) + gy3 @ (0.5 * k2) + gy4 @ k3

        lam = lam + gy1 + gy2 + gy3 + gy4 + node_weights[k] * cost.running_state_gradient(x)
        if not np.all(np.isfinite(lam)):
            raise DivergenceError(f"Costate became non-finite at step {k}", last_valid_time=float(np.sum(steps[:k + 1])))
        costate[k] = lam

    return Gradient(costate=costate, kappa_p=g_kp, kappa_c=g_kc, steps=g_h)


def _problem_cost(problem):
    return build_cost(problem.cost, problem.weights, problem.target, problem.n_drivers, problem.n_evaders)


def evaluate(problem, iterate):
    """
    Simulate an iterate.

    Returns:
        (CostBreakdown, node states)
    """
    steps = iterate.steps(problem)
    states = forward_pass(problem.initial.to_vector(), problem.model, iterate.kappa_p, iterate.kappa_c, steps)
    return _problem_cost(problem).evaluate(states, iterate.kappa_c, steps), states


def gradient(problem, iterate, states=None):
    """
    Gradient of the problem's cost at an iterate, time variables included.

    Returns:
        (CostBreakdown, Gradient)
    """
    steps = iterate.steps(problem)
    cost = _problem_cost(problem)
    if states is None:
        states = forward_pass(problem.initial.to_vector(), problem.model, iterate.kappa_p, iterate.kappa_c, steps)
    grad = backward_pass(states, iterate.kappa_p, iterate.kappa_c, steps, problem.model, cost)
    if problem.final_time == 'profile':
        time = problem.segment_matrix().T @ grad.steps
    else:
        time = np.array([grad.steps.sum() / problem.n_steps])
    grad = Gradient(costate=grad.costate, kappa_p=grad.kappa_p, kappa_c=grad.kappa_c, steps=grad.steps, time=time)
    return cost.evaluate(states, iterate.kappa_c, steps), grad


def adjoint_solve(traj, schedule, cost, weights, target):
    """
    Costate of a computed run on its own grid. Exact for runs driven by a
    SampledGrid on the integrator nodes; other schedules are read at the
    nodes and interpolated linearly inside each step.

    Args:
        traj: Trajectory carrying its model
        schedule: The open-loop schedule of the run, read at the nodes
        cost: 'guidance' or 'stabilization'
        weights: CostWeights
        target: u_f

    Returns:
        Gradient whose costate[k] = dJ/dx_k
    """
    objective = build_cost(cost, weights, target, traj.n_drivers, traj.n_evaders)
    kappa_c = node_kappa_c(traj, schedule)
    kappa_p = traj.kp
    return backward_pass(traj.state_vectors(), kappa_p, kappa_c, np.diff(traj.times), traj.model, objective)


def _blocks(problem):
    blocks = ['kappa_c']
    if problem.optimize_kp:
        blocks.append('kappa_p')
    if problem.final_time != 'fixed':
        blocks.append('time')
    return blocks


def finite_difference_gradient(problem, iterate, step=None, blocks=None):
    """
    Central differences of the discrete cost, one variable at a time.

    Returns:
        dict block name -> array shaped like the block
    """
    step = herding_setting('FD_STEP') if step is None else step
    result = {}
    for block in blocks or _blocks(problem):
        values = getattr(iterate, block)
        grad = np.zeros(values.shape)
        for index in np.ndindex(values.shape):
            plus, minus = values.copy(), values.copy()
            plus[index] += step
            minus[index] -= step
            upper = evaluate(problem, iterate.replace(**{block: plus}))[0].total
            lower = evaluate(problem, iterate.replace(**{block: minus}))[0].total
            grad[index] = (upper - lower) / (2.0 * step)
        result[block] = grad
    return result


def validate_gradient(problem, iterate, step=None, tolerance=None):
    """
    Compare the adjoint gradient with central finite differences.

    Returns:
        GradientCheck with max|g_adj - g_fd| / max|g_fd| per block
    """
    tolerance = herding_setting('GRADIENT_TOLERANCE') if tolerance is None else tolerance
    _, grad = gradient(problem, iterate)
    reference = finite_difference_gradient(problem, iterate, step)
    errors = {}
    for block, fd in reference.items():
        adjoint = getattr(grad, block)
        scale = np.abs(fd).max()
        difference = np.abs(adjoint - fd).max()
        errors[block] = float(difference / scale if scale > 0 else difference)
    check = GradientCheck(errors=errors, tolerance=tolerance)
    logger.info(f"Gradient check {'passed' if check.passed else 'failed'}: {errors}")
    return check
