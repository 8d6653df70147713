"""
Guidance and stabilization cost functionals on the discrete grid.

Integrals use the trapezoid rule on the trajectory nodes. Each cost exposes
the pieces the adjoint needs: the terminal gradient, the running-state
gradient at a node and the node weights.
"""
import numpy as np

from controls.models import SampledGrid
from controls.utils import to_sampled_grid
from dynamics.models import split_vector
from optimal_control.models import CostBreakdown, CostWeights


def trapezoid_weights(steps):
    """Node weights w with sum_k w_k g_k the trapezoid integral of g."""
    steps = np.asarray(steps, dtype=float)
    weights = np.zeros(len(steps) + 1)
    weights[:-1] += 0.5 * steps
    weights[1:] += 0.5 * steps
    return weights


class GuidanceCost:
    """J = (1/N) sum |u_ei(t_f) - u_f|^2 + (delta1/M) sum_j int kappa_c^2 + delta2 t_f."""

    kind = 'guidance'

    def __init__(self, weights, target, n_drivers, n_evaders):
        self.weights = weights
        self.target = np.asarray(target, dtype=float)
        self.n_drivers = n_drivers
        self.n_evaders = n_evaders

    def _split(self, x):
        return split_vector(np.asarray(x, dtype=float), self.n_drivers, self.n_evaders)

    def terminal(self, x):
        _, ep, _, _ = self._split(x)
        return float(((ep - self.target) ** 2).sum() / self.n_evaders)

    def terminal_gradient(self, x):
        grad = np.zeros_like(x, dtype=float)
        _, g_ep, _, _ = split_vector(grad, self.n_drivers, self.n_evaders)
        _, ep, _, _ = self._split(x)
        g_ep[:] = 2.0 * (ep - self.target) / self.n_evaders
        return grad

    def running_state(self, x):
        return 0.0

    def running_state_gradient(self, x):
        return np.zeros_like(x, dtype=float)

    def position_error(self, x):
        _, ep, _, _ = self._split(x)
        return float(np.hypot(*(ep - self.target).T).max())

    def evaluate(self, states, kappa_c, steps):
        """
        Args:
            states: (n+1, dim) node states
            kappa_c: (n+1, M) node controls
            steps: (n,) step lengths

        Returns:
            CostBreakdown
        """
        node_weights = trapezoid_weights(steps)
        effort = float(node_weights @ (kappa_c ** 2).sum(axis=1)) / self.n_drivers
        running_state = float(node_weights @ np.array([self.running_state(x) for x in states]))
        t_f = float(np.sum(steps))
        return CostBreakdown(
            terminal=self.terminal(states[-1]),
            running_control=self.weights.delta1 * effort,
            running_state=running_state,
            time=self.weights.delta2 * t_f,
            position_error=self.position_error(states[-1]),
            control_effort=effort,
            t_f=t_f,
        )


class StabilizationCost(GuidanceCost):
    """
    J = int (1/N) sum |u_ei - u_f|^2 + delta3 (1/N) sum |v_ei|^2
          + delta3 (1/M) sum (|u_dj - u_f|^2 + |v_dj|^2) dt
        + (delta1/M) sum_j int kappa_c^2 + delta2 t_f
    """

    kind = 'stabilization'

    def terminal(self, x):
        return 0.0

    def terminal_gradient(self, x):
        return np.zeros_like(x, dtype=float)

    def running_state(self, x):
        dp, ep, dv, ev = self._split(x)
        delta3 = self.weights.delta3
        evaders = (((ep - self.target) ** 2).sum() + delta3 * (ev ** 2).sum()) / self.n_evaders
        drivers = delta3 * (((dp - self.target) ** 2).sum() + (dv ** 2).sum()) / self.n_drivers
        return float(evaders + drivers)

    def running_state_gradient(self, x):
        dp, ep, dv, ev = self._split(x)
        delta3 = self.weights.delta3
        grad = np.zeros_like(x, dtype=float)
        g_dp, g_ep, g_dv, g_ev = split_vector(grad, self.n_drivers, self.n_evaders)
        g_ep[:] = 2.0 * (ep - self.target) / self.n_evaders
        g_ev[:] = 2.0 * delta3 * ev / self.n_evaders
        g_dp[:] = 2.0 * delta3 * (dp - self.target) / self.n_drivers
        g_dv[:] = 2.0 * delta3 * dv / self.n_drivers
        return grad


COSTS = {cost.kind: cost for cost in (GuidanceCost, StabilizationCost)}


def build_cost(kind, weights, target, n_drivers, n_evaders):
    return COSTS[kind](weights, target, n_drivers, n_evaders)


def node_kappa_c(traj, schedule):
    """kappa_c of a schedule at the trajectory nodes, shape (n+1, M)."""
    if isinstance(schedule, SampledGrid) and np.array_equal(schedule.node_times, traj.times):
        return schedule.kappa_c
    return to_sampled_grid(schedule, traj.times, traj.n_drivers).kappa_c


def _evaluate(kind, traj, schedule, weights, target):
    weights = weights or CostWeights()
    cost = build_cost(kind, weights, target, traj.n_drivers, traj.n_evaders)
    breakdown = cost.evaluate(traj.state_vectors(), node_kappa_c(traj, schedule), np.diff(traj.times))
    return breakdown.total, breakdown


def cost_guidance(traj, schedule, weights, target):
    """
    Guidance cost of a run.

    Args:
        traj: Trajectory
        schedule: The open-loop schedule that produced it, read at the trajectory nodes
        weights: CostWeights
        target: u_f

    Returns:
        (total, CostBreakdown)
    """
    return _evaluate('guidance', traj, schedule, weights, target)


def cost_stabilization(traj, schedule, weights, target):
    """Stabilization cost of a run; returns (total, CostBreakdown)."""
    return _evaluate('stabilization', traj, schedule, weights, target)
