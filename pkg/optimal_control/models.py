"""
Problems, decision variables and results of the optimal-control solver.
"""
from dataclasses import dataclass, field

import numpy as np

from controls.models import ControlBounds
from dynamics.models import HerdingModel
from main.conf import herding_setting
from main.exceptions import UsageError

COST_KINDS = ('guidance', 'stabilization')
FINAL_TIME_MODES = ('fixed', 'free', 'profile')

TF_MIN = 0.1
TF_MAX = 100.0


@dataclass(frozen=True)
class CostWeights:
    """delta1: running control cost, delta2: final time, delta3: stabilization velocities and drivers."""

    delta1: float = 0.001
    delta2: float = 0.0
    delta3: float = 0.0

    def __post_init__(self):
        for name in ('delta1', 'delta2', 'delta3'):
            if not getattr(self, name) >= 0:
                raise UsageError(f"{name} must be nonnegative, got {getattr(self, name)}")


@dataclass(frozen=True)
class CostBreakdown:
    """
    Components of a cost value.

    terminal: (1/N) sum |u_ei(t_f) - u_f|^2 (guidance only)
    running_control: (delta1/M) sum_j int kappa_c^2
    running_state: stabilization tracking integral, weights included
    time: delta2 t_f
    position_error: largest |u_ei(t_f) - u_f|
    control_effort: (1/M) sum_j int kappa_c^2, unweighted
    """

    terminal: float
    running_control: float
    running_state: float
    time: float
    position_error: float
    control_effort: float
    t_f: float

    @property
    def total(self):
        return self.terminal + self.running_control + self.running_state + self.time

    def to_dict(self):
        return {
            'total': self.total,
            'terminal': self.terminal,
            'running_control': self.running_control,
            'running_state': self.running_state,
            'time': self.time,
            'position_error': self.position_error,
            'control_effort': self.control_effort,
            't_f': self.t_f,
        }


@dataclass(frozen=True, eq=False)
class OcpProblem:
    """
    An optimal-control problem on a uniform grid in s in [0, 1].

    initial, kernels, friction: the system
    cost: 'guidance' or 'stabilization'
    target: u_f
    guess: open-loop ControlSchedule read on [0, t_f]
    t_f: final time of the guess
    final_time: 'fixed', 'free' (scalar t_f) or 'profile' (piecewise speeds on ``segments`` pieces)
    optimize_kp: optimize kappa_p on the grid as well (kept at the guess otherwise)
    """

    initial: object
    kernels: object
    friction: object
    target: np.ndarray
    guess: object
    t_f: float
    cost: str = 'guidance'
    weights: CostWeights = field(default_factory=CostWeights)
    n_steps: int = None
    final_time: str = 'fixed'
    segments: int = 10
    optimize_kp: bool = False
    bounds: ControlBounds = field(default_factory=ControlBounds)
    max_iter: int = None

    def __post_init__(self):
        object.__setattr__(self, 'target', np.asarray(self.target, dtype=float).reshape(2))
        if self.n_steps is None:
            object.__setattr__(self, 'n_steps', herding_setting('N_STEPS'))
        if self.max_iter is None:
            object.__setattr__(self, 'max_iter', herding_setting('OCP_MAX_ITER'))
        if self.cost not in COST_KINDS:
            raise UsageError(f"Unknown cost {self.cost!r}, expected one of {COST_KINDS}")
        if self.final_time not in FINAL_TIME_MODES:
            raise UsageError(f"Unknown final-time mode {self.final_time!r}, expected one of {FINAL_TIME_MODES}")
        if not TF_MIN <= self.t_f <= TF_MAX:
            raise UsageError(f"t_f={self.t_f} outside [{TF_MIN}, {TF_MAX}]")
        if self.n_steps < 1 or self.segments < 1 or self.max_iter < 0:
            raise UsageError("n_steps and segments must be positive and max_iter nonnegative")
        if self.guess.needs_state:
            raise UsageError("The initial guess must be an open-loop schedule")

    @property
    def model(self):
        return HerdingModel(kernels=self.kernels, friction=self.friction)

    @property
    def n_drivers(self):
        return self.initial.n_drivers

    @property
    def n_evaders(self):
        return self.initial.n_evaders

    @property
    def speed_bounds(self):
        """Clamp [C1, C2] of the segment speeds in profile mode."""
        return 0.1 * self.t_f, 10.0 * self.t_f

    def time_bounds(self):
        if self.final_time == 'profile':
            return self.speed_bounds
        return TF_MIN, TF_MAX

    def segment_matrix(self):
        """
        (n, S) matrix A with steps h = A theta: A[k, s] is the overlap of the
        s-interval of step k with speed segment s.
        """
        nodes = np.linspace(0.0, 1.0, self.n_steps + 1)
        edges = np.linspace(0.0, 1.0, self.segments + 1)
        low = np.maximum(nodes[:-1, None], edges[None, :-1])
        high = np.minimum(nodes[1:, None], edges[None, 1:])
        return np.clip(high - low, 0.0, None)


@dataclass(frozen=True, eq=False)
class Iterate:
    """
    Decision variables: node controls (n+1, M) and the time variables
    ([t_f] in fixed and free mode, segment speeds in profile mode).
    """

    kappa_p: np.ndarray
    kappa_c: np.ndarray
    time: np.ndarray

    def steps(self, problem):
        if problem.final_time == 'profile':
            return problem.segment_matrix() @ self.time
        return np.full(problem.n_steps, self.time[0] / problem.n_steps)

    def node_times(self, problem):
        return np.concatenate([[0.0], np.cumsum(self.steps(problem))])

    def t_f(self, problem):
        return float(self.steps(problem).sum())

    def replace(self, **changes):
        values = {'kappa_p': self.kappa_p, 'kappa_c': self.kappa_c, 'time': self.time}
        values.update(changes)
        return Iterate(**values)


@dataclass(frozen=True, eq=False)
class Gradient:
    """Gradient of the discrete cost: costate (n+1, dim), node controls (n+1, M), steps (n,)."""

    costate: np.ndarray
    kappa_p: np.ndarray
    kappa_c: np.ndarray
    steps: np.ndarray
    time: np.ndarray = None


@dataclass(eq=False)
class OcpSolution:
    """Best iterate found, mapped back to physical time."""

    schedule: object
    t_f: float
    breakdown: CostBreakdown
    history: list
    status: str
    iterations: int
    trajectory: object = None
    time_scaling: object = None
    gradient_norm: float = None

    @property
    def cost(self):
        return self.breakdown.total

    def to_dict(self):
        return {
            'status': self.status,
            'iterations': self.iterations,
            't_f': self.t_f,
            'cost': self.breakdown.to_dict(),
            'gradient_norm': self.gradient_norm,
            'history': list(self.history),
        }


@dataclass(frozen=True)
class GradientCheck:
    """Relative error max|g_adj - g_fd| / max|g_fd| per variable block."""

    errors: dict
    tolerance: float

    @property
    def max_error(self):
        return max(self.errors.values()) if self.errors else 0.0

    @property
    def passed(self):
        return self.max_error < self.tolerance

    def to_dict(self):
        return {
            'status': 'passed' if self.passed else 'failed',
            'max_error': self.max_error,
            'tolerance': self.tolerance,
            'blocks': dict(self.errors),
        }
