"""
Control schedules for the pursuit (kappa_p) and circumvention (kappa_c)
controls of each driver, and the time-scaling map used for free final time.
"""
from dataclasses import dataclass, field

import numpy as np

from main.exceptions import UsageError


def _per_driver(values, name):
    values = np.atleast_1d(np.array(values, dtype=float))
    if values.ndim != 1 or not np.all(np.isfinite(values)):
        raise UsageError(f"{name} must be a finite scalar or one value per driver")
    return values


@dataclass(frozen=True)
class ControlBounds:
    """Box constraints kp_min <= kappa_p <= kp_max, kc_min <= kappa_c <= kc_max."""

    kp_min: float = 0.0
    kp_max: float = 1.0
    kc_min: float = -5.0
    kc_max: float = 5.0

    def __post_init__(self):
        if self.kp_min > self.kp_max:
            raise UsageError(f"kp_min ({self.kp_min}) exceeds kp_max ({self.kp_max})")
        if self.kc_min > self.kc_max:
            raise UsageError(f"kc_min ({self.kc_min}) exceeds kc_max ({self.kc_max})")

    def clamp_kp(self, values):
        return np.clip(values, self.kp_min, self.kp_max)

    def clamp_kc(self, values):
        return np.clip(values, self.kc_min, self.kc_max)

    def contains_kc(self, value):
        return self.kc_min <= value <= self.kc_max


class ControlSchedule:
    """Base class for control representations."""

    kind = ''

    @property
    def needs_state(self):
        return False


@dataclass(frozen=True, eq=False)
class Constant(ControlSchedule):
    """Controls held constant in time."""

    kappa_p: np.ndarray
    kappa_c: np.ndarray

    kind = 'constant'

    def __post_init__(self):
        object.__setattr__(self, 'kappa_p', _per_driver(self.kappa_p, 'kappa_p'))
        object.__setattr__(self, 'kappa_c', _per_driver(self.kappa_c, 'kappa_c'))

    def values(self, t):
        return self.kappa_p, self.kappa_c


@dataclass(frozen=True, eq=False)
class OffBangOff(ControlSchedule):
    """
    kappa_c(t) = kappa_c on the closed interval [t1, t2] and 0 elsewhere;
    kappa_p held constant.
    """

    t1: float
    t2: float
    kappa_c: np.ndarray
    kappa_p: np.ndarray = 1.0

    kind = 'off_bang_off'

    def __post_init__(self):
        if not 0.0 <= self.t1 <= self.t2:
            raise UsageError(f"Off-bang-off switch times must satisfy 0 <= t1 <= t2, got t1={self.t1}, t2={self.t2}")
        object.__setattr__(self, 'kappa_p', _per_driver(self.kappa_p, 'kappa_p'))
        object.__setattr__(self, 'kappa_c', _per_driver(self.kappa_c, 'kappa_c'))

    def values(self, t):
        active = self.t1 <= t <= self.t2
        return self.kappa_p, self.kappa_c if active else np.zeros_like(self.kappa_c)


@dataclass(frozen=True, eq=False)
class SampledGrid(ControlSchedule):
    """
    Controls given at node times and linearly interpolated in between.

    node_times: (n+1,) increasing times starting at 0
    kappa_p, kappa_c: (n+1, M) node values
    """

    node_times: np.ndarray
    kappa_p: np.ndarray
    kappa_c: np.ndarray

    kind = 'sampled'

    def __post_init__(self):
        times = np.asarray(self.node_times, dtype=float).ravel()
        if len(times) < 1 or np.any(np.diff(times) <= 0):
            raise UsageError("Sampled grid node times must be strictly increasing")
        kp = np.array(self.kappa_p, dtype=float).reshape(len(times), -1)
        kc = np.array(self.kappa_c, dtype=float).reshape(len(times), -1)
        if kp.shape != kc.shape:
            raise UsageError("kappa_p and kappa_c grids must have the same shape")
        object.__setattr__(self, 'node_times', times)
        object.__setattr__(self, 'kappa_p', kp)
        object.__setattr__(self, 'kappa_c', kc)

    @classmethod
    def uniform(cls, t_f, kappa_p, kappa_c):
        """Grid with len(kappa_c) nodes evenly spread over [0, t_f]."""
        kc = np.asarray(kappa_c, dtype=float)
        return cls(node_times=np.linspace(0.0, t_f, len(kc)), kappa_p=kappa_p, kappa_c=kc)

    @property
    def n_drivers(self):
        return self.kappa_c.shape[1]

    @property
    def t_f(self):
        return float(self.node_times[-1])

    def values(self, t):
        if len(self.node_times) == 1:
            return self.kappa_p[0], self.kappa_c[0]
        kp = np.array([np.interp(t, self.node_times, column) for column in self.kappa_p.T])
        kc = np.array([np.interp(t, self.node_times, column) for column in self.kappa_c.T])
        return kp, kc


@dataclass(frozen=True, eq=False)
class FeedbackRef(ControlSchedule):
    """
    Reference to a closed-loop law evaluated from the current state.

    params: feedback.models.FeedbackParams
    gathering: suspend pursuit with the hysteresis stopping law
    """

    params: object
    law: str = 'steering'
    gathering: bool = False

    kind = 'feedback'

    def __post_init__(self):
        if self.law != 'steering':
            raise UsageError(f"Unknown feedback law: {self.law!r}")

    @property
    def needs_state(self):
        return True


@dataclass(frozen=True, eq=False)
class ScheduleSequence(ControlSchedule):
    """
    Schedules played one after the other. Piece i is active from starts[i]
    and is read in its own local time t - starts[i].
    """

    starts: tuple
    pieces: tuple

    kind = 'sequence'

    def __post_init__(self):
        starts = tuple(float(start) for start in self.starts)
        if len(starts) != len(self.pieces) or not starts or starts[0] != 0.0:
            raise UsageError("A schedule sequence needs one start time per piece, the first at 0")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise UsageError("Schedule sequence start times must be increasing")
        object.__setattr__(self, 'starts', starts)
        object.__setattr__(self, 'pieces', tuple(self.pieces))

    @property
    def needs_state(self):
        return any(piece.needs_state for piece in self.pieces)

    def locate(self, t):
        """Return (piece, local time) for time t."""
        index = int(np.searchsorted(self.starts, t, side='right')) - 1
        index = max(index, 0)
        return self.pieces[index], t - self.starts[index]


def _fit_mean(speeds, mean, c1, c2):
    """
    Rescale speeds to the given mean without leaving [c1, c2].

    Speeds pushed past a bound are pinned there and the rest rescaled again;
    each pass pins at least one more segment.
    """
    speeds = speeds.copy()
    free = np.ones(len(speeds), dtype=bool)
    while free.any():
        budget = mean * len(speeds) - speeds[~free].sum()
        speeds[free] *= budget / speeds[free].sum()
        outside = (speeds < c1) | (speeds > c2)
        if not outside.any():
            break
        speeds = np.clip(speeds, c1, c2)
        free &= ~outside
    return speeds


@dataclass(frozen=True, eq=False)
class TimeScaling:
    """
    Map T: [0, 1] -> [0, t_f] with piecewise-constant speed T'(s) on
    len(speeds) equal segments.

    The speeds are clamped to [c1, c2] and rescaled, without leaving
    [c1, c2], so their mean is t_f; this gives T(0) = 0 and T(1) = t_f.
    t_f itself must lie in [c1, c2].
    """

    t_f: float
    speeds: np.ndarray = None
    c1: float = None
    c2: float = None
    edges: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.t_f > 0:
            raise UsageError(f"t_f must be positive, got {self.t_f}")
        speeds = np.array([self.t_f] if self.speeds is None else self.speeds, dtype=float).ravel()
        c1 = 0.1 * self.t_f if self.c1 is None else float(self.c1)
        c2 = 10.0 * self.t_f if self.c2 is None else float(self.c2)
        if not 0 < c1 <= c2:
            raise UsageError(f"Speed clamp needs 0 < c1 <= c2, got c1={c1}, c2={c2}")
        if not c1 <= self.t_f <= c2:
            raise UsageError(f"t_f={self.t_f} is not a reachable mean speed in [{c1}, {c2}]")
        speeds = _fit_mean(np.clip(speeds, c1, c2), self.t_f, c1, c2)
        object.__setattr__(self, 'speeds', speeds)
        object.__setattr__(self, 'c1', c1)
        object.__setattr__(self, 'c2', c2)
        object.__setattr__(self, 'edges', np.concatenate([[0.0], np.cumsum(speeds) / len(speeds)]))

    @classmethod
    def uniform(cls, t_f):
        return cls(t_f=t_f)

    @property
    def n_segments(self):
        return len(self.speeds)

    @property
    def _s_edges(self):
        return np.linspace(0.0, 1.0, self.n_segments + 1)

    def forward(self, s):
        """T(s)."""
        return np.interp(s, self._s_edges, self.edges)

    def inverse(self, t):
        """T^{-1}(t)."""
        return np.interp(t, self.edges, self._s_edges)

    def step_sizes(self, n_steps):
        """Physical step lengths T((k+1)/n) - T(k/n)."""
        return np.diff(self.forward(np.linspace(0.0, 1.0, n_steps + 1)))
