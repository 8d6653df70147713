"""
Requests and results of the off-bang-off shooting searches.
"""
from dataclasses import dataclass, field

import numpy as np

from main.conf import herding_setting
from main.exceptions import UsageError


@dataclass(frozen=True, eq=False)
class ReachSpec:
    """
    What to reach and where to search.

    target: the point u_f the evader has to pass within ``tolerance`` of
    kappa_c: circumvention value used between t1 and t2
    t1: switch-on time (defaults to HERDING['REACH_T1'])
    retry_t1: switch-on times tried when the target sits inside the
        stable-orbit exclusion disc for t1 (defaults to HERDING['REACH_T1_RETRIES'])
    t2_max, tf_range: search box for (t2, t_f)
    pursuit_only: skip circumvention (t1 = t2) and search t_f alone
    """

    target: np.ndarray
    kappa_c: float = 1.0
    kappa_p: float = 1.0
    t1: float = None
    tolerance: float = None
    t2_max: float = 20.0
    tf_range: tuple = (0.5, 25.0)
    retry_t1: tuple = None
    pursuit_only: bool = False
    grid: int = None
    budget: int = None
    n_steps: int = None

    def __post_init__(self):
        target = np.asarray(self.target, dtype=float).reshape(2)
        object.__setattr__(self, 'target', target)
        defaults = {
            't1': herding_setting('REACH_T1'),
            'tolerance': herding_setting('REACH_TOLERANCE'),
            'retry_t1': tuple(herding_setting('REACH_T1_RETRIES')),
            'grid': herding_setting('REACH_GRID'),
            'budget': herding_setting('REACH_BUDGET'),
            'n_steps': herding_setting('N_STEPS'),
        }
        for name, value in defaults.items():
            if getattr(self, name) is None:
                object.__setattr__(self, name, value)
        if not self.tolerance > 0:
            raise UsageError(f"Reach tolerance must be positive, got {self.tolerance}")
        low, high = self.tf_range
        if not 0 < low < high:
            raise UsageError(f"Final-time range must satisfy 0 < low < high, got {self.tf_range}")
        if self.t1 < 0 or (not self.pursuit_only and self.t1 > self.t2_max):
            raise UsageError(f"t1={self.t1} lies outside [0, t2_max={self.t2_max}]")
        if self.grid < 2 or self.budget < 0:
            raise UsageError("Reach grid needs at least 2 points and a non-negative budget")

    def with_t1(self, t1):
        return ReachSpec(**{**self.__dict__, 't1': t1})

    def with_target(self, target):
        return ReachSpec(**{**self.__dict__, 'target': target})


@dataclass(frozen=True, eq=False)
class ReachResult:
    """
    Best off-bang-off control found. ``achieved_error`` is |u_e(t_f) - u_f|
    of the returned schedule whether or not the target was reached.
    """

    schedule: object
    t_f: float
    achieved_error: float
    reached: bool
    trajectory: object = None
    t1_tried: tuple = ()
    evaluations: int = 0

    @property
    def status(self):
        return 'reached' if self.reached else 'not_reached'

    def to_dict(self):
        return {
            'status': self.status,
            't1': self.schedule.t1,
            't2': self.schedule.t2,
            't_f': self.t_f,
            'kappa_c': float(self.schedule.kappa_c[0]),
            'achieved_error': self.achieved_error,
            't1_tried': list(self.t1_tried),
            'evaluations': self.evaluations,
        }


@dataclass(frozen=True, eq=False)
class WaypointsResult:
    """Legs reached one after the other; ``failed_leg`` is the index of the first miss."""

    legs: list = field(default_factory=list)
    schedule: object = None
    trajectory: object = None
    failed_leg: int = None

    @property
    def reached(self):
        return self.failed_leg is None

    def __iter__(self):
        return iter(self.legs)

    def __len__(self):
        return len(self.legs)

    def __getitem__(self, index):
        return self.legs[index]

    def to_dict(self):
        return {
            'status': 'reached' if self.reached else 'not_reached',
            'failed_leg': self.failed_leg,
            'legs': [leg.to_dict() for leg in self.legs],
        }


@dataclass(frozen=True, eq=False)
class ConstantReachResult:
    """Best constant circumvention control (kappa_p = 1) and final time."""

    kappa_c: float
    t_f: float
    achieved_error: float
    reached: bool
    schedule: object = None
    trajectory: object = None
    evaluations: int = 0

    @property
    def status(self):
        return 'reached' if self.reached else 'not_reached'

    def to_dict(self):
        return {
            'status': self.status,
            'kappa_c': self.kappa_c,
            't_f': self.t_f,
            'achieved_error': self.achieved_error,
            'evaluations': self.evaluations,
        }
