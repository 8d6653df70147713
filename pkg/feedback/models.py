"""
Parameters, memory and reports of the closed-loop herding laws.
"""
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from main.conf import herding_setting
from main.exceptions import UsageError


class SteeringValue(NamedTuple):
    """Circumvention value of the steering law and whether its geometry was degenerate."""

    kappa_c: float
    degenerate: bool = False


@dataclass(frozen=True, eq=False)
class FeedbackParams:
    """
    target: the point u_f the evader barycenter is steered to
    kappa_bar_c: strength of the steering law (defaults to HERDING['FEEDBACK_KAPPA_BAR'])
    gather_on, gather_off: gathering-radius thresholds of the stopping law
    stop_radius: barycenter distance to the target that ends a guidance run
    """

    target: np.ndarray
    kappa_bar_c: float = None
    gather_on: float = None
    gather_off: float = None
    stop_radius: float = None

    def __post_init__(self):
        object.__setattr__(self, 'target', np.asarray(self.target, dtype=float).reshape(2))
        defaults = {
            'kappa_bar_c': herding_setting('FEEDBACK_KAPPA_BAR'),
            'gather_on': herding_setting('GATHER_ON'),
            'gather_off': herding_setting('GATHER_OFF'),
            'stop_radius': herding_setting('FEEDBACK_STOP_RADIUS'),
        }
        for name, value in defaults.items():
            if getattr(self, name) is None:
                object.__setattr__(self, name, float(value))

        if not self.kappa_bar_c > 0:
            raise UsageError(f"kappa_bar_c must be positive, got {self.kappa_bar_c}")
        if not 0 < self.gather_off < self.gather_on:
            raise UsageError(f"Need 0 < gather_off < gather_on, got {self.gather_off} and {self.gather_on}")
        if not self.stop_radius > 0:
            raise UsageError(f"stop_radius must be positive, got {self.stop_radius}")

    def check_bounds(self, bounds):
        if not (bounds.contains_kc(self.kappa_bar_c) and bounds.contains_kc(-self.kappa_bar_c)):
            raise UsageError(f"kappa_bar_c={self.kappa_bar_c} exceeds the circumvention bounds")

    def to_dict(self):
        return {
            'target': self.target.tolist(),
            'kappa_bar_c': self.kappa_bar_c,
            'gather_on': self.gather_on,
            'gather_off': self.gather_off,
            'stop_radius': self.stop_radius,
        }


@dataclass(frozen=True)
class HysteresisState:
    """Memory of the stopping law: pursuit is suspended while ``stopped``."""

    stopped: bool = False


STOP_RULES = ('target', 'horizon')


@dataclass(eq=False)
class ClosedLoopReport:
    """Summary of a closed-loop run."""

    stop_rule: str
    control_time: float
    reached: bool
    running_cost: float
    final_error: float
    min_distance: float
    radius_history: np.ndarray
    switch_times: list = field(default_factory=list)
    degenerate_evaluations: int = 0
    seed: int = None

    @property
    def status(self):
        if self.stop_rule == 'horizon':
            return 'completed'
        return 'reached' if self.reached else 'not_reached'

    @property
    def first_stop_time(self):
        """Time of the first pursuit stop, None if the stopping law never fired."""
        return self.switch_times[0] if self.switch_times else None

    def to_dict(self):
        return {
            'status': self.status,
            'stop_rule': self.stop_rule,
            'control_time': self.control_time,
            'reached': self.reached,
            'running_cost': self.running_cost,
            'final_error': self.final_error,
            'min_distance': self.min_distance,
            'max_gathering_radius': float(np.max(self.radius_history)),
            'switch_times': list(self.switch_times),
            'first_stop_time': self.first_stop_time,
            'degenerate_evaluations': self.degenerate_evaluations,
            'seed': self.seed,
        }
