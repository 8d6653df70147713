"""
Value types for the energy/Lyapunov diagnostics and the asymptotic
reference motions.
"""
from dataclasses import dataclass, field

import numpy as np

from main.exceptions import UsageError


@dataclass(frozen=True, eq=False)
class RelativeState:
    """Relative position u = u_d - u_e and velocity v = u'."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).reshape(2)
        v = np.asarray(self.v, dtype=float).reshape(2)
        if not np.hypot(u[0], u[1]) > 0:
            raise UsageError("Relative position must be nonzero")
        object.__setattr__(self, 'u', u)
        object.__setattr__(self, 'v', v)

    @property
    def radius(self):
        return float(np.hypot(self.u[0], self.u[1]))


@dataclass(frozen=True, eq=False)
class PursuitReference:
    """
    Linear pursuit motion: the pair travels at constant velocity
    -f_d(r_p) u* / nu with fixed offset u* = r_p (cos phi0, sin phi0).
    """

    phi0: float
    u_e_star: np.ndarray
    r_p: float
    velocity: np.ndarray

    @property
    def u_star(self):
        return self.r_p * np.array([np.cos(self.phi0), np.sin(self.phi0)])


@dataclass(frozen=True, eq=False)
class CircumventionReference:
    """
    Periodic circumvention motion: driver and evader run on concentric circles
    about u_c_star with angular velocity kappa_c / nu, the driver staying at
    distance r_c from the evader.
    """

    phi1: float
    u_c_star: np.ndarray
    kappa_c: float
    nu: float
    r_c: float
    r_d: float
    r_e: float
    phi_d: float
    phi_e: float
    evader_amplitude: complex = field(repr=False, default=0j)

    @property
    def angular_velocity(self):
        return self.kappa_c / self.nu


@dataclass(frozen=True, eq=False)
class DissipationReport:
    """Per-node values of the monitored functional and the largest upward step."""

    mode: str
    values: np.ndarray
    max_violation: float
    tolerance: float

    @property
    def passed(self):
        return self.max_violation <= self.tolerance

    def to_dict(self):
        return {
            'mode': self.mode,
            'max_violation': self.max_violation,
            'tolerance': self.tolerance,
            'passed': self.passed,
            'initial': float(self.values[0]),
            'final': float(self.values[-1]),
        }


@dataclass(frozen=True, eq=False)
class FitReport:
    """Reference motion estimated from the tail of a run."""

    reference: object
    residual: float
    radius: float
    angular_velocity: float

    def to_dict(self):
        ref = self.reference
        data = {
            'residual': self.residual,
            'radius': self.radius,
            'angular_velocity': self.angular_velocity,
        }
        if isinstance(ref, PursuitReference):
            data.update({'phi0': ref.phi0, 'u_e_star': ref.u_e_star.tolist()})
        else:
            data.update({'phi1': ref.phi1, 'u_c_star': ref.u_c_star.tolist(), 'r_d': ref.r_d, 'r_e': ref.r_e})
        return data


@dataclass(frozen=True)
class GrowthBound:
    """L_kappa >= (epsilon / 2)(|u|^2 + |v|^2) whenever |u| > m0."""

    epsilon: float
    m0: float
