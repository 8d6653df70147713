"""
State containers for the driver/evader system.

Positions and velocities are stored as (count, 2) float arrays. The flat
vector layout used by the integrator and the adjoint is

    [driver positions | evader positions | driver velocities | evader velocities]

each block row-major, so a system with M drivers and N evaders has
4 * (M + N) entries.
"""
from dataclasses import dataclass, field

import numpy as np

from main.conf import herding_setting
from main.exceptions import UsageError, TheoryScopeError


def _as_points(values, name):
    points = np.array(values, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(points)):
        raise UsageError(f"{name} must be finite")
    return points


def split_vector(x, n_drivers, n_evaders):
    """Return (driver_pos, evader_pos, driver_vel, evader_vel) views of a flat state vector."""
    m2, n2 = 2 * n_drivers, 2 * n_evaders
    return (
        x[:m2].reshape(n_drivers, 2),
        x[m2:m2 + n2].reshape(n_evaders, 2),
        x[m2 + n2:2 * m2 + n2].reshape(n_drivers, 2),
        x[2 * m2 + n2:].reshape(n_evaders, 2),
    )


@dataclass(frozen=True, eq=False)
class SystemState:
    """Positions and velocities of M drivers and N evaders at time t."""

    t: float
    driver_pos: np.ndarray
    driver_vel: np.ndarray
    evader_pos: np.ndarray
    evader_vel: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 't', float(self.t))
        for name in ('driver_pos', 'driver_vel', 'evader_pos', 'evader_vel'):
            object.__setattr__(self, name, _as_points(getattr(self, name), name))
        if len(self.driver_pos) < 1 or len(self.evader_pos) < 1:
            raise UsageError("A state needs at least one driver and one evader")
        if self.driver_vel.shape != self.driver_pos.shape or self.evader_vel.shape != self.evader_pos.shape:
            raise UsageError("Velocity arrays must match position arrays")

    @property
    def n_drivers(self):
        return len(self.driver_pos)

    @property
    def n_evaders(self):
        return len(self.evader_pos)

    def to_vector(self):
        return np.concatenate([
            self.driver_pos.ravel(),
            self.evader_pos.ravel(),
            self.driver_vel.ravel(),
            self.evader_vel.ravel(),
        ])

    @classmethod
    def from_vector(cls, t, x, n_drivers, n_evaders):
        dp, ep, dv, ev = split_vector(np.asarray(x, dtype=float), n_drivers, n_evaders)
        return cls(t=t, driver_pos=dp, driver_vel=dv, evader_pos=ep, evader_vel=ev)

    @classmethod
    def at_rest(cls, driver_pos, evader_pos, t=0.0):
        """Build a state with zero initial velocities."""
        dp = _as_points(driver_pos, 'driver_pos')
        ep = _as_points(evader_pos, 'evader_pos')
        return cls(t=t, driver_pos=dp, driver_vel=np.zeros_like(dp), evader_pos=ep, evader_vel=np.zeros_like(ep))


@dataclass(frozen=True, eq=False)
class FrictionParams:
    """Per-agent friction coefficients."""

    nu_d: np.ndarray
    nu_e: np.ndarray

    def __post_init__(self):
        for name in ('nu_d', 'nu_e'):
            values = np.atleast_1d(np.array(getattr(self, name), dtype=float))
            if values.ndim != 1 or not np.all(np.isfinite(values)) or np.any(values <= 0):
                raise UsageError("friction must be positive")
            object.__setattr__(self, name, values)

    @classmethod
    def uniform(cls, nu, n_drivers=1, n_evaders=1):
        return cls(nu_d=np.full(n_drivers, float(nu)), nu_e=np.full(n_evaders, float(nu)))

    @property
    def equal_friction(self):
        values = np.concatenate([self.nu_d, self.nu_e])
        return bool(np.all(values == values[0]))

    @property
    def nu(self):
        """The common friction coefficient; only defined under equal friction."""
        if not self.equal_friction:
            raise TheoryScopeError("This operation requires equal friction for all agents")
        return float(self.nu_d[0])


@dataclass(frozen=True, eq=False)
class Derivative:
    """Time derivative of a SystemState: velocities and accelerations."""

    driver_vel: np.ndarray
    driver_acc: np.ndarray
    evader_vel: np.ndarray
    evader_acc: np.ndarray

    def to_vector(self):
        return np.concatenate([
            self.driver_vel.ravel(),
            self.evader_vel.ravel(),
            self.driver_acc.ravel(),
            self.evader_acc.ravel(),
        ])

    @classmethod
    def from_vector(cls, dx, n_drivers, n_evaders):
        dv, ev, da, ea = split_vector(np.asarray(dx, dtype=float), n_drivers, n_evaders)
        return cls(driver_vel=dv, driver_acc=da, evader_vel=ev, evader_acc=ea)


@dataclass(frozen=True)
class HerdingModel:
    """Kernels plus friction: everything the right-hand side needs besides state and controls."""

    kernels: object
    friction: FrictionParams
    singularity_distance: float = field(default=None)

    def __post_init__(self):
        if self.singularity_distance is None:
            object.__setattr__(self, 'singularity_distance', herding_setting('SINGULARITY_DISTANCE'))

    @property
    def n_drivers(self):
        return len(self.friction.nu_d)

    @property
    def n_evaders(self):
        return len(self.friction.nu_e)

    @property
    def dimension(self):
        return 4 * (self.n_drivers + self.n_evaders)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    States and controls on a time grid.

    times: (n+1,) node times, uniform unless produced by a time-scaled run
    driver_pos, driver_vel: (n+1, M, 2)
    evader_pos, evader_vel: (n+1, N, 2)
    kp, kc: (n+1, M) controls at the nodes
    model: the HerdingModel the trajectory was computed with, if known
    metadata: free-form provenance (seed, scenario hash, ...)
    """

    times: np.ndarray
    driver_pos: np.ndarray
    driver_vel: np.ndarray
    evader_pos: np.ndarray
    evader_vel: np.ndarray
    kp: np.ndarray
    kc: np.ndarray
    model: HerdingModel = None
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_vectors(cls, times, states, kp, kc, n_drivers, n_evaders, model=None, metadata=None):
        """Build a trajectory from stacked flat state vectors of shape (n+1, 4(M+N))."""
        states = np.asarray(states, dtype=float)
        count = len(states)
        m2, n2 = 2 * n_drivers, 2 * n_evaders
        return cls(
            times=np.asarray(times, dtype=float),
            driver_pos=states[:, :m2].reshape(count, n_drivers, 2),
            evader_pos=states[:, m2:m2 + n2].reshape(count, n_evaders, 2),
            driver_vel=states[:, m2 + n2:2 * m2 + n2].reshape(count, n_drivers, 2),
            evader_vel=states[:, 2 * m2 + n2:].reshape(count, n_evaders, 2),
            kp=np.asarray(kp, dtype=float).reshape(count, n_drivers),
            kc=np.asarray(kc, dtype=float).reshape(count, n_drivers),
            model=model,
            metadata=dict(metadata or {}),
        )

    @property
    def n_steps(self):
        return len(self.times) - 1

    @property
    def t_f(self):
        return float(self.times[-1])

    @property
    def n_drivers(self):
        return self.driver_pos.shape[1]

    @property
    def n_evaders(self):
        return self.evader_pos.shape[1]

    @property
    def is_uniform(self):
        if self.n_steps < 2:
            return True
        steps = np.diff(self.times)
        return bool(np.allclose(steps, steps[0], rtol=1e-9, atol=0.0))

    def state_vectors(self):
        count = len(self.times)
        return np.concatenate([
            self.driver_pos.reshape(count, -1),
            self.evader_pos.reshape(count, -1),
            self.driver_vel.reshape(count, -1),
            self.evader_vel.reshape(count, -1),
        ], axis=1)

    def state_at(self, index):
        return SystemState(
            t=self.times[index],
            driver_pos=self.driver_pos[index],
            driver_vel=self.driver_vel[index],
            evader_pos=self.evader_pos[index],
            evader_vel=self.evader_vel[index],
        )

    @property
    def final_state(self):
        return self.state_at(-1)

    def barycenters(self):
        """(n+1, 2) evader barycenter at every node."""
        return self.evader_pos.mean(axis=1)

    def relative(self):
        """Relative position and velocity u = u_d - u_e, v = u' for the one-driver, one-evader case."""
        if self.n_drivers != 1 or self.n_evaders != 1:
            raise UsageError("Relative coordinates need exactly one driver and one evader")
        return self.driver_pos[:, 0] - self.evader_pos[:, 0], self.driver_vel[:, 0] - self.evader_vel[:, 0]

    def tail_indices(self, tail_fraction):
        """Indices of the last ``tail_fraction`` of the run."""
        start = int(np.floor((1.0 - tail_fraction) * self.n_steps))
        return np.arange(start, self.n_steps + 1)
