"""
Scenario schema: kernels, friction, initial data, bounds, target and the
per-command blocks (schedule, reach, optimization, feedback).

Scenarios are validated with pydantic on load; every block has defaults so a
loaded scenario can be echoed back with all values filled in.
"""
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from controls.models import ControlBounds, Constant, FeedbackRef, OffBangOff, ScheduleSequence
from dynamics.models import FrictionParams, SystemState
from feedback.models import FeedbackParams
from kernels.models import DEFAULT_KERNELS, KernelSet, build_kernel

Point = tuple[float, float]
PerAgent = Union[float, list[float]]


class SchemaModel(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)


class KernelsConfig(SchemaModel):
    f_d: dict = Field(default_factory=lambda: DEFAULT_KERNELS.f_d.to_config())
    f_e: dict = Field(default_factory=lambda: DEFAULT_KERNELS.f_e.to_config())
    psi_d: dict = Field(default_factory=lambda: DEFAULT_KERNELS.psi_d.to_config())
    psi_e: dict = Field(default_factory=lambda: DEFAULT_KERNELS.psi_e.to_config())
    psi_e_sign: Literal[1, -1] = 1

    @model_validator(mode='after')
    def check_families(self):
        for name in ('f_d', 'f_e', 'psi_d', 'psi_e'):
            build_kernel(getattr(self, name))
        return self

    def build(self):
        return KernelSet(
            f_d=build_kernel(self.f_d),
            f_e=build_kernel(self.f_e),
            psi_d=build_kernel(self.psi_d),
            psi_e=build_kernel(self.psi_e),
            psi_e_sign=self.psi_e_sign,
        )


class FrictionConfig(SchemaModel):
    """A single value applies to every agent of the group."""

    nu_d: PerAgent = 2.0
    nu_e: PerAgent = 2.0

    @field_validator('nu_d', 'nu_e')
    @classmethod
    def check_positive(cls, value):
        values = value if isinstance(value, list) else [value]
        if not values or any(not v > 0 for v in values):
            raise ValueError('friction must be positive')
        return value

    def expand(self, n_drivers, n_evaders):
        nu_d = np.broadcast_to(np.asarray(self.nu_d, dtype=float), (n_drivers,)).copy()
        nu_e = np.broadcast_to(np.asarray(self.nu_e, dtype=float), (n_evaders,)).copy()
        return FrictionParams(nu_d=nu_d, nu_e=nu_e)


class AgentConfig(SchemaModel):
    position: Point
    velocity: Point = (0.0, 0.0)


class RandomEvadersConfig(SchemaModel):
    """Evaders drawn uniformly in box x box; the seed is required."""

    count: int = Field(gt=0)
    box: tuple[float, float] = (-0.2, 0.2)
    seed: int

    @model_validator(mode='after')
    def check_box(self):
        if not self.box[0] < self.box[1]:
            raise ValueError('random box must satisfy low < high')
        return self

    def positions(self, seed=None):
        rng = np.random.default_rng(self.seed if seed is None else seed)
        return rng.uniform(self.box[0], self.box[1], size=(self.count, 2))


class BoundsConfig(SchemaModel):
    kp_min: float = 0.0
    kp_max: float = 1.0
    kc_min: float = -5.0
    kc_max: float = 5.0

    @model_validator(mode='after')
    def check_order(self):
        if self.kp_min > self.kp_max or self.kc_min > self.kc_max:
            raise ValueError('control bounds must satisfy min <= max')
        return self


class IntegratorConfig(SchemaModel):
    t_f: float = Field(default=10.0, gt=0)
    n_steps: int = Field(default=1000, gt=0)


class ConstantSchedule(SchemaModel):
    kind: Literal['constant'] = 'constant'
    kappa_p: PerAgent = 1.0
    kappa_c: PerAgent = 0.0

    def build(self):
        return Constant(self.kappa_p, self.kappa_c)


class OffBangOffSchedule(SchemaModel):
    kind: Literal['off_bang_off'] = 'off_bang_off'
    t1: float = Field(ge=0)
    t2: float
    kappa_c: PerAgent
    kappa_p: PerAgent = 1.0

    @model_validator(mode='after')
    def check_switches(self):
        if self.t2 < self.t1:
            raise ValueError('off-bang-off needs t1 <= t2')
        return self

    def build(self):
        return OffBangOff(self.t1, self.t2, self.kappa_c, self.kappa_p)


class PieceConfig(SchemaModel):
    start: float
    schedule: Annotated[Union[ConstantSchedule, OffBangOffSchedule], Field(discriminator='kind')]


class PiecewiseSchedule(SchemaModel):
    """Open-loop schedules played one after the other, each read in its own local time."""

    kind: Literal['piecewise'] = 'piecewise'
    pieces: list[PieceConfig] = Field(min_length=1)

    @model_validator(mode='after')
    def check_starts(self):
        starts = [piece.start for piece in self.pieces]
        if starts[0] != 0 or any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError('piece starts must begin at 0 and increase')
        return self

    def build(self):
        return ScheduleSequence(
            starts=tuple(piece.start for piece in self.pieces),
            pieces=tuple(piece.schedule.build() for piece in self.pieces),
        )


class FeedbackSchedule(SchemaModel):
    """Closed-loop schedule; parameters come from the scenario's ``feedback`` block."""

    kind: Literal['feedback'] = 'feedback'


ScheduleConfig = Annotated[
    Union[ConstantSchedule, OffBangOffSchedule, PiecewiseSchedule, FeedbackSchedule],
    Field(discriminator='kind'),
]


class ReachConfig(SchemaModel):
    kappa_c: float = 1.0
    t1: Optional[float] = None
    tolerance: Optional[float] = None
    t2_max: float = 20.0
    tf_range: tuple[float, float] = (0.5, 25.0)
    waypoints: list[Point] = Field(default_factory=list)


class OptimizationConfig(SchemaModel):
    cost: Literal['guidance', 'stabilization'] = 'guidance'
    delta1: float = Field(default=0.001, ge=0)
    delta2: float = Field(default=0.0, ge=0)
    delta3: float = Field(default=0.0, ge=0)
    final_time: Literal['fixed', 'free', 'profile'] = 'fixed'
    optimize_kp: bool = False
    segments: int = Field(default=10, gt=0)
    initial_guess: Literal['constant', 'off_bang_off', 'hand'] = 'constant'
    # nodes of the hand-specified guess: rows of (start, kappa_c per driver)
    hand_guess: list[list[float]] = Field(default_factory=list)
    max_iter: Optional[int] = Field(default=None, ge=0)


class FeedbackConfig(SchemaModel):
    kappa_bar_c: float = Field(default=3.0, gt=0)
    gather_on: float = Field(default=0.3, gt=0)
    gather_off: float = Field(default=0.27, gt=0)
    stop_radius: float = Field(default=0.05, gt=0)
    gathering: bool = False
    stop_rule: Literal['target', 'horizon'] = 'target'

    @model_validator(mode='after')
    def check_thresholds(self):
        if not self.gather_off < self.gather_on:
            raise ValueError('gather_off must be below gather_on')
        return self


class Scenario(SchemaModel):
    name: str
    description: str = ''
    # values the source setup leaves unstated and this scenario assumes
    assumptions: list[str] = Field(default_factory=list)
    kernels: KernelsConfig = Field(default_factory=KernelsConfig)
    friction: FrictionConfig = Field(default_factory=FrictionConfig)
    drivers: list[AgentConfig] = Field(min_length=1)
    evaders: list[AgentConfig] = Field(default_factory=list)
    random_evaders: Optional[RandomEvadersConfig] = None
    bounds: BoundsConfig = Field(default_factory=BoundsConfig)
    target: Optional[Point] = None
    integrator: IntegratorConfig = Field(default_factory=IntegratorConfig)
    schedule: ScheduleConfig = Field(default_factory=ConstantSchedule)
    reach: ReachConfig = Field(default_factory=ReachConfig)
    optimization: OptimizationConfig = Field(default_factory=OptimizationConfig)
    feedback: FeedbackConfig = Field(default_factory=FeedbackConfig)

    @model_validator(mode='after')
    def check_initial_data(self):
        if not self.evaders and self.random_evaders is None:
            raise ValueError('a scenario needs at least one evader')
        for name, value in (('nu_d', self.friction.nu_d), ('nu_e', self.friction.nu_e)):
            count = len(self.drivers) if name == 'nu_d' else self.n_evaders
            if isinstance(value, list) and len(value) not in (1, count):
                raise ValueError(f'{name} needs one value or one per agent, got {len(value)}')
        if isinstance(self.schedule, FeedbackSchedule) and self.target is None:
            raise ValueError('a feedback schedule needs a target')
        drivers = np.array([agent.position for agent in self.drivers], dtype=float)
        evaders = self._evader_positions()
        gaps = np.linalg.norm(drivers[:, None, :] - evaders[None, :, :], axis=-1)
        if np.any(gaps == 0):
            raise ValueError('singular initial data: a driver starts on an evader')
        return self

    @property
    def n_evaders(self):
        return len(self.evaders) + (self.random_evaders.count if self.random_evaders else 0)

    @property
    def seed(self):
        return self.random_evaders.seed if self.random_evaders else None

    def with_seed(self, seed):
        """Copy with another seed for the random evaders; unchanged when there are none."""
        if self.random_evaders is None or seed is None:
            return self
        block = self.random_evaders.model_copy(update={'seed': int(seed)})
        return self.model_copy(update={'random_evaders': block})

    def _evader_positions(self):
        listed = np.array([agent.position for agent in self.evaders], dtype=float).reshape(-1, 2)
        if self.random_evaders is None:
            return listed
        return np.vstack([listed, self.random_evaders.positions()])

    def kernel_set(self):
        return self.kernels.build()

    def friction_params(self):
        return self.friction.expand(len(self.drivers), self.n_evaders)

    def initial_state(self):
        listed = np.array([agent.velocity for agent in self.evaders], dtype=float).reshape(-1, 2)
        evader_vel = np.zeros((self.n_evaders, 2))
        evader_vel[:len(listed)] = listed
        return SystemState(
            t=0.0,
            driver_pos=[agent.position for agent in self.drivers],
            driver_vel=[agent.velocity for agent in self.drivers],
            evader_pos=self._evader_positions(),
            evader_vel=evader_vel,
        )

    def control_bounds(self):
        return ControlBounds(**self.bounds.model_dump())

    def feedback_params(self):
        block = self.feedback
        return FeedbackParams(
            target=self.target,
            kappa_bar_c=block.kappa_bar_c,
            gather_on=block.gather_on,
            gather_off=block.gather_off,
            stop_radius=block.stop_radius,
        )

    def control_schedule(self):
        if isinstance(self.schedule, FeedbackSchedule):
            return FeedbackRef(self.feedback_params(), gathering=self.feedback.gathering)
        return self.schedule.build()
