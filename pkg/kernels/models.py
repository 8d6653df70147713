"""
Interaction kernels for the driver/evader model.

A kernel is a radial force magnitude r -> phi(r), r > 0. Kernels come from a
closed set of analytic families so that scenario files stay serializable and
the adjoint can differentiate them exactly.
"""
from dataclasses import dataclass, field
import math

import numpy as np


# Radius used to read off the limit of f_d at infinity
FAR_FIELD_RADIUS = 1e6


class KernelFamily:
    """Base class for the analytic kernel families."""

    family = ''

    def __call__(self, r):
        raise NotImplementedError

    def derivative(self, r):
        """Return d phi / dr."""
        raise NotImplementedError

    def moment_primitive(self, r):
        """Return an antiderivative of s * phi(s) evaluated at r."""
        raise NotImplementedError

    def to_config(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(KernelFamily):
    """phi(r) = value"""

    value: float

    family = 'constant'

    def __call__(self, r):
        return self.value + 0.0 * r

    def derivative(self, r):
        return 0.0 * r

    def moment_primitive(self, r):
        return 0.5 * self.value * r * r

    def to_config(self):
        if self.value == 0.0:
            return {'family': 'zero'}
        return {'family': self.family, 'value': self.value}


@dataclass(frozen=True)
class InversePower(KernelFamily):
    """phi(r) = coefficient * r**(-power)"""

    coefficient: float
    power: float

    family = 'inverse_power'

    def __call__(self, r):
        return self.coefficient * r ** (-self.power)

    def derivative(self, r):
        return -self.power * self.coefficient * r ** (-self.power - 1.0)

    def moment_primitive(self, r):
        if self.power == 2:
            return self.coefficient * np.log(r)
        exponent = 2.0 - self.power
        return self.coefficient * r ** exponent / exponent

    def to_config(self):
        return {'family': self.family, 'coefficient': self.coefficient, 'power': self.power}


@dataclass(frozen=True)
class DifferenceOfInversePowers(KernelFamily):
    """phi(r) = a * r**(-p) - b * r**(-q)"""

    a: float
    p: float
    b: float
    q: float

    family = 'difference_of_inverse_powers'

    @property
    def _terms(self):
        return InversePower(self.a, self.p), InversePower(self.b, self.q)

    def __call__(self, r):
        first, second = self._terms
        return first(r) - second(r)

    def derivative(self, r):
        first, second = self._terms
        return first.derivative(r) - second.derivative(r)

    def moment_primitive(self, r):
        first, second = self._terms
        return first.moment_primitive(r) - second.moment_primitive(r)

    def to_config(self):
        return {'family': self.family, 'a': self.a, 'p': self.p, 'b': self.b, 'q': self.q}


KERNEL_FAMILIES = {
    'constant': Constant,
    'inverse_power': InversePower,
    'difference_of_inverse_powers': DifferenceOfInversePowers,
}


def build_kernel(config):
    """
    Build a kernel from its serialized form.

    Args:
        config: Mapping with a ``family`` key and the family parameters,
            e.g. ``{'family': 'inverse_power', 'coefficient': 1.0, 'power': 2}``

    Returns:
        KernelFamily instance

    Raises:
        ValueError: If the family is unknown or parameters are missing
    """
    params = dict(config)
    family = params.pop('family', None)
    if family == 'zero':
        return Constant(0.0)
    if family not in KERNEL_FAMILIES:
        raise ValueError(f"Unknown kernel family: {family!r}")
    try:
        return KERNEL_FAMILIES[family](**{key: float(value) for key, value in params.items()})
    except TypeError as exc:
        raise ValueError(f"Bad parameters for kernel family {family!r}: {exc}")


@dataclass(frozen=True)
class KernelSet:
    """
    The four interaction kernels of the model.

    f_d: driver pursuit kernel (bounded, nonnegative)
    f_e: evader repulsion kernel (nonnegative, vanishing at infinity)
    psi_d: driver-driver kernel, repulsive
    psi_e: evader-evader kernel
    psi_e_sign: +1 applies psi_e attractively at long range (flocking);
        -1 reproduces the opposite sign convention for comparison runs.
    gamma_m: limit of f_d at infinity, read off the far field when omitted.
    """

    f_d: KernelFamily
    f_e: KernelFamily
    psi_d: KernelFamily
    psi_e: KernelFamily
    psi_e_sign: int = 1
    gamma_m: float = field(default=None)

    def __post_init__(self):
        if self.psi_e_sign not in (1, -1):
            raise ValueError("psi_e_sign must be +1 or -1")
        if self.gamma_m is None:
            object.__setattr__(self, 'gamma_m', float(self.f_d(FAR_FIELD_RADIUS)))
        if not math.isfinite(self.gamma_m):
            raise ValueError(f"gamma_m must be finite, got {self.gamma_m}")

    def relative(self, r):
        """f(r) = f_d(r) - f_e(r), vectorized and unchecked."""
        return self.f_d(r) - self.f_e(r)

    def relative_derivative(self, r):
        return self.f_d.derivative(r) - self.f_e.derivative(r)

    def to_config(self):
        return {
            'f_d': self.f_d.to_config(),
            'f_e': self.f_e.to_config(),
            'psi_d': self.psi_d.to_config(),
            'psi_e': self.psi_e.to_config(),
            'psi_e_sign': self.psi_e_sign,
        }


DEFAULT_KERNELS = KernelSet(
    f_d=Constant(1.0),
    f_e=InversePower(1.0, 2),
    psi_d=InversePower(0.5, 4),
    # 10 * (0.1**2 / r**2 - 0.1**4 / r**4)
    psi_e=DifferenceOfInversePowers(0.1, 2, 0.001, 4),
)

# Same kernels without evader-evader interaction
NO_FLOCKING_KERNELS = KernelSet(
    f_d=Constant(1.0),
    f_e=InversePower(1.0, 2),
    psi_d=InversePower(0.5, 4),
    psi_e=Constant(0.0),
)
