"""Load/antenna impedance relations for passive and negative-resistance elements.

Diagnostic only: the optimizer works with coefficients directly. These
helpers map coefficients to the load impedances that would realize them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from activeris.errors import SingularityError, ValidationError

SINGULAR_OHMS = 1e-12


@dataclass(frozen=True)
class Impedance:
    """Complex impedance in ohms. Active loads carry a negative resistance."""

    resistance: float
    reactance: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.resistance) and math.isfinite(self.reactance)):
            raise ValidationError("impedance components must be finite")

    @property
    def z(self) -> complex:
        return complex(self.resistance, self.reactance)

    @classmethod
    def from_complex(cls, z: complex) -> "Impedance":
        return cls(z.real, z.imag)

    @classmethod
    def active(cls, r_load: float, x_load: float = 0.0) -> "Impedance":
        """Negative-resistance load ``-r_load + j x_load`` with ``r_load > 0``."""
        if not r_load > 0:
            raise ValidationError("active load magnitude r_load must be > 0")
        return cls(-r_load, x_load)


ImpedanceLike = Union[Impedance, complex, float]


def _z(value: ImpedanceLike) -> complex:
    return value.z if isinstance(value, Impedance) else complex(value)


def _check_antenna(z_a: complex) -> None:
    if not z_a.real > 0:
        raise ValidationError(f"antenna resistance must be > 0, got {z_a.real!r}")


def reflection_coefficient(z_load: ImpedanceLike, z_antenna: ImpedanceLike) -> complex:
    """Reflection coefficient ``(Z_L - Z_A*) / (Z_L + Z_A)``."""
    z_l, z_a = _z(z_load), _z(z_antenna)
    _check_antenna(z_a)
    den = z_l + z_a
    if abs(den) < SINGULAR_OHMS:
        raise SingularityError("load cancels the antenna impedance")
    return (z_l - z_a.conjugate()) / den


def amplitude_gain_sq(r_load: float, x_load: float, z_antenna: ImpedanceLike) -> float:
    """Power reflection gain ``|Gamma|^2`` of the active load ``-r_load + j x_load``.

    Always exceeds one; unbounded when ``r_load == R_A`` and ``x_load == -X_A``.
    """
    if not r_load > 0:
        raise ValidationError("r_load must be > 0 (it enters the load as -r_load)")
    z_a = _z(z_antenna)
    _check_antenna(z_a)
    r_a, x_a = z_a.real, z_a.imag
    x_sum = x_load + x_a
    den = (r_load - r_a) ** 2 + x_sum ** 2
    if math.sqrt(den) < SINGULAR_OHMS:
        raise SingularityError("negative resistance matches the antenna: unbounded gain")
    return ((r_load + r_a) ** 2 + x_sum ** 2) / den


def load_for_coefficient(gamma: complex, z_antenna: ImpedanceLike) -> Impedance:
    """Load impedance ``(Gamma Z_A + Z_A*) / (1 - Gamma)`` realizing ``gamma``."""
    z_a = _z(z_antenna)
    _check_antenna(z_a)
    den = 1.0 - gamma
    if abs(den) < SINGULAR_OHMS:
        raise SingularityError("gamma = 1 requires an infinite load")
    return Impedance.from_complex((gamma * z_a + z_a.conjugate()) / den)
