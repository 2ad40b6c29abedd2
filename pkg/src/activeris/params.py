"""Unit conversions and validated parameter containers.

Everything downstream works in linear SI units (watts, metres). The dB/dBm
helpers below exist only for config files and reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from activeris.errors import ValidationError

Point = Tuple[float, float]


def dbm_to_watts(x):
    """Convert dBm to watts (scalar or array)."""
    return 10.0 ** ((np.asarray(x, dtype=float) - 30.0) / 10.0)[()]


def watts_to_dbm(x):
    """Convert watts to dBm. Non-positive input raises."""
    if np.any(np.asarray(x) <= 0):
        raise ValidationError("power must be strictly positive to express in dBm")
    return 10.0 * np.log10(x) + 30.0


def db_to_linear(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)[()]


def linear_to_db(x):
    if np.any(np.asarray(x) <= 0):
        raise ValidationError("ratio must be strictly positive to express in dB")
    return 10.0 * np.log10(x)


def _require_positive(name: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0):
        raise ValidationError(f"{name} must be finite and > 0, got {value!r}")


@dataclass(frozen=True)
class SystemParams:
    """Link-level parameters.

    Attributes
    ----------
    p_t : float
        Transmit power (W).
    sigma1_sq, sigma2_sq : float
        Noise power at the receiver and at the surface (W).
    n_rx : int
        Receive antennas.
    m_elems : int
        Reflecting elements.
    a_max : float
        Per-element amplitude cap. Must be >= 1 for an active surface and
        exactly 1 when ``passive`` is set.
    passive : bool
        Marks a conventional phase-only surface.
    """

    p_t: float
    sigma1_sq: float
    sigma2_sq: float
    n_rx: int
    m_elems: int
    a_max: float = 1.0
    passive: bool = False

    def __post_init__(self):
        _require_positive("p_t", self.p_t)
        _require_positive("sigma1_sq", self.sigma1_sq)
        _require_positive("sigma2_sq", self.sigma2_sq)
        for name in ("n_rx", "m_elems"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValidationError(f"{name} must be an integer >= 1, got {v!r}")
        if not math.isfinite(self.a_max):
            raise ValidationError("a_max must be finite")
        if self.passive and self.a_max != 1.0:
            raise ValidationError("passive configurations require a_max == 1")
        if not self.passive and self.a_max < 1.0:
            raise ValidationError(f"active configurations require a_max >= 1, got {self.a_max!r}")

    @property
    def snr_scale(self) -> float:
        """Transmit-power-to-receiver-noise ratio p_t / sigma1^2."""
        return self.p_t / self.sigma1_sq


@dataclass(frozen=True)
class PowerModel:
    """Power consumption model of the surface.

    ``p_ris`` is the total budget, ``p_c`` the per-element switch/control
    power, ``p_dc`` the per-element DC bias power of an active element and
    ``efficiency`` the reflection-amplifier efficiency (its inverse is the
    output-power-dependent consumption factor).
    """

    p_ris: float
    p_c: float
    p_dc: float = 0.0
    efficiency: float = 1.0

    def __post_init__(self):
        _require_positive("p_ris", self.p_ris)
        _require_positive("p_c", self.p_c)
        if not (math.isfinite(self.p_dc) and self.p_dc >= 0):
            raise ValidationError(f"p_dc must be finite and >= 0, got {self.p_dc!r}")
        if not (0 < self.efficiency <= 1):
            raise ValidationError(f"efficiency must lie in (0, 1], got {self.efficiency!r}")

    @property
    def xi(self) -> float:
        return 1.0 / self.efficiency

    @property
    def per_element(self) -> float:
        """Output-power-independent consumption of one active element."""
        return self.p_c + self.p_dc

    def max_active_elements(self) -> int:
        """Largest element count that leaves a strictly positive amplification budget."""
        return int(math.ceil(self.p_ris / self.per_element)) - 1

    def max_passive_elements(self) -> int:
        return int(math.floor(self.p_ris / self.p_c))

    @classmethod
    def for_output_budget(cls, p_out: float, m: int, p_c: float, p_dc: float = 0.0,
                          efficiency: float = 1.0) -> "PowerModel":
        """Build the model whose amplification budget at ``m`` elements equals ``p_out``."""
        _require_positive("p_out", p_out)
        return cls(p_ris=p_out / efficiency + m * (p_c + p_dc), p_c=p_c, p_dc=p_dc,
                   efficiency=efficiency)


@dataclass(frozen=True)
class Geometry:
    """Planar node placement and per-link large-scale pathloss constants.

    ``forward`` is Tx->surface, ``backward`` surface->Rx, ``direct`` Tx->Rx.
    ``beta_*`` are linear pathloss values at the 1 m reference distance.
    """

    tx: Point = (0.0, 0.0)
    rx: Point = (200.0, 0.0)
    ris: Point = (180.0, 10.0)
    eta_direct: float = 3.5
    eta_forward: float = 2.0
    eta_backward: float = 2.8
    beta_direct: float = 1e3
    beta_forward: float = 1e3
    beta_backward: float = 1e3

    def __post_init__(self):
        for name in ("tx", "rx", "ris"):
            p = tuple(float(c) for c in getattr(self, name))
            if len(p) != 2 or not all(map(math.isfinite, p)):
                raise ValidationError(f"{name} must be a finite 2-D point, got {p!r}")
            object.__setattr__(self, name, p)
        for name in ("eta_direct", "eta_forward", "eta_backward",
                     "beta_direct", "beta_forward", "beta_backward"):
            _require_positive(name, getattr(self, name))
        for name, d in zip(("direct", "forward", "backward"), self.distances()):
            if d <= 0:
                raise ValidationError(f"{name} link has zero length; nodes must be distinct")

    def distances(self) -> Tuple[float, float, float]:
        """Return (Tx-Rx, Tx-surface, surface-Rx) Euclidean distances."""
        return (math.dist(self.tx, self.rx), math.dist(self.tx, self.ris),
                math.dist(self.ris, self.rx))

    def with_ris_x(self, x: float) -> "Geometry":
        return replace(self, ris=(x, self.ris[1]))
