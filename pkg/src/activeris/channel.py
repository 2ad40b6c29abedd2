"""Large-scale pathloss and small-scale fading channel generation."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from activeris.errors import ValidationError
from activeris.params import Geometry, SystemParams

TWO_PI = 2.0 * np.pi


class FadingKind(str, enum.Enum):
    LOS = "los"
    RAYLEIGH = "rayleigh"


@dataclass(frozen=True)
class FadingModel:
    """Small-scale fading description.

    For LOS links the per-element phase offsets of the forward and backward
    channels may be given; they default to zero. ``gains`` optionally
    overrides the distance-based pathloss with fixed power gains
    ``(direct, forward, backward)``.
    """

    kind: FadingKind = FadingKind.RAYLEIGH
    forward_phases: Optional[np.ndarray] = None
    backward_phases: Optional[np.ndarray] = None
    gains: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", FadingKind(self.kind))
        for name in ("forward_phases", "backward_phases"):
            ph = getattr(self, name)
            if ph is None:
                continue
            ph = np.asarray(ph, dtype=float)
            if np.any((ph < 0) | (ph >= TWO_PI)) or not np.all(np.isfinite(ph)):
                raise ValidationError(f"{name} must lie in [0, 2pi)")
            object.__setattr__(self, name, ph)
        if self.gains is not None:
            g = tuple(float(v) for v in self.gains)
            if len(g) != 3 or min(g) <= 0:
                raise ValidationError("gains must be three positive power gains")
            object.__setattr__(self, "gains", g)


@dataclass(frozen=True)
class ChannelSet:
    """Direct (N,), forward (M,) and backward (N, M) complex channels."""

    h1: np.ndarray
    h2: np.ndarray
    g_mat: np.ndarray

    def __post_init__(self):
        h1 = np.atleast_1d(np.asarray(self.h1, dtype=complex))
        h2 = np.atleast_1d(np.asarray(self.h2, dtype=complex))
        g = np.atleast_2d(np.asarray(self.g_mat, dtype=complex))
        if h1.ndim != 1 or h2.ndim != 1 or g.shape != (h1.size, h2.size):
            raise ValidationError(
                f"inconsistent channel shapes h1{h1.shape} h2{h2.shape} G{g.shape}")
        if not (np.all(np.isfinite(h1)) and np.all(np.isfinite(h2)) and np.all(np.isfinite(g))):
            raise ValidationError("channel entries must be finite")
        object.__setattr__(self, "h1", h1)
        object.__setattr__(self, "h2", h2)
        object.__setattr__(self, "g_mat", g)

    @property
    def n_rx(self) -> int:
        return self.h1.size

    @property
    def m_elems(self) -> int:
        return self.h2.size

    def rotated(self, phase: float) -> "ChannelSet":
        """Apply a common phase rotation to every link (used in invariance checks)."""
        r = np.exp(1j * phase)
        return ChannelSet(self.h1 * r, self.h2 * r, self.g_mat * r)


def pathloss_gain(d: float, eta: float, beta: float) -> float:
    """Large-scale power gain ``1 / (d**eta * beta)``."""
    if not d > 0:
        raise ValidationError(f"distance must be > 0, got {d!r}")
    if not beta > 0:
        raise ValidationError(f"reference pathloss must be > 0, got {beta!r}")
    return 1.0 / (d ** eta * beta)


def link_gains(geom: Geometry) -> tuple:
    """Pathloss power gains (direct, forward, backward) for a geometry."""
    d1, d2, dg = geom.distances()
    return (pathloss_gain(d1, geom.eta_direct, geom.beta_direct),
            pathloss_gain(d2, geom.eta_forward, geom.beta_forward),
            pathloss_gain(dg, geom.eta_backward, geom.beta_backward))


def trial_rng(seed: int, trial: int = 0) -> np.random.Generator:
    """Independent Philox substream for Monte Carlo trial ``trial`` of run ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(trial),))
    return np.random.Generator(np.random.Philox(ss))


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def sample_channels(params: SystemParams, geom: Geometry, fading: FadingModel,
                    seed: int, trial: int = 0) -> ChannelSet:
    """Draw one channel realization.

    Rayleigh entries are ``rho * CN(0, 1)``; LOS entries have magnitude
    exactly ``rho`` and the configured phase. The same ``(seed, trial)``
    always yields the same channels.
    """
    n, m = params.n_rx, params.m_elems
    gains = fading.gains if fading.gains is not None else link_gains(geom)
    rho1, rho2, rhog = (math.sqrt(v) for v in gains)

    if fading.kind is FadingKind.RAYLEIGH:
        rng = trial_rng(seed, trial)
        h1 = rho1 * _cn(rng, n)
        h2 = rho2 * _cn(rng, m)
        g = rhog * _cn(rng, (n, m))
        return ChannelSet(h1, h2, g)

    om2 = np.zeros(m) if fading.forward_phases is None else fading.forward_phases
    omg = np.zeros(m) if fading.backward_phases is None else fading.backward_phases
    if om2.size != m or omg.size != m:
        raise ValidationError("LOS phase vectors must have one entry per element")
    h1 = np.full(n, rho1, dtype=complex)
    h2 = rho2 * np.exp(1j * om2)
    g = np.tile(rhog * np.exp(1j * omg), (n, 1))
    return ChannelSet(h1, h2, g)
