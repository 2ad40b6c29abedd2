"""Signal model: effective channel, SNR, rate, receive beamformers and RIS power.

The active-surface SNR counts the surface's own thermal noise after it is
amplified and propagated through the backward channel; the passive SNR
omits it. The two are deliberately separate functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from activeris.channel import ChannelSet
from activeris.errors import DegenerateChannelError, ValidationError
from activeris.params import PowerModel, SystemParams

TWO_PI = 2.0 * np.pi
UNIT_NORM_TOL = 1e-9
DEGENERATE_NORM = 1e-15


@dataclass(frozen=True)
class ReflectConfig:
    """Per-element reflection coefficients ``a_m * exp(j theta_m)``."""

    amplitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.amplitudes, dtype=float))
        th = np.atleast_1d(np.asarray(self.phases, dtype=float))
        if a.ndim != 1 or a.shape != th.shape:
            raise ValidationError("amplitudes and phases must be 1-D and equally long")
        if np.any(a < 0) or not np.all(np.isfinite(a)):
            raise ValidationError("amplitudes must be finite and >= 0")
        if not np.all(np.isfinite(th)):
            raise ValidationError("phases must be finite")
        th = np.mod(th, TWO_PI)
        th[th >= TWO_PI] = 0.0  # mod can round up to exactly 2pi
        object.__setattr__(self, "amplitudes", a)
        object.__setattr__(self, "phases", th)

    @property
    def coefficients(self) -> np.ndarray:
        return self.amplitudes * np.exp(1j * self.phases)

    @property
    def size(self) -> int:
        return self.amplitudes.size

    @classmethod
    def from_coefficients(cls, phi) -> "ReflectConfig":
        phi = np.atleast_1d(np.asarray(phi, dtype=complex))
        return cls(np.abs(phi), np.angle(phi))

    @classmethod
    def zeros(cls, m: int) -> "ReflectConfig":
        return cls(np.zeros(m), np.zeros(m))

    @classmethod
    def unit(cls, phases) -> "ReflectConfig":
        phases = np.atleast_1d(np.asarray(phases, dtype=float))
        return cls(np.ones_like(phases), phases)


@dataclass(frozen=True)
class ReceiveWeights:
    """Unit-norm receive combining vector."""

    w: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.w, dtype=complex))
        if w.ndim != 1:
            raise ValidationError("receive weights must be a vector")
        if abs(np.linalg.norm(w) - 1.0) > UNIT_NORM_TOL:
            raise ValidationError(f"receive weights must have unit norm, got {np.linalg.norm(w)!r}")
        object.__setattr__(self, "w", w)

    @classmethod
    def normalized(cls, v) -> "ReceiveWeights":
        v = np.atleast_1d(np.asarray(v, dtype=complex))
        nrm = np.linalg.norm(v)
        if nrm < DEGENERATE_NORM:
            raise DegenerateChannelError("cannot normalize a zero vector")
        return cls(v / nrm)


def _check_dims(ch: ChannelSet, phi: ReflectConfig) -> None:
    if phi.size != ch.m_elems:
        raise ValidationError(f"{phi.size} coefficients for {ch.m_elems} elements")


def effective_channel(ch: ChannelSet, phi: ReflectConfig) -> np.ndarray:
    """Equivalent channel ``h1 + G diag(phi) h2``."""
    _check_dims(ch, phi)
    return ch.h1 + ch.g_mat @ (phi.coefficients * ch.h2)


def received_snr(ch: ChannelSet, phi: ReflectConfig, w: ReceiveWeights, p: SystemParams) -> float:
    """SNR of the active-surface link, amplified surface noise included."""
    h = effective_channel(ch, phi)
    wh = w.w.conj()
    signal = p.p_t * abs(wh @ h) ** 2
    ris_noise = p.sigma2_sq * np.sum(np.abs((wh @ ch.g_mat) * phi.coefficients) ** 2)
    return float(signal / (ris_noise + p.sigma1_sq * np.vdot(w.w, w.w).real))


def passive_snr(ch: ChannelSet, phi: ReflectConfig, w: ReceiveWeights, p: SystemParams) -> float:
    """SNR of a passive-surface link: surface noise neglected."""
    h = effective_channel(ch, phi)
    return float(p.p_t * abs(np.vdot(w.w, h)) ** 2 / p.sigma1_sq)


def achievable_rate(gamma):
    """Rate ``log2(1 + gamma)`` in bit/s/Hz."""
    if np.any(np.asarray(gamma) < 0):
        raise ValidationError("SNR must be >= 0")
    return np.log2(1.0 + np.asarray(gamma, dtype=float))[()]


def noise_covariance(ch: ChannelSet, phi: ReflectConfig, p: SystemParams) -> np.ndarray:
    """Receiver noise covariance ``sigma2^2 G Phi Phi^H G^H + sigma1^2 I``."""
    _check_dims(ch, phi)
    gp = ch.g_mat * phi.coefficients
    return p.sigma2_sq * (gp @ gp.conj().T) + p.sigma1_sq * np.eye(ch.n_rx)


def mmse_weights(ch: ChannelSet, phi: ReflectConfig, p: SystemParams) -> ReceiveWeights:
    """Linear MMSE combiner, normalized.

    Computed as ``C^{-1} h`` with ``C`` the noise covariance; adding the
    rank-one signal term ``h h^H`` to ``C`` only rescales that vector.
    """
    h = effective_channel(ch, phi)
    c = noise_covariance(ch, phi, p)
    v = cho_solve(cho_factor(c, lower=True), h)
    nrm = np.linalg.norm(v)
    if nrm < DEGENERATE_NORM:
        # h == 0: every combiner gives zero SNR
        e = np.zeros(ch.n_rx, dtype=complex)
        e[0] = 1.0
        return ReceiveWeights(e)
    return ReceiveWeights(v / nrm)


def mmse_snr(ch: ChannelSet, phi: ReflectConfig, p: SystemParams) -> float:
    """Largest SNR over all combiners, ``p_t h^H C^{-1} h``."""
    h = effective_channel(ch, phi)
    c = noise_covariance(ch, phi, p)
    return float(p.p_t * np.vdot(h, cho_solve(cho_factor(c, lower=True), h)).real)


def mrc_weights(ch: ChannelSet, phi: ReflectConfig) -> ReceiveWeights:
    """Maximal-ratio combiner along the effective channel."""
    h = effective_channel(ch, phi)
    if np.linalg.norm(h) < DEGENERATE_NORM:
        raise DegenerateChannelError("effective channel is zero; MRC undefined")
    return ReceiveWeights.normalized(h)


def ris_output_power(ch: ChannelSet, phi: ReflectConfig, p: SystemParams) -> float:
    """Power radiated by the surface: signal plus amplified surface noise."""
    _check_dims(ch, phi)
    incident = p.p_t * np.abs(ch.h2) ** 2 + p.sigma2_sq
    return float(np.sum(phi.amplitudes ** 2 * incident))


def amplification_budget(pm: PowerModel, m: int) -> float:
    """Power left for amplification after ``m`` elements are supplied.

    Negative or zero means the element count is infeasible.
    """
    if m < 0:
        raise ValidationError("element count must be >= 0")
    return pm.efficiency * (pm.p_ris - m * pm.per_element)


def total_power_consumed(ch: ChannelSet, phi: ReflectConfig, p: SystemParams,
                         pm: PowerModel) -> float:
    """Total surface consumption: circuits only when passive, plus bias and output power when active."""
    m = ch.m_elems
    if p.passive:
        return m * pm.p_c
    return m * pm.per_element + pm.xi * ris_output_power(ch, phi, p)
