"""Convex amplitude subproblem solved at every successive-convex-approximation step.

With phases aligned, the amplitude design maximizes

    p_t (b^T a + |h1|)^2 / (sigma2^2 a^T Q a + sigma1^2)

over ``a^T F a <= P_out`` and ``0 <= a <= a_max`` (Q, F diagonal). Writing
the SNR as ``tau`` and the noise as ``kappa`` and replacing ``sqrt(tau*kappa)``
by its tangent plane at ``(tau_t, kappa_t)`` gives a convex program. Because
``kappa`` binds at its lower bound and ``tau`` at the linearized constraint,
that program reduces to a separable concave quadratic over ``a``:

    maximize  sum_m sqrt(p_t) b_m a_m - c2 sigma2^2 q_m a_m^2
    s.t.      sum_m f_m a_m^2 <= P_out,   0 <= a_m <= a_max

whose KKT point is ``a_m(lam) = clip(sqrt(p_t) b_m / (2 (c2 sigma2^2 q_m + lam f_m)), 0, a_max)``
with a single multiplier ``lam >= 0`` found by a bracketed root search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from activeris.errors import ConvergenceError, InfeasibleError, ValidationError

LINEARIZATION_FLOOR = 1e-12
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class AmplitudeProblem:
    """Amplitude-only design problem for a fixed combiner and aligned phases.

    Attributes
    ----------
    b_bar : ndarray
        ``|h2_m| |g_m|``, magnitudes of the cascaded per-element gains.
    h1_abs : float
        Magnitude of the combined direct channel.
    q_diag : ndarray
        ``|g_m|^2``, weights of the amplified surface noise.
    f_diag : ndarray
        ``p_t |h2_m|^2 + sigma2^2``, incident power per element.
    p_out : float
        Amplification power budget (W).
    a_max : float
        Amplitude cap.
    """

    b_bar: np.ndarray
    h1_abs: float
    q_diag: np.ndarray
    f_diag: np.ndarray
    p_out: float
    a_max: float
    p_t: float
    sigma1_sq: float
    sigma2_sq: float

    def __post_init__(self):
        for name in ("b_bar", "q_diag", "f_diag"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        m = self.b_bar.size
        if self.q_diag.size != m or self.f_diag.size != m:
            raise ValidationError("b_bar, q_diag and f_diag must have equal length")
        if np.any(self.b_bar < 0) or np.any(self.q_diag < 0) or self.h1_abs < 0:
            raise ValidationError("b_bar, q_diag and h1_abs must be nonnegative")
        if np.any(self.f_diag <= 0):
            raise ValidationError("f_diag must be strictly positive")
        if not self.a_max >= 0:
            raise ValidationError("a_max must be >= 0")

    @property
    def size(self) -> int:
        return self.b_bar.size

    def noise(self, a: np.ndarray) -> float:
        return float(self.sigma2_sq * np.dot(self.q_diag, a * a) + self.sigma1_sq)

    def snr(self, a: np.ndarray) -> float:
        return float(self.p_t * (np.dot(self.b_bar, a) + self.h1_abs) ** 2 / self.noise(a))

    def output_power(self, a: np.ndarray) -> float:
        return float(np.dot(self.f_diag, a * a))

    def feasible_start(self) -> np.ndarray:
        """All amplitudes at the cap, shrunk uniformly into the power budget."""
        a = np.full(self.size, self.a_max)
        used = self.output_power(a)
        if used > self.p_out:
            a *= math.sqrt(self.p_out / used)
        return a

    def linearized(self, tau_t: float, kappa_t: float) -> "ScaSubproblem":
        return ScaSubproblem(self.b_bar, self.h1_abs, self.q_diag, self.f_diag, self.p_out,
                             self.a_max, self.p_t, self.sigma1_sq, self.sigma2_sq,
                             tau_t, kappa_t)


@dataclass(frozen=True)
class ScaSubproblem(AmplitudeProblem):
    """Amplitude problem with the tangent point ``(tau_t, kappa_t)`` fixed."""

    tau_t: float = 1.0
    kappa_t: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if not (self.tau_t > 0 and self.kappa_t > 0):
            raise ValidationError("linearization point must be strictly positive")


@dataclass(frozen=True)
class SubproblemSolution:
    a_bar: np.ndarray
    tau: float
    kappa: float
    kkt_residual: float


def taylor_upper_bound(tau, kappa, tau_t: float, kappa_t: float):
    """Tangent plane of ``sqrt(tau * kappa)`` at ``(tau_t, kappa_t)``; never below the surface."""
    if not (tau_t > 0 and kappa_t > 0):
        raise ValidationError("linearization point must be strictly positive")
    root = math.sqrt(tau_t * kappa_t)
    return (root + 0.5 * math.sqrt(kappa_t / tau_t) * (tau - tau_t)
            + 0.5 * math.sqrt(tau_t / kappa_t) * (kappa - kappa_t))


def _coefficients(tau_t: float, kappa_t: float):
    tau_t = max(tau_t, LINEARIZATION_FLOOR)
    kappa_t = max(kappa_t, LINEARIZATION_FLOOR)
    c1 = 0.5 * math.sqrt(kappa_t / tau_t)
    c2 = 0.5 * math.sqrt(tau_t / kappa_t)
    c0 = math.sqrt(tau_t * kappa_t) - c1 * tau_t - c2 * kappa_t
    return c0, c1, c2


def solve_subproblem(sp: ScaSubproblem, tol: float = 1e-8, max_iter: int = 200) -> SubproblemSolution:
    """Maximize ``tau`` over the linearized convex program.

    Raises
    ------
    InfeasibleError
        If the amplification budget is not positive.
    ConvergenceError
        If the multiplier search does not converge within ``max_iter`` steps.
    """
    if not sp.p_out > 0:
        raise InfeasibleError(f"amplification budget must be > 0, got {sp.p_out!r}")
    c0, c1, c2 = _coefficients(sp.tau_t, sp.kappa_t)
    lin = math.sqrt(sp.p_t) * sp.b_bar
    curv = c2 * sp.sigma2_sq * sp.q_diag
    active = lin > 0

    def amplitudes(lam: float) -> np.ndarray:
        a = np.zeros(sp.size)
        den = 2.0 * (curv[active] + lam * sp.f_diag[active])
        with np.errstate(divide="ignore"):
            a[active] = np.where(den > 0, lin[active] / den, np.inf)
        return np.minimum(a, sp.a_max)

    def excess(lam: float) -> float:
        a = amplitudes(lam)
        return float(np.dot(sp.f_diag, a * a)) - sp.p_out

    if excess(0.0) <= 0:
        a = amplitudes(0.0)
    else:
        # at this multiplier even the unclipped amplitudes fit the budget
        lam_hi = math.sqrt(float(np.sum(lin[active] ** 2 / sp.f_diag[active])) / (4.0 * sp.p_out))
        try:
            lam = brentq(excess, 0.0, lam_hi, xtol=lam_hi * 4 * _EPS,
                         rtol=max(tol * 1e-6, 4 * _EPS), maxiter=max_iter)
        except RuntimeError as exc:
            raise ConvergenceError(f"multiplier search did not converge: {exc}") from exc
        a = amplitudes(lam)
        used = float(np.dot(sp.f_diag, a * a))
        if used > sp.p_out:
            a *= math.sqrt(sp.p_out / used)

    kappa = sp.noise(a)
    tau = (math.sqrt(sp.p_t) * (float(np.dot(sp.b_bar, a)) + sp.h1_abs) - c0 - c2 * kappa) / c1
    residual = max(0.0, float(np.dot(sp.f_diag, a * a)) - sp.p_out,
                   float(np.max(a - sp.a_max, initial=0.0)), float(np.max(-a, initial=0.0)))
    return SubproblemSolution(a, tau, kappa, residual)
