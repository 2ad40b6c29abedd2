"""Surface sizing for line-of-sight links with the direct path ignored.

With every forward and backward channel of equal magnitude, equal amplitudes
are optimal for any element count, so the SNR becomes a function of ``m``
alone. Adding elements raises the array gain but eats the shared budget, and
the trade-off has an interior optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from activeris.channel import link_gains
from activeris.errors import InfeasibleError, ValidationError
from activeris.params import Geometry, PowerModel


@dataclass(frozen=True)
class LosParams:
    """Line-of-sight link seen by the sizing formulas.

    Attributes
    ----------
    rho2_sq, rhog_sq : float
        Forward (Tx to surface) and backward (surface to Rx) power gains.
    p_t, sigma1_sq, sigma2_sq : float
        Transmit power and receiver/surface noise powers (W).
    pm : PowerModel
        Surface power budget and per-element consumption.
    a_max : float
        Amplitude cap.
    """

    rho2_sq: float
    rhog_sq: float
    p_t: float
    sigma1_sq: float
    sigma2_sq: float
    pm: PowerModel
    a_max: float = 1.0

    def __post_init__(self):
        for name in ("rho2_sq", "rhog_sq", "p_t", "sigma1_sq", "sigma2_sq", "a_max"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be finite and > 0, got {v!r}")

    @classmethod
    def from_geometry(cls, geom: Geometry, p_t: float, sigma1_sq: float, sigma2_sq: float,
                      pm: PowerModel, a_max: float = 1.0) -> "LosParams":
        _, rho2_sq, rhog_sq = link_gains(geom)
        return cls(rho2_sq, rhog_sq, p_t, sigma1_sq, sigma2_sq, pm, a_max)


@dataclass(frozen=True)
class SizingResult:
    m1: float
    m2: float
    m_star_real: float
    m_opt: int
    snr_at_opt: float


def los_equal_amplitude(lp: LosParams, m: int) -> float:
    """Common amplitude spending the whole amplification budget, capped at ``a_max``."""
    if m < 1:
        raise ValidationError(f"element count must be >= 1, got {m!r}")
    pm = lp.pm
    spare = pm.p_ris - m * pm.per_element
    if not spare > 0:
        raise InfeasibleError(f"{m} elements exhaust the surface budget")
    a = math.sqrt(pm.efficiency * spare / (m * (lp.p_t * lp.rho2_sq + lp.sigma2_sq)))
    return min(a, lp.a_max)


def los_snr(lp: LosParams, m, a) -> float:
    """SNR of ``m`` co-phased elements with common amplitude ``a``."""
    a_sq = a * a
    return (lp.p_t * lp.rho2_sq * lp.rhog_sq * m * m * a_sq
            / (lp.rhog_sq * lp.sigma2_sq * m * a_sq + lp.sigma1_sq))


def _budget_branch_peak(lp: LosParams) -> float:
    # Stationary point of the SNR when the budget binds, written as
    # (P_RIS / Pcd) * sqrt(A) / (sqrt(A) + sqrt(B)) to avoid cancellation.
    pm = lp.pm
    base = lp.p_t * lp.rho2_sq * lp.sigma1_sq + lp.sigma1_sq * lp.sigma2_sq
    full = pm.efficiency * pm.p_ris * lp.rhog_sq * lp.sigma2_sq + base
    ra, rb = math.sqrt(full), math.sqrt(base)
    return pm.p_ris / pm.per_element * ra / (ra + rb)


def _cap_branch_end(lp: LosParams) -> float:
    # Largest m at which the cap still binds.
    pm = lp.pm
    return (pm.efficiency * pm.p_ris
            / (lp.a_max ** 2 * (lp.p_t * lp.rho2_sq + lp.sigma2_sq)
               + pm.efficiency * pm.per_element))


def optimal_num_elements(lp: LosParams) -> SizingResult:
    """Element count maximizing the equal-amplitude LOS SNR.

    The real-valued optimum is the larger of the budget-branch peak and the
    end of the cap branch; the integer answer is whichever neighbour gives
    the higher SNR, ties going to the smaller surface.

    Raises
    ------
    InfeasibleError
        If not even one element leaves a positive amplification budget.
    """
    m_max = lp.pm.max_active_elements()
    if m_max < 1:
        raise InfeasibleError("the budget cannot power a single active element")
    m1 = _budget_branch_peak(lp)
    m2 = _cap_branch_end(lp)
    m_star = max(m1, m2)
    candidates = sorted({min(max(int(math.floor(m_star)), 1), m_max),
                         min(max(int(math.ceil(m_star)), 1), m_max)})
    best_m, best = candidates[0], -1.0
    for m in candidates:
        val = los_snr(lp, m, los_equal_amplitude(lp, m))
        if val > best:
            best_m, best = m, val
    return SizingResult(float(m1), float(m2), float(m_star), best_m, float(best))


def passive_los_snr(lp: LosParams, m) -> float:
    """SNR of ``m`` co-phased unit-amplitude passive elements."""
    return lp.p_t * (m * math.sqrt(lp.rho2_sq * lp.rhog_sq)) ** 2 / lp.sigma1_sq


def passive_optimal_snr(lp: LosParams) -> float:
    """Passive SNR with the whole budget spent on elements, ``m = P_RIS / P_c``."""
    pm = lp.pm
    return lp.p_t * pm.p_ris ** 2 * lp.rho2_sq * lp.rhog_sq / (pm.p_c ** 2 * lp.sigma1_sq)
