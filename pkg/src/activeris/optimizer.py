"""Joint reflect/receive beamforming for active and passive surfaces.

Active surfaces are optimized by alternating between

* the reflect step: phases aligned in closed form, amplitudes by successive
  convex approximation (:func:`sca_optimize_amplitudes`);
* the receive step: the MMSE combiner, optimal for any fixed reflection.

Passive surfaces (unit amplitudes, no surface noise) alternate MRC and phase
alignment instead.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from activeris.channel import ChannelSet
from activeris.convex_solver import AmplitudeProblem, solve_subproblem
from activeris.errors import ConvergenceError, DegenerateChannelError, InfeasibleError
from activeris.link import (
    ReceiveWeights,
    ReflectConfig,
    achievable_rate,
    amplification_budget,
    effective_channel,
    mmse_weights,
    passive_snr,
    received_snr,
)
from activeris.params import PowerModel, SystemParams

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
OUTER_TOL = 1e-6
SCA_TOL = 1e-8


@dataclass
class ScaState:
    """Tangent point after the last accepted step and the tau history."""

    tau_t: float
    kappa_t: float
    inner_trace: List[float] = field(default_factory=list)
    converged: bool = False


@dataclass
class OptimizationResult:
    phi: ReflectConfig
    w: ReceiveWeights
    snr: float
    rate: float
    trace: List[float]
    outer_iterations: int
    converged: bool
    sca_traces: List[List[float]] = field(default_factory=list)


def aligned_phases(h1_eff: complex, h2: np.ndarray, g_eff: np.ndarray) -> np.ndarray:
    """Phases co-phasing every cascaded path with the direct path, in [0, 2pi).

    Zero-magnitude entries contribute phase 0 (``np.angle(0) == 0``).
    """
    theta = np.angle(h1_eff) - np.angle(h2) - np.angle(g_eff)
    theta = np.mod(theta, TWO_PI)
    theta[theta >= TWO_PI] = 0.0
    return theta


def unconstrained_optimum(h1_eff: complex, h2: np.ndarray, g_eff: np.ndarray,
                          p: SystemParams) -> Tuple[ReflectConfig, float]:
    """Closed-form optimum without amplitude cap or power budget.

    Returns the coefficients and the resulting SNR
    ``p_t |h1|^2 / sigma1^2 + p_t ||h2||^2 / sigma2^2``.
    """
    h2 = np.asarray(h2, dtype=complex)
    g_eff = np.asarray(g_eff, dtype=complex)
    if abs(h1_eff) == 0 or np.any(np.abs(g_eff) == 0):
        raise DegenerateChannelError("closed form needs a nonzero direct path and backward gains")
    amps = p.sigma1_sq * np.abs(h2) / (p.sigma2_sq * abs(h1_eff) * np.abs(g_eff))
    gamma = p.p_t * abs(h1_eff) ** 2 / p.sigma1_sq + p.p_t * np.sum(np.abs(h2) ** 2) / p.sigma2_sq
    return ReflectConfig(amps, aligned_phases(h1_eff, h2, g_eff)), float(gamma)


def amplitude_problem(h1_eff: complex, h2: np.ndarray, g_eff: np.ndarray, p: SystemParams,
                      p_out: float) -> AmplitudeProblem:
    """Amplitude-only problem seen through a fixed combiner."""
    abs_h2 = np.abs(h2)
    abs_g = np.abs(g_eff)
    return AmplitudeProblem(
        b_bar=abs_h2 * abs_g,
        h1_abs=abs(h1_eff),
        q_diag=abs_g ** 2,
        f_diag=p.p_t * abs_h2 ** 2 + p.sigma2_sq,
        p_out=p_out,
        a_max=p.a_max,
        p_t=p.p_t,
        sigma1_sq=p.sigma1_sq,
        sigma2_sq=p.sigma2_sq,
    )


def _project(problem: AmplitudeProblem, a: np.ndarray) -> np.ndarray:
    a = np.clip(a, 0.0, problem.a_max)
    used = problem.output_power(a)
    if used > problem.p_out:
        a = a * math.sqrt(problem.p_out / used)
    return a


def _feasible_step(problem: AmplitudeProblem, a: np.ndarray, d: np.ndarray) -> float:
    """Largest ``t`` with ``a + t d`` inside the box and the power ellipsoid."""
    t_max = np.inf
    up, down = d > 0, d < 0
    if np.any(up):
        t_max = min(t_max, float(np.min((problem.a_max - a[up]) / d[up])))
    if np.any(down):
        t_max = min(t_max, float(np.min(-a[down] / d[down])))
    # sum f (a + t d)^2 <= P_out  ->  qa t^2 + qb t + qc <= 0
    qa = float(np.dot(problem.f_diag, d * d))
    if qa > 0:
        qb = 2.0 * float(np.dot(problem.f_diag, a * d))
        qc = problem.output_power(a) - problem.p_out
        disc = max(qb * qb - 4.0 * qa * qc, 0.0)
        t_max = min(t_max, (-qb + math.sqrt(disc)) / (2.0 * qa))
    return t_max


def _line_max(problem: AmplitudeProblem, origin: np.ndarray, d: np.ndarray, t_min: float,
              best_a: np.ndarray, best: float) -> Tuple[np.ndarray, float]:
    # Along origin + t d (t_min < t <= t_max) the SNR is (A + B t)^2 / (C + D t + E t^2);
    # its stationary point solves (2BC - AD) + (BD - 2AE) t = 0.
    t_max = _feasible_step(problem, origin, d)
    if not t_max > t_min:
        return best_a, best
    sq = math.sqrt(problem.p_t)
    A = sq * (float(np.dot(problem.b_bar, origin)) + problem.h1_abs)
    B = sq * float(np.dot(problem.b_bar, d))
    C = problem.noise(origin)
    D = 2.0 * problem.sigma2_sq * float(np.dot(problem.q_diag, origin * d))
    E = problem.sigma2_sq * float(np.dot(problem.q_diag, d * d))
    steps = [t_max] if math.isfinite(t_max) else []
    den = 2.0 * A * E - B * D
    if den != 0:
        t_star = (2.0 * B * C - A * D) / den
        if t_min < t_star < t_max:
            steps.append(t_star)
    for t in steps:
        cand = _project(problem, origin + t * d)
        val = problem.snr(cand)
        if val > best:
            best_a, best = cand, val
    return best_a, best


def _extrapolate(problem: AmplitudeProblem, a_prev: np.ndarray, a_new: np.ndarray,
                 snr_new: float) -> Tuple[np.ndarray, float]:
    """Exact line searches past the SCA point: along the step and along its ray."""
    best_a, best = _line_max(problem, a_prev, a_new - a_prev, 1.0, a_new, snr_new)
    return _line_max(problem, np.zeros_like(a_new), a_new, 0.0, best_a, best)


def sca_optimize_amplitudes(problem: AmplitudeProblem, init: Optional[np.ndarray] = None,
                            tol: float = SCA_TOL, max_iters: int = 100,
                            accelerate: bool = True) -> Tuple[np.ndarray, ScaState]:
    """Successive convex approximation of the amplitude problem.

    Starts from ``init`` (default: the cap, shrunk into the budget) and
    re-linearizes at each subproblem solution until tau moves by at most
    ``tol * (1 + tau)``. The tau sequence is nondecreasing; a step that
    fails to improve ends the loop.

    Near an interior optimum the plain iteration contracts only linearly,
    with a ratio close to one when the cascaded path dominates the direct
    path. With ``accelerate`` each step is followed by exact line searches
    along the step and along the ray through the new point, both kept inside
    the feasible set; the next tangent point is placed at the resulting true
    SNR.
    With ``accelerate=False`` tau is the subproblem optimum itself.
    """
    if not problem.p_out > 0:
        raise InfeasibleError(f"amplification budget must be > 0, got {problem.p_out!r}")
    if init is None:
        a = problem.feasible_start()
    else:
        a = _project(problem, np.asarray(init, dtype=float))

    kappa = problem.noise(a)
    tau = problem.snr(a)
    state = ScaState(tau, kappa, [tau])
    for _ in range(max_iters):
        sol = solve_subproblem(problem.linearized(tau, kappa), tol=tol)
        if accelerate:
            a_new, new_tau = _extrapolate(problem, a, sol.a_bar, problem.snr(sol.a_bar))
        else:
            a_new, new_tau = sol.a_bar, sol.tau
        if not new_tau > tau:
            state.converged = True
            break
        done = new_tau - tau <= tol * (1.0 + tau)
        a, tau, kappa = a_new, new_tau, problem.noise(a_new)
        state.tau_t, state.kappa_t = tau, kappa
        state.inner_trace.append(tau)
        if done:
            state.converged = True
            break
    else:
        raise ConvergenceError(f"SCA did not converge in {max_iters} iterations")
    return a, state


def _start_weights(ch: ChannelSet) -> ReceiveWeights:
    nrm = np.linalg.norm(ch.h1)
    if nrm > 0:
        return ReceiveWeights(ch.h1 / nrm)
    e = np.zeros(ch.n_rx, dtype=complex)
    e[0] = 1.0
    return ReceiveWeights(e)


def _reflect_step(ch: ChannelSet, w: ReceiveWeights, p: SystemParams, p_out: float,
                  init: Optional[np.ndarray], sca_tol: float, sca_max_iters: int):
    wh = w.w.conj()
    h1_eff = complex(wh @ ch.h1)
    g_eff = wh @ ch.g_mat
    problem = amplitude_problem(h1_eff, ch.h2, g_eff, p, p_out)
    amps, state = sca_optimize_amplitudes(problem, init, tol=sca_tol, max_iters=sca_max_iters)
    return ReflectConfig(amps, aligned_phases(h1_eff, ch.h2, g_eff)), state


def _block_pass(ch: ChannelSet, phi: ReflectConfig, w: ReceiveWeights, p: SystemParams,
                p_out: float, sca_tol: float, sca_max_iters: int):
    """One reflect step then one MMSE step; neither may lower the SNR."""
    cand, state = _reflect_step(ch, w, p, p_out, phi.amplitudes, sca_tol, sca_max_iters)
    # guards keep the trace monotone against last-ulp rounding
    if received_snr(ch, cand, w, p) >= received_snr(ch, phi, w, p):
        phi = cand
    w_new = mmse_weights(ch, phi, p)
    if received_snr(ch, phi, w_new, p) >= received_snr(ch, phi, w, p):
        w = w_new
    return phi, w, received_snr(ch, phi, w, p), state


def alternating_optimize(ch: ChannelSet, p: SystemParams, pm: PowerModel, tol: float = OUTER_TOL,
                         max_outer: int = 50, sca_tol: float = SCA_TOL,
                         sca_max_iters: int = 100, accelerate: bool = True) -> OptimizationResult:
    """Maximize the active-surface SNR by alternating reflect and receive design.

    ``trace[0]`` is the SNR of the starting point (cap amplitudes shrunk into
    the budget, phases aligned to the direct-path MRC combiner); each later
    entry follows one reflect step and one MMSE step. Stops once the SNR
    changes by at most ``tol * (1 + SNR)``.

    When the amplitudes sit at the cap the plain alternation behaves like a
    power iteration and can crawl for many passes. With ``accelerate`` each
    pass also tries a second pass started from the combiner pushed further
    along its last change; the trial is kept only if it ends at a higher
    SNR, and the push length adapts to its success.
    """
    p_out = amplification_budget(pm, ch.m_elems)
    if not p_out > 0:
        raise InfeasibleError(
            f"{ch.m_elems} elements exhaust the surface budget (P_out = {p_out:.3e} W)")

    w = _start_weights(ch)
    wh = w.w.conj()
    h1_eff, g_eff = complex(wh @ ch.h1), wh @ ch.g_mat
    start = amplitude_problem(h1_eff, ch.h2, g_eff, p, p_out).feasible_start()
    phi = ReflectConfig(start, aligned_phases(h1_eff, ch.h2, g_eff))
    snr = received_snr(ch, phi, w, p)
    trace = [snr]
    sca_traces = []
    converged = False
    push = 1.0

    for _ in range(max_outer):
        w_old = w
        phi, w, new_snr, state = _block_pass(ch, phi, w, p, p_out, sca_tol, sca_max_iters)
        sca_traces.append(state.inner_trace)
        if accelerate and ch.n_rx > 1:
            # w is defined up to a global phase; compare in a common frame
            step = w.w - w_old.w * np.exp(1j * np.angle(np.vdot(w_old.w, w.w)))
            if np.linalg.norm(step) > 0:
                w_try = ReceiveWeights.normalized(w.w + push * step)
                phi_e, w_e, snr_e, _ = _block_pass(ch, phi, w_try, p, p_out, sca_tol,
                                                   sca_max_iters)
                if snr_e > new_snr:
                    phi, w, new_snr = phi_e, w_e, snr_e
                    push *= 2.0
                else:
                    push = max(1.0, push / 4.0)
        trace.append(new_snr)
        if abs(new_snr - snr) <= tol * (1.0 + snr):
            snr = new_snr
            converged = True
            break
        snr = new_snr
    else:
        log.debug("alternating optimization stopped at max_outer=%d", max_outer)

    return OptimizationResult(phi=phi, w=w, snr=snr, rate=float(achievable_rate(snr)),
                              trace=trace, outer_iterations=len(trace) - 1,
                              converged=converged, sca_traces=sca_traces)


def passive_optimize(ch: ChannelSet, p: SystemParams, tol: float = OUTER_TOL,
                     max_outer: int = 100) -> OptimizationResult:
    """Phase-only design of a passive surface (unit amplitudes, surface noise ignored).

    Alternates MRC combining and phase alignment; the channel power gain
    ``||h1 + G Phi h2||^2`` never decreases.
    """
    w = _start_weights(ch)
    phi = None
    trace: List[float] = []
    gain = -1.0
    converged = False
    for _ in range(max_outer):
        wh = w.w.conj()
        phi = ReflectConfig.unit(aligned_phases(complex(wh @ ch.h1), ch.h2, wh @ ch.g_mat))
        h = effective_channel(ch, phi)
        new_gain = float(np.vdot(h, h).real)
        if new_gain > 0:
            w = ReceiveWeights.normalized(h)
        trace.append(p.p_t * new_gain / p.sigma1_sq)
        if abs(new_gain - gain) <= tol * new_gain or new_gain == 0:
            converged = True
            break
        gain = new_gain
    snr = passive_snr(ch, phi, w, p)
    return OptimizationResult(phi=phi, w=w, snr=snr, rate=float(achievable_rate(snr)),
                              trace=trace, outer_iterations=len(trace), converged=converged)
