"""Scenario runners producing tidy result rows and CSV files.

Every row carries the scenario name, the sweep value, a series label, one
metric and the number of channel draws behind it. Rayleigh metrics are
trial averages (``rate``) with their standard error (``rate_se``); LOS and
fixed-channel metrics are deterministic and use a single draw.
"""

from __future__ import annotations

import csv
import itertools
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, List, Optional

import numpy as np

from activeris.channel import ChannelSet, FadingKind, FadingModel, sample_channels
from activeris.errors import InfeasibleError, RisError
from activeris.experiments.config import Scenario, ScenarioConfig
from activeris.link import (
    ReceiveWeights,
    ReflectConfig,
    achievable_rate,
    amplification_budget,
    ris_output_power,
    received_snr,
)
from activeris.optimizer import aligned_phases, alternating_optimize, passive_optimize
from activeris.params import PowerModel, SystemParams, dbm_to_watts, linear_to_db, watts_to_dbm
from activeris.sizing import LosParams, optimal_num_elements, passive_los_snr

log = logging.getLogger(__name__)

CSV_HEADER = ("scenario", "sweep_value", "series", "metric_name", "metric_value", "trials", "seed")
BUDGET_SLACK = 1e-8


@dataclass(frozen=True)
class ResultRow:
    scenario: str
    sweep_value: float
    series: str
    metric_name: str
    metric_value: float
    trials: int
    seed: int


@dataclass(frozen=True)
class Series:
    """One curve of a scenario: surface type, fading and hardware/budget choice."""

    label: str
    passive: bool
    fading: FadingKind
    n_rx: int
    m_elems: int
    a_max: float
    p_ris: Optional[float] = None
    p_out: Optional[float] = None


def _tag(prefix: str, values, fmt: Callable[[float], str], v) -> List[str]:
    return [f"{prefix}{fmt(v)}"] if len(values) > 1 else []


def _dbm(v: float) -> str:
    return f"{float(watts_to_dbm(v)):g}dBm"


def build_series(cfg: ScenarioConfig) -> List[Series]:
    """Cross product of the configured series axes, active curves first."""
    shapes = list(itertools.product(cfg.n_rx_values, cfg.m_values))
    budgets = ([(p, None) for p in cfg.p_ris_values] if cfg.p_ris_values is not None
               else [(None, p) for p in cfg.p_out_values or (None,)])
    fadings = cfg.fading_kinds
    out = []
    for kind, (n, m), a_max, (p_ris, p_out) in itertools.product(
            fadings, shapes, cfg.a_max_values, budgets):
        parts = ["active"]
        parts += [kind.value] if len(fadings) > 1 else []
        parts += [f"N{n}-M{m}"] if len(shapes) > 1 else []
        parts += _tag("amax", cfg.a_max_values, lambda a: f"{float(linear_to_db(a * a)):g}dB",
                      a_max)
        parts += (_tag("pris", cfg.p_ris_values, _dbm, p_ris) if p_ris is not None
                  else _tag("pout", cfg.p_out_values or (), _dbm, p_out))
        out.append(Series("-".join(parts), False, kind, n, m, a_max, p_ris, p_out))
    if cfg.include_passive:
        # a passive surface has no amplification budget, so only P_RIS splits its curves
        passive_budgets = ([(p, None) for p in cfg.p_ris_values] if cfg.p_ris_values is not None
                           else [budgets[0]])
        for kind, (n, m), (p_ris, p_out) in itertools.product(fadings, shapes, passive_budgets):
            parts = ["passive"]
            parts += [kind.value] if len(fadings) > 1 else []
            parts += [f"N{n}-M{m}"] if len(shapes) > 1 else []
            parts += _tag("pris", cfg.p_ris_values or (), _dbm, p_ris) if p_ris is not None else []
            out.append(Series("-".join(parts), True, kind, n, m, 1.0, p_ris, p_out))
    return out


def _params(cfg: ScenarioConfig, s: Series, m: int, p_t: Optional[float] = None) -> SystemParams:
    return SystemParams(cfg.params.p_t if p_t is None else p_t, cfg.params.sigma1_sq,
                        cfg.params.sigma2_sq, s.n_rx, m, s.a_max, passive=s.passive)


def _check_budget(ch: ChannelSet, phi: ReflectConfig, p: SystemParams, pm: PowerModel) -> None:
    p_out = amplification_budget(pm, ch.m_elems)
    used = ris_output_power(ch, phi, p)
    if used > p_out * (1 + BUDGET_SLACK) or np.any(phi.amplitudes > p.a_max * (1 + BUDGET_SLACK)):
        raise RisError(f"budget violated: output {used:.6e} W > {p_out:.6e} W "
                       f"or amplitude above {p.a_max}")
    log.debug("budget ok: %.6e of %.6e W", used, p_out)


class _Collector:
    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.rows: List[ResultRow] = []

    def add(self, x: float, series: str, metric: str, value: float, trials: int) -> None:
        self.rows.append(ResultRow(self.cfg.scenario.value, float(x), series, metric,
                                   float(value), int(trials), self.cfg.seed))

    def add_rates(self, x: float, series: str, rates: np.ndarray) -> None:
        n = rates.size
        self.add(x, series, "rate", float(np.mean(rates)), n)
        se = float(np.std(rates, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        self.add(x, series, "rate_se", se, n)

    def infeasible(self, x: float, series: str, metrics: Iterable[str], why: str) -> None:
        log.warning("%s at sweep value %g is infeasible: %s", series, x, why)
        for metric in metrics:
            self.add(x, series, metric, math.nan, 0)


def _trial_count(cfg: ScenarioConfig, kind: FadingKind) -> int:
    return cfg.trials if kind is FadingKind.RAYLEIGH else 1


def _optimized_rates(cfg: ScenarioConfig, s: Series, p: SystemParams, pm: Optional[PowerModel],
                     geom, debug: bool) -> np.ndarray:
    fading = FadingModel(s.fading, gains=cfg.fading.gains)
    rates = np.empty(_trial_count(cfg, s.fading))
    for t in range(rates.size):
        ch = sample_channels(p, geom, fading, cfg.seed, t)
        if s.passive:
            res = passive_optimize(ch, p)
        else:
            res = alternating_optimize(ch, p, pm)
            if debug:
                _check_budget(ch, res.phi, p, pm)
        rates[t] = res.rate
    return rates


def _amplitude_sweep(cfg: ScenarioConfig, out: _Collector, debug: bool) -> None:
    p = cfg.params
    ch = sample_channels(p, cfg.geom, cfg.fading, cfg.seed, 0)
    nrm = np.linalg.norm(ch.h1)
    w = ReceiveWeights(ch.h1 / nrm) if nrm > 0 else ReceiveWeights(np.eye(p.n_rx, 1)[:, 0])
    wh = w.w.conj()
    theta = aligned_phases(complex(wh @ ch.h1), ch.h2, wh @ ch.g_mat)
    base = received_snr(ch, ReflectConfig.zeros(p.m_elems), w, p)
    for a in cfg.sweep:
        snr = received_snr(ch, ReflectConfig(np.full(p.m_elems, a), theta), w, p)
        out.add(a, "active", "snr", snr, 1)
        out.add(a, "active", "rate", achievable_rate(snr), 1)
        out.add(a, "no-ris", "snr", base, 1)
        out.add(a, "no-ris", "rate", achievable_rate(base), 1)


def _convergence(cfg: ScenarioConfig, out: _Collector, debug: bool) -> None:
    iters = sorted({int(round(v)) for v in cfg.sweep})
    if iters[0] < 0:
        raise InfeasibleError("iteration indices must be >= 0")
    k_max = iters[-1]
    for s in build_series(cfg):
        if s.passive:
            continue
        p = _params(cfg, s, s.m_elems)
        pm = cfg.power_model(s.m_elems, s.p_ris, s.p_out)
        if not amplification_budget(pm, s.m_elems) > 0:
            for k in iters:
                out.infeasible(k, s.label, ("rate", "converged_fraction"), "no amplification budget")
            continue
        fading = FadingModel(s.fading, gains=cfg.fading.gains)
        n = _trial_count(cfg, s.fading)
        rates = np.empty((n, k_max + 1))
        done_at = np.empty(n)
        for t in range(n):
            ch = sample_channels(p, cfg.geom, fading, cfg.seed, t)
            res = alternating_optimize(ch, p, pm, max_outer=max(k_max, 1))
            if debug:
                _check_budget(ch, res.phi, p, pm)
            tr = np.asarray(res.trace[:k_max + 1])
            tr = np.concatenate([tr, np.full(k_max + 1 - tr.size, tr[-1])])
            rates[t] = achievable_rate(tr)
            done_at[t] = res.outer_iterations if res.converged else math.inf
        for k in iters:
            out.add(k, s.label, "rate", float(np.mean(rates[:, k])), n)
            out.add(k, s.label, "converged_fraction", float(np.mean(done_at <= k)), n)


def _rate_vs_txpower(cfg: ScenarioConfig, out: _Collector, debug: bool) -> None:
    for s in build_series(cfg):
        pm = None if s.passive else cfg.power_model(s.m_elems, s.p_ris, s.p_out)
        for x in cfg.sweep:
            p = _params(cfg, s, s.m_elems, float(dbm_to_watts(x)))
            if pm is not None and not amplification_budget(pm, s.m_elems) > 0:
                out.infeasible(x, s.label, ("rate", "rate_se"), "no amplification budget")
                continue
            out.add_rates(x, s.label, _optimized_rates(cfg, s, p, pm, cfg.geom, debug))


def _rate_vs_elements(cfg: ScenarioConfig, out: _Collector, debug: bool) -> None:
    for s in build_series(cfg):
        for x in cfg.sweep:
            m = int(round(x))
            if m < 1:
                out.infeasible(x, s.label, ("rate", "rate_se"), "fewer than one element")
                continue
            pm = cfg.power_model(m, s.p_ris, s.p_out)
            if s.passive and m * pm.p_c > pm.p_ris:
                out.infeasible(x, s.label, ("rate", "rate_se"),
                               f"{m} passive elements exceed the budget")
                continue
            if not s.passive and not amplification_budget(pm, m) > 0:
                out.infeasible(x, s.label, ("rate", "rate_se"),
                               f"{m} active elements exhaust the budget")
                continue
            p = _params(cfg, s, m)
            out.add_rates(x, s.label, _optimized_rates(cfg, s, p, pm, cfg.geom, debug))


def _rate_vs_location(cfg: ScenarioConfig, out: _Collector, debug: bool) -> None:
    if cfg.p_ris_values is None:
        raise InfeasibleError("rate-vs-location sizes the surface from power.p_ris_dbm")
    metrics = ("rate", "rate_se", "elements")
    for s in build_series(cfg):
        for x in cfg.sweep:
            geom = cfg.geom.with_ris_x(x)
            pm = cfg.power_model(1, s.p_ris)
            lp = LosParams.from_geometry(geom, cfg.params.p_t, cfg.params.sigma1_sq,
                                         cfg.params.sigma2_sq, pm, s.a_max)
            try:
                if s.passive:
                    m = pm.max_passive_elements()
                    if m < 1:
                        raise InfeasibleError("budget cannot power one passive element")
                    los_snr_value = passive_los_snr(lp, m)
                else:
                    sized = optimal_num_elements(lp)
                    m, los_snr_value = sized.m_opt, sized.snr_at_opt
            except InfeasibleError as exc:
                out.infeasible(x, s.label, metrics, str(exc))
                continue
            if s.fading is FadingKind.LOS:
                # closed form of the sizing analysis: direct path ignored
                out.add_rates(x, s.label, np.array([achievable_rate(los_snr_value)]))
            else:
                p = _params(cfg, s, m)
                out.add_rates(x, s.label, _optimized_rates(cfg, s, p, pm, geom, debug))
            out.add(x, s.label, "elements", m, 1)


_RUNNERS = {
    Scenario.AMPLITUDE_SWEEP: _amplitude_sweep,
    Scenario.CONVERGENCE: _convergence,
    Scenario.RATE_VS_TXPOWER: _rate_vs_txpower,
    Scenario.RATE_VS_ELEMENTS: _rate_vs_elements,
    Scenario.RATE_VS_LOCATION: _rate_vs_location,
}


def run_scenario(cfg: ScenarioConfig, debug: bool = False, write: bool = True) -> List[ResultRow]:
    """Run a scenario and return its rows sorted by (sweep value, series, metric).

    The CSV at ``cfg.output_path`` is written when ``write`` is set and a path
    is configured. ``debug`` re-checks the amplitude cap and the output
    power budget of every active solution.
    """
    out = _Collector(cfg)
    _RUNNERS[cfg.scenario](cfg, out, debug)
    rows = sorted(out.rows, key=lambda r: (r.sweep_value, r.series, r.metric_name))
    if write and cfg.output_path:
        write_csv(rows, cfg.output_path)
    return rows


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def write_csv(rows: Iterable[ResultRow], path) -> None:
    """Write rows with 12 significant digits and LF line endings."""
    path = Path(path)
    if path.parent != Path("."):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow((r.scenario, _fmt(r.sweep_value), r.series, r.metric_name,
                             _fmt(r.metric_value), r.trials, r.seed))
