"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (the summary lines are printed at
the end of the session) or add ``-s`` to see them as each check finishes.
"""

import math
import shutil
import subprocess
import sys
import time

import numpy as np
from scipy.linalg import eigh

from activeris.channel import FadingModel, sample_channels
from activeris.circuit import Impedance, load_for_coefficient, reflection_coefficient
from activeris.convex_solver import solve_subproblem
from activeris.experiments import default_paper_config, run_scenario
from activeris.experiments.scenarios import build_series
from activeris.link import (
    ReceiveWeights,
    ReflectConfig,
    amplification_budget,
    effective_channel,
    mmse_snr,
    noise_covariance,
    received_snr,
)
from activeris.optimizer import alternating_optimize
from activeris.params import SystemParams
from activeris.sizing import LosParams, los_equal_amplitude, los_snr, optimal_num_elements
from conftest import random_channels, random_params, random_unit
from test_convex_solver import grid_m1, grid_m2, random_problem, tangent_at_start
from test_optimizer import grid_snr_single, random_active_setup

RESULTS = []


def report(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d} {title}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def series_values(rows, series, metric="rate"):
    sel = [r for r in rows if r.series == series and r.metric_name == metric]
    return np.array([r.sweep_value for r in sel]), np.array([r.metric_value for r in sel])


def test_closed_form_amplitude_sweep():
    t0 = time.perf_counter()
    rows = run_scenario(default_paper_config("fig3"), write=False)
    elapsed = time.perf_counter() - t0
    a, snr = series_values(rows, "active", "snr")
    _, base = series_values(rows, "no-ris", "snr")
    k = int(np.argmax(snr))
    within_step = a[max(k - 1, 0)] <= 1.76777 <= a[min(k + 1, a.size - 1)]
    tail = snr[np.argmin(np.abs(a - 1e3))]
    ok = (a.size == 10 ** 4 and abs(snr[k] - 7.0) <= 1e-4 * 7.0 and within_step
          and abs(tail - 5.0) <= 0.02 * 5.0 and np.all(np.abs(base - 2.0) <= 1e-12)
          and elapsed < 1.0)
    report(1, "amplitude sweep", ok,
           f"peak {snr[k]:.7f} at a={a[k]:.5f}, SNR(1e3)={tail:.5f}, no-RIS={base[0]:.12g}, "
           f"{elapsed:.2f}s")


def test_subproblem_against_grid():
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    worst = 0.0
    for m, count, grid in ((1, 100, grid_m1), (2, 50, grid_m2)):
        for _ in range(count):
            sp = tangent_at_start(random_problem(rng, m))
            tau = solve_subproblem(sp).tau
            ref = grid(sp)
            worst = max(worst, abs(tau - ref) / abs(ref))
    elapsed = time.perf_counter() - t0
    report(2, "subproblem vs grid", worst <= 1e-3 and elapsed < 30,
           f"max rel gap {worst:.2e} over 150 instances, {elapsed:.1f}s")


def test_alternating_against_grid():
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        ch, p, pm = random_active_setup(rng, 1, 1)
        snr = alternating_optimize(ch, p, pm).snr
        ref = grid_snr_single(ch, p, amplification_budget(pm, 1))
        worst = max(worst, abs(snr - ref) / ref)
    elapsed = time.perf_counter() - t0
    report(3, "alternating optimization vs (a, theta) grid", worst <= 1e-3 and elapsed < 30,
           f"max rel gap {worst:.2e} over 50 instances, {elapsed:.1f}s")


def worst_drop(trace):
    t = np.asarray(trace, dtype=float)
    if t.size < 2:
        return 0.0
    return float(np.max((t[:-1] - t[1:]) / np.maximum(1.0, np.abs(t[:-1]))))


def test_monotone_traces_and_fig4_convergence():
    rng = np.random.default_rng(4)
    drop = 0.0
    for _ in range(200):
        n, m = int(rng.integers(1, 5)), int(rng.integers(1, 17))
        res = alternating_optimize(*random_active_setup(rng, n, m))
        drop = max([drop, worst_drop(res.trace)] + [worst_drop(s) for s in res.sca_traces])

    cfg = default_paper_config("fig4")
    counts, unconverged = [], 0
    for s in build_series(cfg):
        p = SystemParams(cfg.params.p_t, cfg.params.sigma1_sq, cfg.params.sigma2_sq,
                         s.n_rx, s.m_elems, s.a_max)
        pm = cfg.power_model(s.m_elems, s.p_ris, s.p_out)
        for t in range(100):
            ch = sample_channels(p, cfg.geom, FadingModel(s.fading), cfg.seed, t)
            res = alternating_optimize(ch, p, pm, max_outer=50)
            counts.append(res.outer_iterations)
            unconverged += not res.converged
    counts = np.array(counts)
    ok = drop <= 1e-9 and unconverged == 0 and counts.max() <= 50
    report(4, "monotonicity and convergence", ok,
           f"worst relative drop {drop:.1e} over 200 instances; fig4 outer iterations "
           f"median {np.median(counts):g}, max {counts.max()}, "
           f"{unconverged} of {counts.size} unconverged")


def test_sizing_optimum():
    t0 = time.perf_counter()
    cfg = default_paper_config("fig6")
    found, sweep_ok, parts = set(), True, []
    for a_max in cfg.a_max_values:
        lp = LosParams.from_geometry(cfg.geom, cfg.params.p_t, cfg.params.sigma1_sq,
                                     cfg.params.sigma2_sq, cfg.power_model(1, cfg.p_ris_values[0]),
                                     a_max)
        res = optimal_num_elements(lp)
        ms = np.arange(1, lp.pm.max_active_elements() + 1)
        brute = int(ms[np.argmax([los_snr(lp, m, los_equal_amplitude(lp, m)) for m in ms])])
        sweep_ok &= abs(res.m_opt - brute) <= 1
        found.add(res.m_opt)
        parts.append(f"a_max^2={20 * math.log10(a_max):g}dB -> {res.m_opt} (sweep {brute})")
    elapsed = time.perf_counter() - t0
    report(5, "optimal element count", sweep_ok and found == {13, 20} and elapsed < 1,
           ", ".join(parts) + f", {elapsed:.3f}s")


def active_vs_passive(rows, cfg):
    worst, compared, skipped = math.inf, 0, 0
    series = build_series(cfg)
    for s in series:
        if s.passive:
            continue
        ref = next(q for q in series if q.passive and q.fading == s.fading
                   and q.p_ris == (s.p_ris if cfg.p_ris_values is not None else q.p_ris))
        x, act = series_values(rows, s.label)
        _, pas = series_values(rows, ref.label)
        both = np.isfinite(act) & np.isfinite(pas)
        skipped += int(np.sum(~both))
        compared += int(np.sum(both))
        worst = min(worst, float(np.min(act[both] - pas[both])))
    return worst, compared, skipped


def test_active_beats_passive():
    t0 = time.perf_counter()
    lines, ok = [], True
    for fig in ("fig5", "fig6"):
        cfg = default_paper_config(fig).with_overrides(trials=200)
        rows = run_scenario(cfg, write=False)
        worst, compared, skipped = active_vs_passive(rows, cfg)
        ok &= worst >= 0
        lines.append(f"{fig}: min(active - passive) {worst:.3f} bit over {compared} points"
                     + (f" ({skipped} infeasible active points skipped)" if skipped else ""))
    elapsed = time.perf_counter() - t0
    report(6, "active vs passive", ok and elapsed < 300, "; ".join(lines) + f", {elapsed:.0f}s")


def test_location_shape():
    rows = run_scenario(default_paper_config("fig7"), write=False)
    ok, parts = True, []
    for label in ("passive-pris10dBm", "passive-pris20dBm"):
        x, rate = series_values(rows, label)
        x_min = x[int(np.argmin(rate))]
        ok &= abs(x_min - 100.0) <= 20.0
        parts.append(f"{label} minimum at x={x_min:g} m")
    for label in ("active-pris10dBm", "active-pris20dBm"):
        x, rate = series_values(rows, label)
        r100, r180 = rate[x == 100.0][0], rate[x == 180.0][0]
        ok &= r180 > r100
        parts.append(f"{label} {r100:.2f} -> {r180:.2f} bit")
    report(7, "location sweep shape", ok, "; ".join(parts))


def test_mmse_optimality():
    rng = np.random.default_rng(8)
    worst, beaten = 0.0, 0
    for _ in range(100):
        n, m = int(rng.integers(1, 9)), int(rng.integers(1, 17))
        ch, p = random_channels(rng, n, m), random_params(rng, n, m)
        phi = ReflectConfig(rng.uniform(0, 3, m), rng.uniform(0, 2 * np.pi, m))
        snr = mmse_snr(ch, phi, p)
        h = effective_channel(ch, phi)
        oracle = eigh(p.p_t * np.outer(h, h.conj()), noise_covariance(ch, phi, p),
                      eigvals_only=True)[-1]
        worst = max(worst, abs(snr - oracle) / oracle)
        beaten += sum(received_snr(ch, phi, ReceiveWeights(random_unit(rng, n)), p)
                      > snr * (1 + 1e-12) for _ in range(1000))
    report(8, "MMSE optimality", worst <= 1e-8 and beaten == 0,
           f"max rel gap to generalized eigenvalue {worst:.1e}, "
           f"{beaten} of 100000 random combiners better")


def test_circuit_roundtrip():
    rng = np.random.default_rng(9)
    err = 0.0
    for _ in range(100):
        gamma = rng.uniform(0, 10) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        za = complex(rng.uniform(1, 100), rng.uniform(-50, 50))
        err = max(err, abs(reflection_coefficient(load_for_coefficient(gamma, za), za) - gamma))
    passive_max, active_min = 0.0, math.inf
    for _ in range(1000):
        za = complex(rng.uniform(1, 100), rng.uniform(-50, 50))
        r, x = rng.uniform(0.1, 500), rng.uniform(-500, 500)
        passive_max = max(passive_max, abs(reflection_coefficient(complex(r, x), za)))
        active_min = min(active_min, abs(reflection_coefficient(Impedance.active(r, x), za)))
    report(9, "circuit roundtrip", err <= 1e-10 and passive_max <= 1 and active_min > 1,
           f"roundtrip error {err:.1e}, passive max |G| {passive_max:.4f}, "
           f"active min |G| {active_min:.4f}")


def test_cli_determinism(tmp_path):
    exe = shutil.which("ris-sim")
    cmd = [exe] if exe else [sys.executable, "-m", "activeris.experiments.cli"]
    outputs = []
    for name in ("first.csv", "second.csv"):
        path = tmp_path / name
        proc = subprocess.run(cmd + ["paper-fig", "fig6", "--trials", "20", "--seed", "99",
                                     "--out", str(path)], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outputs.append(path.read_bytes())
    report(10, "CLI determinism", outputs[0] == outputs[1],
           f"two runs of paper-fig fig6 (20 trials), {len(outputs[0])} bytes each, "
           f"{'identical' if outputs[0] == outputs[1] else 'different'}")
