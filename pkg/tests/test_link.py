import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from activeris.channel import ChannelSet
from activeris.errors import DegenerateChannelError, ValidationError
from activeris.link import (
    ReceiveWeights,
    ReflectConfig,
    achievable_rate,
    amplification_budget,
    effective_channel,
    mmse_snr,
    mmse_weights,
    mrc_weights,
    noise_covariance,
    passive_snr,
    received_snr,
    ris_output_power,
    total_power_consumed,
)
from activeris.params import PowerModel, SystemParams, dbm_to_watts
from conftest import random_channels, random_params, random_unit


def random_phi(rng, m, scale=3.0):
    return ReflectConfig(rng.uniform(0, scale, m), rng.uniform(0, 2 * np.pi, m))


def test_reflect_config_wraps_and_validates():
    phi = ReflectConfig([1.0, 2.0], [-0.5, 7.0])
    assert np.all((phi.phases >= 0) & (phi.phases < 2 * np.pi))
    np.testing.assert_allclose(phi.coefficients, [np.exp(-0.5j), 2 * np.exp(7j)])
    with pytest.raises(ValidationError):
        ReflectConfig([-1.0], [0.0])
    with pytest.raises(ValidationError):
        ReflectConfig([1.0, 1.0], [0.0])
    back = ReflectConfig.from_coefficients(phi.coefficients)
    np.testing.assert_allclose(back.coefficients, phi.coefficients)


def test_receive_weights_must_be_unit():
    ReceiveWeights([0.6, 0.8j])
    with pytest.raises(ValidationError):
        ReceiveWeights([1.0, 1.0])
    with pytest.raises(DegenerateChannelError):
        ReceiveWeights.normalized([0.0, 0.0])


def test_effective_channel_cases(rng):
    ch = random_channels(rng, 3, 4)
    np.testing.assert_array_equal(effective_channel(ch, ReflectConfig.zeros(4)), ch.h1)
    phi = random_phi(rng, 4)
    # explicit summation
    expected = np.array([ch.h1[n] + sum(ch.g_mat[n, m] * phi.coefficients[m] * ch.h2[m]
                                        for m in range(4)) for n in range(3)])
    np.testing.assert_allclose(effective_channel(ch, phi), expected, rtol=0, atol=1e-12)
    with pytest.raises(ValidationError):
        effective_channel(ch, ReflectConfig.zeros(3))


def test_effective_channel_scalar():
    ch = ChannelSet([0.3], [1 + 1j], [[2.0]])
    phi = ReflectConfig([1.5], [0.4])
    assert effective_channel(ch, phi)[0] == pytest.approx(0.3 + 2.0 * 1.5 * np.exp(0.4j) * (1 + 1j))


def test_no_ris_matched_filter(rng):
    ch = random_channels(rng, 3, 2)
    p = random_params(rng, 3, 2)
    w = ReceiveWeights.normalized(ch.h1)
    snr = received_snr(ch, ReflectConfig.zeros(2), w, p)
    assert snr == pytest.approx(p.p_t * np.linalg.norm(ch.h1) ** 2 / p.sigma1_sq, rel=1e-12)


def test_single_element_closed_form_snr(fig3):
    ch, p = fig3
    a = math.sqrt(0.5) / (math.sqrt(0.2) * math.sqrt(0.8))
    snr = received_snr(ch, ReflectConfig([a], [0.0]), ReceiveWeights([1.0]), p)
    assert snr == pytest.approx(7.0, rel=1e-12)
    big = received_snr(ch, ReflectConfig([1e6], [0.0]), ReceiveWeights([1.0]), p)
    assert big == pytest.approx(5.0, abs=1e-3)


def test_passive_snr_ignores_surface_noise(fig3):
    ch, p = fig3
    phi = ReflectConfig([1.0], [0.0])
    w = ReceiveWeights([1.0])
    h = math.sqrt(0.2) + math.sqrt(0.5 * 0.8)
    assert passive_snr(ch, phi, w, p) == pytest.approx(10 * h ** 2)
    assert received_snr(ch, phi, w, p) < passive_snr(ch, phi, w, p)


@pytest.mark.parametrize("gamma, rate", [(0.0, 0.0), (1.0, 1.0), (7.0, 3.0)])
def test_rate(gamma, rate):
    assert achievable_rate(gamma) == pytest.approx(rate)


def test_rate_rejects_negative():
    with pytest.raises(ValidationError):
        achievable_rate(-0.1)


def test_mmse_reduces_to_mrc_without_surface(rng):
    ch = random_channels(rng, 4, 3)
    p = random_params(rng, 4, 3)
    w = mmse_weights(ch, ReflectConfig.zeros(3), p)
    target = ch.h1 / np.linalg.norm(ch.h1)
    assert abs(np.vdot(w.w, target)) == pytest.approx(1.0, abs=1e-9)


def test_mmse_single_antenna_unit_modulus(rng):
    ch = random_channels(rng, 1, 3)
    w = mmse_weights(ch, random_phi(rng, 3), random_params(rng, 1, 3))
    assert abs(w.w[0]) == pytest.approx(1.0)


def test_mmse_is_optimal_and_matches_quadratic_form(rng):
    for _ in range(50):
        n, m = int(rng.integers(1, 6)), int(rng.integers(1, 9))
        ch = random_channels(rng, n, m)
        p = random_params(rng, n, m)
        phi = random_phi(rng, m)
        best = received_snr(ch, phi, mmse_weights(ch, phi, p), p)
        assert best == pytest.approx(mmse_snr(ch, phi, p), rel=1e-8)
        for _ in range(1000 // 50):
            w = ReceiveWeights(random_unit(rng, n))
            assert received_snr(ch, phi, w, p) <= best * (1 + 1e-12)


def test_mmse_matches_generalized_eigenvalue(rng):
    for _ in range(30):
        n, m = int(rng.integers(1, 9)), int(rng.integers(1, 17))
        ch = random_channels(rng, n, m)
        p = random_params(rng, n, m)
        phi = random_phi(rng, m)
        h = effective_channel(ch, phi)
        lam = scipy.linalg.eigh(p.p_t * np.outer(h, h.conj()), noise_covariance(ch, phi, p),
                                eigvals_only=True)[-1]
        snr = received_snr(ch, phi, mmse_weights(ch, phi, p), p)
        assert snr == pytest.approx(lam, rel=1e-8)


def test_mmse_agrees_with_signal_plus_noise_inverse(rng):
    # inverse of (h h^H + C / p_t) gives the same direction as C^{-1} h
    for _ in range(20):
        n, m = int(rng.integers(2, 7)), int(rng.integers(1, 9))
        ch = random_channels(rng, n, m)
        p = random_params(rng, n, m)
        phi = random_phi(rng, m)
        h = effective_channel(ch, phi)
        full = np.outer(h, h.conj()) + noise_covariance(ch, phi, p) / p.p_t
        v = np.linalg.solve(full, h)
        w_full = ReceiveWeights.normalized(v)
        assert received_snr(ch, phi, w_full, p) == pytest.approx(
            received_snr(ch, phi, mmse_weights(ch, phi, p), p), rel=1e-9)


def test_mrc_maximizes_passive_snr(rng):
    for _ in range(20):
        n, m = int(rng.integers(1, 6)), int(rng.integers(1, 6))
        ch = random_channels(rng, n, m)
        p = random_params(rng, n, m)
        phi = random_phi(rng, m)
        w = mrc_weights(ch, phi)
        assert np.linalg.norm(w.w) == pytest.approx(1.0)
        best = passive_snr(ch, phi, w, p)
        for _ in range(50):
            assert passive_snr(ch, phi, ReceiveWeights(random_unit(rng, n)), p) <= best * (1 + 1e-12)


def test_mrc_degenerate():
    ch = ChannelSet([0.0], [1.0], [[0.0]])
    with pytest.raises(DegenerateChannelError):
        mrc_weights(ch, ReflectConfig([1.0], [0.0]))


def test_output_power(rng):
    ch = random_channels(rng, 2, 5)
    p = random_params(rng, 2, 5)
    assert ris_output_power(ch, ReflectConfig.zeros(5), p) == 0.0
    ones = ReflectConfig(np.ones(5), np.zeros(5))
    assert ris_output_power(ch, ones, p) == pytest.approx(
        p.p_t * np.linalg.norm(ch.h2) ** 2 + 5 * p.sigma2_sq)
    phi = random_phi(rng, 5)
    per_element = sum(phi.amplitudes[m] ** 2 * (abs(ch.h2[m]) ** 2 * p.p_t + p.sigma2_sq)
                      for m in range(5))
    assert ris_output_power(ch, phi, p) == pytest.approx(per_element, rel=1e-12)
    rotated = ReflectConfig(phi.amplitudes, rng.uniform(0, 2 * np.pi, 5))
    assert ris_output_power(ch, rotated, p) == ris_output_power(ch, phi, p)


def test_amplification_budget():
    pm = PowerModel(dbm_to_watts(10), dbm_to_watts(-10), dbm_to_watts(-5), 0.8)
    assert amplification_budget(pm, 0) == pytest.approx(0.8 * 0.01)
    # 0.8 * (10 - 20 * 0.41623) mW
    assert amplification_budget(pm, 20) == pytest.approx(1.340e-3, rel=1e-3)
    assert amplification_budget(pm, 30) < 0
    with pytest.raises(ValidationError):
        amplification_budget(pm, -1)


def test_total_power(rng):
    ch = random_channels(rng, 1, 100)
    passive = SystemParams(1.0, 1.0, 1.0, 1, 100, 1.0, passive=True)
    pm = PowerModel(p_ris=0.02, p_c=1e-4, p_dc=3e-4, efficiency=0.8)
    assert total_power_consumed(ch, ReflectConfig.unit(np.zeros(100)), passive, pm) == \
        pytest.approx(0.01)
    active = SystemParams(1.0, 1.0, 1.0, 1, 100, 10.0)
    assert total_power_consumed(ch, ReflectConfig.zeros(100), active, pm) == pytest.approx(0.04)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), m=st.integers(1, 8))
def test_budget_identity(seed, m):
    # any phi meeting the output budget keeps total consumption within P_RIS
    rng = np.random.default_rng(seed)
    ch = random_channels(rng, 2, m, scale=1e-3)
    p = SystemParams(1e-3, 1e-6, 1e-6, 2, m, 100.0)
    pm = PowerModel(p_ris=0.05, p_c=1e-4, p_dc=3e-4, efficiency=0.8)
    phi = random_phi(rng, m, scale=50.0)
    budget = amplification_budget(pm, m)
    used = ris_output_power(ch, phi, p)
    if used > budget:
        phi = ReflectConfig(phi.amplitudes * math.sqrt(budget / used), phi.phases)
    assert total_power_consumed(ch, phi, p, pm) <= pm.p_ris * (1 + 1e-12)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_snr_denominator_floor(seed):
    rng = np.random.default_rng(seed)
    ch = random_channels(rng, 3, 4)
    p = random_params(rng, 3, 4)
    phi = random_phi(rng, 4)
    w = ReceiveWeights(random_unit(rng, 3))
    h = effective_channel(ch, phi)
    snr = received_snr(ch, phi, w, p)
    assert math.isfinite(snr)
    assert snr <= p.p_t * abs(np.vdot(w.w, h)) ** 2 / p.sigma1_sq * (1 + 1e-12)
