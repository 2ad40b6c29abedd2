import math
import sys

import numpy as np
import pytest

from activeris.channel import ChannelSet
from activeris.params import SystemParams


def random_channels(rng, n, m, scale=1.0):
    def cn(*shape):
        return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)
    return ChannelSet(cn(n), cn(m), cn(n, m))


def random_params(rng, n, m, a_max=None):
    return SystemParams(
        p_t=float(10 ** rng.uniform(-1, 1)),
        sigma1_sq=float(10 ** rng.uniform(-1, 0.5)),
        sigma2_sq=float(10 ** rng.uniform(-1, 0.5)),
        n_rx=n, m_elems=m,
        a_max=float(a_max if a_max is not None else 10 ** rng.uniform(0, 1)),
    )


def random_unit(rng, n):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def fig3():
    """Single-element link with power gains 0.2 / 0.5 / 0.8 and p_t / sigma^2 = 10."""
    ch = ChannelSet([math.sqrt(0.2)], [math.sqrt(0.5)], [[math.sqrt(0.8)]])
    p = SystemParams(p_t=10.0, sigma1_sq=1.0, sigma2_sq=1.0, n_rx=1, m_elems=1, a_max=1e6)
    return ch, p


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
