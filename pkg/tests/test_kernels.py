"""Kernel backends: value oracles and compiled/pure bit-parity."""

import math

import numpy as np
import pytest

from mlvsim import _kernels_py as pure
from mlvsim import kernels

try:
    from mlvsim import _kernels as compiled
except ImportError:  # pragma: no cover - build without the extension
    compiled = None

FUNCS = ("geometric_attr", "percent_step_attr", "reward_value", "q_step",
         "exp_interval")


def test_backend_label():
    assert kernels.BACKEND in ("compiled", "python")
    assert pure.BACKEND == "python"


def test_geometric_endpoints():
    assert pure.geometric_attr(0.7, 1.0, 0.0) == 0.7
    assert pure.geometric_attr(0.7, 1.0, 1.0) == pytest.approx(1.0, rel=1e-12)
    assert pure.geometric_attr(1.0, 0.7, 1.0) == pytest.approx(0.7, rel=1e-12)
    # Flat curve shortcut is exact.
    assert pure.geometric_attr(0.5, 0.5, 0.3) == 0.5


def test_geometric_midpoint_oracle():
    # Geometric mean at frac=0.5, computed independently.
    assert pure.geometric_attr(0.75, 1.0, 0.5) == pytest.approx(
        math.sqrt(0.75 * 1.0), rel=1e-12)


def test_geometric_monotone():
    fracs = np.linspace(0.0, 1.0, 101)
    rising = [pure.geometric_attr(0.7, 1.0, f) for f in fracs]
    falling = [pure.geometric_attr(1.0, 0.7, f) for f in fracs]
    assert all(a < b for a, b in zip(rising, rising[1:]))
    assert all(a > b for a, b in zip(falling, falling[1:]))


def test_percent_step_values_and_clamp():
    # One major at +2%: 0.7 * 1.02.
    assert pure.percent_step_attr(0.7, 1.0, 1, 0, 0.02, 0.001) == \
        pytest.approx(0.7 * 1.02, rel=1e-12)
    # Two minors at +0.1%.
    assert pure.percent_step_attr(0.7, 1.0, 0, 2, 0.02, 0.001) == \
        pytest.approx(0.7 * 1.001 ** 2, rel=1e-12)
    # Far past the end: clamped at the endpoint, not beyond.
    assert pure.percent_step_attr(0.7, 1.0, 100, 0, 0.02, 0.001) == 1.0
    # Decreasing attribute clamps at the lower endpoint.
    assert pure.percent_step_attr(1.0, 0.7, 100, 0, -0.02, -0.001) == 0.7


def test_reward_value_formula():
    psi, sigma, ups = 0.8, 0.1, 0.9
    got = pure.reward_value(psi, sigma, ups, 0.5, 0.025, 1.0, 2.0)
    want = -(1 - 0.5) * (0.025 * psi + 1.0 * sigma) + 0.5 * 2.0 * ups
    assert got == want
    # Coefficient extremes: alpha=1 ignores delay/stability entirely.
    assert pure.reward_value(99.0, 99.0, 0.9, 1.0, 0.025, 1.0, 2.0) == \
        2.0 * 0.9
    # alpha=0 ignores accuracy.
    assert pure.reward_value(2.0, 0.5, 0.9, 0.0, 0.025, 1.0, 2.0) == \
        -(0.025 * 2.0 + 0.5)


def test_q_step_formula():
    got = pure.q_step(0.5, 0.01, 1.0, 0.99, 0.4)
    assert got == 0.5 + 0.01 * (1.0 + 0.99 * 0.4 - 0.5)
    # lr=0 is a no-op; lr=1 jumps to the target.
    assert pure.q_step(0.5, 0.0, 1.0, 0.99, 0.4) == 0.5
    assert pure.q_step(0.5, 1.0, 1.0, 0.99, 0.4) == 1.0 + 0.99 * 0.4


def test_exp_interval_oracle():
    # Inverse transform: u = 1 - exp(-x/mean).
    for u, mean in ((0.0, 350.0), (0.5, 350.0), (0.9999, 2.0)):
        assert pure.exp_interval(u, mean) == -mean * math.log1p(-u)
    assert pure.exp_interval(0.0, 350.0) == 0.0
    assert pure.exp_interval(0.5, 1.0) == pytest.approx(math.log(2), rel=1e-12)


@pytest.mark.skipif(compiled is None, reason="compiled extension not built")
def test_compiled_pure_bit_parity():
    rng = np.random.default_rng(7)
    for _ in range(2000):
        s, e = rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0)
        f = rng.random()
        assert compiled.geometric_attr(s, e, f) == pure.geometric_attr(s, e, f)
        mj, mn = int(rng.integers(0, 30)), int(rng.integers(0, 300))
        args = (s, e, mj, mn, 0.02, 0.001)
        assert compiled.percent_step_attr(*args) == pure.percent_step_attr(*args)
        vals = rng.uniform(0.0, 2.0, 7)
        a = (vals[0], vals[1], vals[2], min(vals[3], 1.0), vals[4], vals[5],
             vals[6])
        assert compiled.reward_value(*a) == pure.reward_value(*a)
        q = (vals[0], 0.01, vals[1] - 1.0, 0.99, vals[2])
        assert compiled.q_step(*q) == pure.q_step(*q)
        u = rng.random()
        assert compiled.exp_interval(u, 350.0) == pure.exp_interval(u, 350.0)


@pytest.mark.skipif(compiled is None, reason="compiled extension not built")
def test_backends_export_same_surface():
    for name in FUNCS:
        assert callable(getattr(compiled, name))
        assert callable(getattr(pure, name))
        assert callable(getattr(kernels, name))
