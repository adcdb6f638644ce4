"""The jitted kernels and their numpy fallbacks must agree exactly."""

import numpy as np
import pytest

from ksikit import kernels as K


@pytest.mark.parametrize("seed", range(5))
def test_hysteresis_implementations_agree(seed):
    rng = np.random.default_rng(seed)
    d = rng.uniform(0, 8, 5000)
    for start in (False, True):
        a = K._hysteresis_states_np(d, 2.0, 4.0, start)
        b = K.hysteresis_states(d, 2.0, 4.0, start)
        assert np.array_equal(a, np.asarray(b))


def test_hysteresis_matches_sequential_reference():
    rng = np.random.default_rng(9)
    d = rng.uniform(0, 8, 2000)
    states = K._hysteresis_states_np(d, 2.0, 4.0, False)
    on = False
    for i, x in enumerate(d):
        if x <= 2.0:
            on = True
        elif x >= 4.0:
            on = False
        assert states[i] == on


@pytest.mark.parametrize("seed", range(5))
def test_first_exceed_implementations_agree(seed):
    rng = np.random.default_rng(100 + seed)
    xs = rng.uniform(0, 10, 300)
    ys = rng.uniform(0, 10, 300)
    a = K._first_exceed_np(xs, ys, 5.0, 5.0, 3.0)
    b = K.first_exceed(xs, ys, 5.0, 5.0, 3.0)
    assert a == b


def test_first_exceed_none_found():
    xs = np.full(10, 1.0)
    ys = np.full(10, 1.0)
    assert K.first_exceed(xs, ys, 1.0, 1.0, 0.5) == -1


def test_minjerk_positions_implementations_agree():
    a = K._minjerk_positions_np(0.0, 0.0, 100.0, 50.0, 37, 0.5, 0.01)
    b = K.minjerk_positions(0.0, 0.0, 100.0, 50.0, 37, 0.5, 0.01)
    for x, y in zip(a, b):
        assert np.allclose(x, np.asarray(y), atol=1e-12)


def test_minjerk_endpoints_and_monotonicity():
    ts, xs, ys = K._minjerk_positions_np(10.0, 20.0, 110.0, 20.0, 101, 1.0, 0.01)
    assert xs[0] == 10.0 and xs[-1] == pytest.approx(110.0)
    assert np.all(np.diff(xs) >= 0)


def test_minjerk_tau_matches_grid_oracle():
    taus = np.linspace(0, 1, 200001)
    s = K._minjerk_shape_np(taus)
    for c in (0.001, 0.005, 0.01, 0.2, 0.5, 0.9, 0.999):
        tau = K.minjerk_tau_scalar(c)
        ref = taus[int(np.searchsorted(s, c))]
        assert tau == pytest.approx(ref, abs=1e-5)
        assert K.minjerk_shape_scalar(tau) == pytest.approx(c, abs=1e-12)


def test_minjerk_tau_bounds():
    assert K.minjerk_tau_scalar(0.0) == 0.0
    assert K.minjerk_tau_scalar(1.0) == 1.0
    assert K.minjerk_tau_scalar(-5.0) == 0.0
    assert K.minjerk_tau_scalar(2.0) == 1.0
