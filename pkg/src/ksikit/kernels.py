"""Hot numeric kernels: numba-jitted with pure-numpy fallbacks.

Set KSIKIT_NO_NUMBA=1 to force the numpy path (also used when numba is not
importable). benchmarks/bench_kernels.py compares both implementations.
"""

from __future__ import annotations

import os

import numpy as np

_FORCE_NUMPY = os.environ.get("KSIKIT_NO_NUMBA", "").strip() not in ("", "0")
try:
    from numba import njit as _njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    _njit = None

NUMBA_ENABLED = _njit is not None and not _FORCE_NUMPY


def _minjerk_shape_np(tau: np.ndarray) -> np.ndarray:
    """Normalized minimum-jerk displacement s(tau) = 10t^3 - 15t^4 + 6t^5 on [0,1]."""
    tau = np.clip(tau, 0.0, 1.0)
    return tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau))


def _minjerk_positions_np(x0, y0, x1, y1, n, duration, dt):
    ts = np.arange(n) * dt
    s = _minjerk_shape_np(ts / duration)
    return ts, x0 + s * (x1 - x0), y0 + s * (y1 - y0)


def _minjerk_tau_py(c: float) -> float:
    """Smallest tau in [0,1] with s(tau) = c, for c in [0,1]; Newton from the cubic root."""
    if c <= 0.0:
        return 0.0
    if c >= 1.0:
        return 1.0
    tau = (c / 10.0) ** (1.0 / 3.0)
    for _ in range(40):
        s = tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau))
        ds = tau * tau * (30.0 + tau * (-60.0 + 30.0 * tau))
        if ds <= 0.0:
            break
        step = (s - c) / ds
        tau -= step
        if tau < 0.0:
            tau = 0.0
        elif tau > 1.0:
            tau = 1.0
        if abs(step) < 1e-14:
            break
    return tau


def _hysteresis_states_np(dist, t_on, t_off, start_on):
    """State after each sample: ON when dist <= t_on, OFF when dist >= t_off, else hold."""
    n = dist.shape[0]
    mark = np.zeros(n, dtype=np.int8)
    mark[dist <= t_on] = 1
    mark[dist >= t_off] = -1
    idx = np.arange(n)
    last = np.maximum.accumulate(np.where(mark != 0, idx, -1))
    states = np.where(last >= 0, mark[np.maximum(last, 0)] == 1, start_on)
    return states.astype(np.bool_)


def _first_exceed_np(xs, ys, x0, y0, thr):
    """Index of first sample farther than thr from (x0, y0), or -1."""
    d2 = (xs - x0) ** 2 + (ys - y0) ** 2
    hit = d2 > thr * thr
    if not hit.any():
        return -1
    return int(np.argmax(hit))


if NUMBA_ENABLED:

    @_njit(cache=True)
    def _minjerk_positions_nb(x0, y0, x1, y1, n, duration, dt):  # pragma: no cover - jitted
        ts = np.empty(n)
        xs = np.empty(n)
        ys = np.empty(n)
        dx = x1 - x0
        dy = y1 - y0
        for i in range(n):
            t = i * dt
            tau = t / duration
            if tau > 1.0:
                tau = 1.0
            s = tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau))
            ts[i] = t
            xs[i] = x0 + s * dx
            ys[i] = y0 + s * dy
        return ts, xs, ys

    @_njit(cache=True)
    def _hysteresis_states_nb(dist, t_on, t_off, start_on):  # pragma: no cover - jitted
        n = dist.shape[0]
        states = np.empty(n, dtype=np.bool_)
        on = start_on
        for i in range(n):
            d = dist[i]
            if d <= t_on:
                on = True
            elif d >= t_off:
                on = False
            states[i] = on
        return states

    @_njit(cache=True)
    def _first_exceed_nb(xs, ys, x0, y0, thr):  # pragma: no cover - jitted
        thr2 = thr * thr
        for i in range(xs.shape[0]):
            dx = xs[i] - x0
            dy = ys[i] - y0
            if dx * dx + dy * dy > thr2:
                return i
        return -1

    minjerk_positions = _minjerk_positions_nb
    hysteresis_states = _hysteresis_states_nb
    first_exceed = _first_exceed_nb
else:
    minjerk_positions = _minjerk_positions_np
    hysteresis_states = _hysteresis_states_np
    first_exceed = _first_exceed_np


def minjerk_tau_scalar(c: float) -> float:
    return _minjerk_tau_py(float(c))


def minjerk_shape_scalar(tau: float) -> float:
    tau = min(max(tau, 0.0), 1.0)
    return tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau))
