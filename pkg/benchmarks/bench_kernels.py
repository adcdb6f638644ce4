"""Timing comparison of the jitted kernels against their numpy fallbacks.

Run:  python benchmarks/bench_kernels.py
The selected path follows KSIKIT_NO_NUMBA; both implementations are timed
here explicitly regardless of the flag.
"""

import time

import numpy as np

from ksikit import kernels as K


def timeit(fn, *args, repeat=7):
    fn(*args)  # warm (JIT compile / cache load)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    rows = []

    d = rng.uniform(0, 8, 2_000_000)
    rows.append(("hysteresis_states (2e6)",
                 timeit(K._hysteresis_states_np, d, 2.0, 4.0, False),
                 timeit(K._hysteresis_states_nb, d, 2.0, 4.0, False) if K.NUMBA_ENABLED else None))

    xs = rng.uniform(0, 1366, 2_000_000)
    ys = rng.uniform(0, 768, 2_000_000)
    rows.append(("first_exceed (2e6, worst case)",
                 timeit(K._first_exceed_np, xs, ys, 700.0, 400.0, 2000.0),
                 timeit(K._first_exceed_nb, xs, ys, 700.0, 400.0, 2000.0) if K.NUMBA_ENABLED else None))

    def np_traj():
        for _ in range(2000):
            K._minjerk_positions_np(0.0, 0.0, 400.0, 200.0, 120, 1.2, 0.01)

    def nb_traj():
        for _ in range(2000):
            K._minjerk_positions_nb(0.0, 0.0, 400.0, 200.0, 120, 1.2, 0.01)

    rows.append(("minjerk_positions (2000 x 120)",
                 timeit(np_traj),
                 timeit(nb_traj) if K.NUMBA_ENABLED else None))

    print(f"numba available: {K.NUMBA_ENABLED}")
    print(f"{'kernel':36s} {'numpy':>10s} {'numba':>10s} {'speedup':>9s}")
    for name, t_np, t_nb in rows:
        if t_nb is None:
            print(f"{name:36s} {t_np * 1e3:9.2f}ms {'-':>10s} {'-':>9s}")
        else:
            print(f"{name:36s} {t_np * 1e3:9.2f}ms {t_nb * 1e3:9.2f}ms {t_np / t_nb:8.2f}x")


if __name__ == "__main__":
    main()
