"""Benchmark the numba kernels against the pure-numpy fallback.

Run as ``python -m spinsim.benchmark``.  Also verifies that both backends
return identical results on the benchmark workload.
"""

import time

import numpy as np

from . import _kernels, _prng
from .cli import bsc_joint
from .typicality import TypicalityParams, draw_typical_sequence


def _time(fn, repeat=3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    joint = bsc_joint(0.45)
    K, eps, runs = 2000, 0.05, 50
    params = TypicalityParams(K, eps, 2, 2)
    tol = params.joint_tol
    cdf_in = joint.input_marginal().cdf()
    cdf_m = joint.output_marginal().cdf()
    input_keys, cb_seeds = __import__(
        "spinsim.protocol", fromlist=["_run_keys"])._run_keys(12345, runs, True)

    print(f"workload: BSC(0.45), K={K}, eps={eps}, {runs} protocol runs")
    if not _kernels._HAVE_NUMBA:
        print("numba not available; nothing to compare")
        return

    # force compilation before timing
    _kernels._nb_simulate(input_keys[:1], cb_seeds[:1], K, 4, cdf_in, cdf_m,
                          joint.p, tol)
    t_nb, res_nb = _time(lambda: _kernels._nb_simulate(
        input_keys, cb_seeds, K, 1 << 24, cdf_in, cdf_m, joint.p, tol))
    t_np, res_np = _time(lambda: _kernels._np_simulate(
        input_keys, cb_seeds, K, 1 << 24, cdf_in, cdf_m, joint.p, tol), repeat=1)

    same = (np.array_equal(res_nb[0], res_np[0])
            and np.array_equal(res_nb[1], res_np[1]))
    print(f"simulate_runs   numba: {t_nb:8.3f} s   numpy: {t_np:8.3f} s   "
          f"speedup {t_np / t_nb:6.1f}x   identical: {same}")

    a = draw_typical_sequence(joint.input_marginal(), params, 7)
    trials = 200_000
    with np.errstate(over="ignore"):
        b_keys = _prng.mix64(_prng.U64(99) * _prng.GOLDEN
                             + np.arange(trials, dtype=np.uint64))
    _kernels._nb_rate(a.symbols, b_keys[:8], cdf_m, joint.p, tol)
    t_nb, r_nb = _time(lambda: _kernels._nb_rate(
        a.symbols, b_keys, cdf_m, joint.p, tol))
    t_np, r_np = _time(lambda: _kernels._np_rate(
        a.symbols, b_keys, cdf_m, joint.p, tol), repeat=1)
    print(f"rate_trials     numba: {t_nb:8.3f} s   numpy: {t_np:8.3f} s   "
          f"speedup {t_np / t_nb:6.1f}x   identical: {r_nb == r_np}")


if __name__ == "__main__":
    main()
