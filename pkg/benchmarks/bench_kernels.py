#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-NumPy fallback.

Times the per-sample gradient kernel (the training hot loop) and the
forward kernel on a default-sized workload, then reports the speedup and
the largest numerical gap between the two implementations.

Run: python3 benchmarks/bench_kernels.py [--hidden 32] [--batch 32] [--reps 200]
"""

import argparse
import time

import numpy as np

from gradsift import kernels
from gradsift.model import Topology, init_model


def _time(fn, args, reps):
    fn(*args)  # warmup (JIT compile / cache touch)
    start = time.perf_counter()
    for _ in range(reps):
        out = fn(*args)
    return (time.perf_counter() - start) / reps, out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--hidden", type=int, default=32)
    parser.add_argument("--batch", type=int, default=32)
    parser.add_argument("--timesteps", type=int, default=1)
    parser.add_argument("--reps", type=int, default=200)
    args = parser.parse_args()

    top = Topology(1, args.hidden, 1)
    model = init_model(top, 0)
    rng = np.random.default_rng(1)
    model.params[:] += rng.normal(0, 0.1, model.params.size)
    wx, wh, b, wd, bd = model.views()
    xs = rng.random((args.batch, args.timesteps, 1))
    ys = rng.random(args.batch)

    print(f"hidden={args.hidden} batch={args.batch} timesteps={args.timesteps} "
          f"P={top.param_count()} reps={args.reps}")
    print(f"numba available: {kernels.numba_available}, active backend: {kernels.backend_name()}")

    t_np_g, (p_np, g_np) = _time(kernels._grads_batch_numpy, (wx, wh, b, wd, bd, xs, ys), args.reps)
    t_np_f, f_np = _time(kernels._forward_batch_numpy, (wx, wh, b, wd, bd, xs), args.reps)
    print(f"numpy  grads: {t_np_g * 1e6:9.1f} us/batch   forward: {t_np_f * 1e6:9.1f} us/batch")

    if kernels.numba_available:
        t_nb_g, (p_nb, g_nb) = _time(kernels.grads_batch_numba, (wx, wh, b, wd, bd, xs, ys), args.reps)
        t_nb_f, f_nb = _time(kernels.forward_batch_numba, (wx, wh, b, wd, bd, xs), args.reps)
        print(f"numba  grads: {t_nb_g * 1e6:9.1f} us/batch   forward: {t_nb_f * 1e6:9.1f} us/batch")
        print(f"speedup (numpy/numba): grads {t_np_g / t_nb_g:.2f}x, forward {t_np_f / t_nb_f:.2f}x")
        print(f"max |numba - numpy|: grads {np.abs(g_nb - g_np).max():.3e}, "
              f"preds {np.abs(p_nb - p_np).max():.3e}, forward {np.abs(f_nb - f_np).max():.3e}")
    else:
        print("numba not importable; numpy path only")


if __name__ == "__main__":
    main()
