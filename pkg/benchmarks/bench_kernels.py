"""Compare the compiled and numpy filter-bank kernels on one reference trial.

Usage::

    python benchmarks/bench_kernels.py [--iterations 3000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from acl0lms import kernels
from acl0lms.harness import ExperimentConfig, trial_data


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(mod, cfg, hm, xs, ds, sigma2):
    t, n_r = ds.shape
    beta = cfg.beta_coeff * sigma2

    def single(b):
        def run():
            mod.run_filter_bank(xs, ds, hm, np.zeros_like(hm), cfg.mu1, b, cfg.alpha,
                                np.empty(t), np.empty((t, n_r)))
        return run

    def pair(b):
        def run():
            mod.run_combined_bank(xs, ds, hm, np.zeros_like(hm), np.zeros_like(hm), np.ones(n_r),
                                  cfg.mu1, cfg.mu2, b, cfg.alpha, cfg.mu_lambda, cfg.combiner_reg,
                                  np.empty(t), np.empty((t, n_r)), np.empty((t, n_r)))
        return run

    return {"lms": single(0.0), "l0lms": single(beta), "ac-lms": pair(0.0), "ac-l0lms": pair(beta)}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--iterations", type=int, default=3000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    cfg = ExperimentConfig(iterations=args.iterations)
    h, xs, ds, sigma2 = trial_data(cfg, 0)
    hm = np.ascontiguousarray(h.matrix)
    backends = kernels.available_backends()
    timings = {name: {alg: _time(fn, args.repeat) for alg, fn in
                      cases(mod, cfg, hm, xs, ds, sigma2).items()}
               for name, mod in backends.items()}

    print(f"one trial: N_r={cfg.n_r} M={cfg.taps} T={cfg.iterations}, best of {args.repeat}")
    names = sorted(timings)
    print(f"{'algorithm':<10}" + "".join(f"{n + ' [s]':>14}" for n in names)
          + (f"{'speed-up':>10}" if "cython" in timings else ""))
    for alg in timings["python"]:
        line = f"{alg:<10}" + "".join(f"{timings[n][alg]:14.4f}" for n in names)
        if "cython" in timings:
            line += f"{timings['python'][alg] / timings['cython'][alg]:9.1f}x"
        print(line)
    if "cython" not in timings:
        print("compiled extension not built; only the numpy backend was timed")


if __name__ == "__main__":
    main()
