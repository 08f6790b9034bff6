"""Time the compiled amplification kernel against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--res 300] [--repeat 3]
"""

import argparse
import time

import numpy as np

from sdgtime import kernels
from sdgtime.schemes import SchemeConfig
from sdgtime.stability import region_scan, scheme_amplification

CASES = [("ExSDG", 4, 4), ("ExSDG", 8, 16), ("ImSDG", 4, 8), ("ImSDG", 9, 18)]


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--res", type=int, default=300)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    res = (args.res, args.res)
    if kernels.compiled_amplification is None:
        print("compiled kernel not built; only the fallback is available")
    print(f"{'scheme':<14}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}{'max diff':>12}")
    for variant, p, K in CASES:
        cfg = SchemeConfig(variant, p, K)
        tp, sp = best_of(lambda: region_scan(cfg, resolution=res, jobs=1,
                                             kernel=kernels.python_amplification), args.repeat)
        if kernels.compiled_amplification is None:
            print(f"{cfg.label:<14}{tp:>12.3f}{'-':>12}{'-':>10}{'-':>12}")
            continue
        tc, sc = best_of(lambda: region_scan(cfg, resolution=res, jobs=1,
                                             kernel=kernels.compiled_amplification), args.repeat)
        diff = float(np.max(np.abs(sp.values - sc.values) / np.maximum(1.0, sp.values)))
        print(f"{cfg.label:<14}{tp:>12.3f}{tc:>12.3f}{tp / tc:>10.1f}{diff:>12.1e}")

    # one lambda per call, as in root finding or line searches along a ray
    if kernels.compiled_amplification is None:
        return
    xs = np.linspace(-5.0, 0.0, 1000)
    print(f"\npointwise, {xs.size} calls")
    for variant, p, K in CASES:
        cfg = SchemeConfig(variant, p, K)
        times = []
        for k in (kernels.python_amplification, kernels.compiled_amplification):
            t, _ = best_of(lambda: [scheme_amplification(cfg, x, k) for x in xs], args.repeat)
            times.append(t)
        print(f"{cfg.label:<14}{times[0]:>12.3f}{times[1]:>12.3f}{times[0] / times[1]:>10.1f}")


if __name__ == "__main__":
    main()
