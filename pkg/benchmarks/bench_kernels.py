"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from crncert._kernels import _fallback
from crncert.kinetics import random_kinetics
from crncert.network import parse_network

try:
    from crncert._kernels import _core
except ImportError:  # extension not built
    _core = None

NET = parse_network("""
R1: E + S -> ES
R2: ES -> E + S
R3: ES -> E + P
R4: E + P -> ES
R5: P -> Q
R6: Q -> P
""")


def rk45_case(mod):
    arrs = random_kinetics(NET, np.random.default_rng(0)).kernel_arrays(NET)
    G = NET.gamma.astype(float)
    x0 = np.array([1.0, 2.0, 0.5, 0.1, 0.3])
    out_t = np.empty(1 << 14)
    out_z = np.empty((1 << 14, NET.n))

    def run():
        z = x0.copy()
        mod.rk45_advance(np.zeros(NET.n), np.eye(NET.n), G, *arrs, 0, z, 0.0, 20.0, 1e-3, 20.0 / 64,
                         1e-10, 1e-12, 1e-10, out_t, out_z, 10 ** 6)
    return run


def rates_case(mod):
    arrs = random_kinetics(NET, np.random.default_rng(1), "hill").kernel_arrays(NET)
    xs = np.random.default_rng(2).uniform(0.1, 2.0, size=(200, NET.n))

    def run():
        for x in xs:
            mod.eval_rates(x, *arrs)
            mod.eval_jacobian(x, *arrs)
    return run


def simplex_case(mod):
    rng = np.random.default_rng(3)
    m, n = 40, 80
    A = rng.uniform(0.0, 1.0, size=(m, n))
    c = -rng.uniform(0.0, 1.0, size=n)
    T0 = np.zeros((m + 1, n + m + 1))
    T0[:m, :n] = A
    T0[:m, n:n + m] = np.eye(m)
    T0[:m, -1] = 1.0
    T0[m, :n] = c

    def run():
        T = T0.copy()
        basis = np.arange(n, n + m, dtype=np.int64)
        mod.bland_simplex(T, basis, n + m, 1e-10, 100000)
    return run


def siphon_case(mod):
    rng = np.random.default_rng(4)
    n = 16
    ins = rng.integers(0, 1 << n, size=20).astype(np.uint64)
    outs = rng.integers(0, 1 << n, size=20).astype(np.uint64)
    return lambda: mod.siphon_masks(ins, outs, n)


CASES = {"rk45_advance": rk45_case, "eval_rates+jacobian": rates_case,
         "bland_simplex": simplex_case, "siphon_masks": siphon_case}


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _core is None:
        print("compiled kernels not built; only the fallback can be timed")
    print(f"{'kernel':<22}{'cython [ms]':>14}{'python [ms]':>14}{'speedup':>10}")
    for name, make in CASES.items():
        t_py = best_of(make(_fallback), args.repeat)
        if _core is None:
            print(f"{name:<22}{'-':>14}{t_py * 1e3:>14.2f}{'-':>10}")
            continue
        t_cy = best_of(make(_core), args.repeat)
        print(f"{name:<22}{t_cy * 1e3:>14.2f}{t_py * 1e3:>14.2f}{t_py / t_cy:>9.1f}x")


if __name__ == "__main__":
    main()
