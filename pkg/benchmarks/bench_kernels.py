"""Compiled vs numpy kernels on a realistic propagation: L=9, + block, T = 15 T_L.

    python benchmarks/bench_kernels.py [--K 1 2] [--repeat 3]
"""

import argparse
import time

import numpy as np

from spinoc import _backend
from spinoc.basis import ChainParams, enumerate_sector, parity_adapt
from spinoc.dynamics import make_propagation_cache, propagate_forward
from spinoc.krotov import KrotovConfig, krotov_iteration
from spinoc.operators import build_control, build_H01
from spinoc.protocols import build_process_A


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--L", type=int, default=9)
    ap.add_argument("--K", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--control", default="local", choices=["local", "long_range"])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = _backend.available()
    print(f"backends: {', '.join(backends)}")
    print(f"{'K':>2} {'D':>4} {'steps':>6} {'backend':>9} {'forward s':>10} {'iteration s':>12} {'speedup':>8}")
    for K in args.K:
        p = ChainParams(L=args.L, Gamma=0.5)
        pb = parity_adapt(enumerate_sector(args.L, K), 1)
        H01, Hc = build_H01(p, pb), build_control(p, pb, args.control)
        psi0, psif = build_process_A(args.L, K, pb)
        cfg = KrotovConfig.for_chain(p)
        field = cfg.guess_field()
        rows, finals = [], []
        for name in backends:
            cache = make_propagation_cache(H01, Hc, cfg.dt, backend=name)
            t_fwd, psi = best_of(lambda: propagate_forward(psi0, field, cache), args.repeat)
            t_it, _ = best_of(lambda: krotov_iteration(field, psi0, psif, cache, cfg.weight(1.0)),
                              args.repeat)
            finals.append(psi)
            rows.append((name, t_fwd, t_it))
        # speedup relative to the numpy fallback
        ref = dict((r[0], r[2]) for r in rows).get("python", rows[-1][2])
        for name, t_fwd, t_it in rows:
            print(f"{K:>2} {pb.dim:>4} {field.n:>6} {name:>9} {t_fwd:>10.4f} {t_it:>12.4f} "
                  f"{ref / t_it:>7.1f}x")
        if len(finals) > 1:
            print(f"   max |psi_compiled - psi_python| = {np.max(np.abs(finals[0] - finals[1])):.1e}")


if __name__ == "__main__":
    main()
