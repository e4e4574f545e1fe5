"""Time the compiled and numpy tableau kernels on the same workload.

    python benchmarks/bench_kernels.py [--distance 11] [--errors 2000] [--repeat 2]
"""
import argparse
import time

import numpy as np

from colorqec import kernels, qec
from colorqec.code import build_triangular_488
from colorqec.tableau import encoded_tableau, pack_many


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--distance", type=int, default=11)
    ap.add_argument("--errors", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=2)
    args = ap.parse_args(argv)

    code = build_triangular_488(args.distance)
    tab = encoded_tableau(code, "zero")
    rng = np.random.default_rng(0)
    errs = qec.random_errors(code.n, args.errors, (args.distance - 1) // 2, rng)
    GX, GZ, GR = pack_many(code.generators, tab.w)
    EX, EZ, _ = pack_many(errs, tab.w)
    probes = list(code.generators) * max(1, args.errors // len(code.generators))
    PX, PZ, PR = pack_many(probes, tab.w)

    work = {
        "syndrome_batch": lambda k, t: k.syndrome_batch(t.X, t.Z, t.R, t.n, GX, GZ, GR, EX, EZ),
        "peek_batch": lambda k, t: k.peek_batch(t.X, t.Z, t.R, t.n, PX, PZ, PR),
    }
    backends = kernels.backends()
    print(f"d={args.distance} n={code.n} errors={len(errs)} probes={len(probes)}")
    print(f"{'kernel':<16}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, fn in work.items():
        row, outs = {}, {}
        for b, mod in backends.items():
            t = tab.copy()
            row[b], outs[b] = best_of(lambda: fn(mod, t), args.repeat)
        ref = outs["python"]
        assert all(np.array_equal(np.asarray(o), np.asarray(ref)) for o in outs.values()), name
        speed = f"{row['python'] / row['cython']:>9.1f}x" if "cython" in row else f"{'n/a':>10}"
        print(f"{name:<16}" + "".join(f"{row[b]:>11.4f}s" for b in backends) + speed)


if __name__ == "__main__":
    main()
