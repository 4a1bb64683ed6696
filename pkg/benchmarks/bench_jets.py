"""Compare the compiled and numpy jet kernels.

Usage: python benchmarks/bench_jets.py [--repeat N] [--batch P]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from biharm import jets as J
from biharm.catalog import ExampleSpec, make_example
from biharm.hypersurface import evaluate, sample_points
from biharm.jets import backend, jet_space


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(batch):
    rng = np.random.default_rng(0)
    out = []
    for n, k in ((2, 5), (3, 5), (4, 5), (5, 5)):
        sp = jet_space(n, k)
        a = J.Jet(rng.normal(size=(batch, sp.size)), sp)
        b = J.Jet(rng.normal(size=(batch, sp.size)), sp)
        out.append((f"mul n={n} k={k} ({sp.size} coeffs)", lambda a=a, b=b: a * b))
        out.append((f"exp n={n} k={k}", lambda a=a: J.exp(a)))
    for spec in (ExampleSpec("small-hypersphere", {"m": 3}), ExampleSpec("graph", {"m": 4, "seed": 1})):
        im = make_example(spec)
        x = sample_points(im, 50)
        out.append((f"evaluate {spec.label()} x50", lambda im=im, x=x: evaluate(im, x)))
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--batch", type=int, default=200)
    args = ap.parse_args(argv)

    names = backend.available()
    if "compiled" not in names:
        print("compiled extension not built; only the numpy kernels are available")
    rows = []
    for label, fn in cases(args.batch):
        timings = {}
        for name in names:
            prev = backend.use(name)
            try:
                fn()  # warm caches
                timings[name] = best_of(fn, args.repeat)
            finally:
                backend.use(prev)
        rows.append((label, timings))

    header = f"{'case':<44}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) > 1 else "")
    print(header)
    for label, t in rows:
        line = f"{label:<44}" + "".join(f"{t[n] * 1e3:>10.2f}ms" for n in names)
        if "compiled" in t:
            line += f"{t['python'] / t['compiled']:>11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
