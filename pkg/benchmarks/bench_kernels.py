"""Compare the compiled and pure-Python kernel backends.

Run with ``python3 benchmarks/bench_kernels.py``. Each row reports the best of
several repeats, in milliseconds, for the kernel alone and for an end-to-end
eight-layer evaluation.
"""
import argparse
import timeit

import numpy as np

from layerdiff import _core_py, kernels, presets
from layerdiff.assembly import Solver, layer_grid
from layerdiff.model import validate


def _inputs(rng, N=200, K=7, M=7, P=101):
    s = rng.normal(size=K) + 1j * rng.normal(size=K) + 5.0
    q = np.sort(rng.uniform(0.1, 1e4, N))
    B = rng.normal(size=(5, N))
    sub = rng.normal(size=(K, M)) + 1j * rng.normal(size=(K, M))
    sup = rng.normal(size=(K, M)) + 1j * rng.normal(size=(K, M))
    diag = 4 + rng.normal(size=(K, M)) + 0j
    rhs = rng.normal(size=(K, M)) + 0j
    w = rng.normal(size=(3, K)) + 1j * rng.normal(size=(3, K))
    coef = rng.normal(size=(3, N))
    Phi = rng.normal(size=(P, N))
    return {
        "pole_sums": (s, q, B),
        "thomas": (sub, diag, sup, rhs),
        "filtered_sums": (w, s, q, 0.3),
        "series_eval": (coef, Phi),
    }


def _best(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number * 1e3


def _end_to_end(repeat):
    p = validate(presets.preset("eight-layer").spec)
    x = layer_grid(p, 101)

    def run():
        Solver(p, 100).evaluate(x, [0.01, 0.2, 3.0])
    return _best(run, repeat, 1)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=200)
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    if "compiled" not in backends:
        print("compiled kernels are not built; only the Python backend is timed")
    args_by_kernel = _inputs(np.random.default_rng(0))
    original = kernels.BACKEND
    times = {}
    try:
        for b in backends:
            kernels.use_backend(b)
            for name, a in args_by_kernel.items():
                fn = getattr(kernels, name)
                times[b, name] = _best(lambda: fn(*a), args.repeat, args.number)
            times[b, "eight-layer solve"] = _end_to_end(args.repeat)
    finally:
        kernels.use_backend(original)

    rows = list(args_by_kernel) + ["eight-layer solve"]
    print(f"{'kernel':<20}" + "".join(f"{b + ' [ms]':>16}" for b in backends)
          + (f"{'speed-up':>10}" if len(backends) == 2 else ""))
    for r in rows:
        line = f"{r:<20}" + "".join(f"{times[b, r]:>16.4f}" for b in backends)
        if len(backends) == 2:
            line += f"{times['python', r] / times['compiled', r]:>9.1f}x"
        print(line)

    # both backends must agree before the timings mean anything
    if "compiled" in backends:
        from layerdiff import _core
        for name, a in args_by_kernel.items():
            x, y = getattr(_core, name)(*a), getattr(_core_py, name)(*a)
            x, y = (x[0], y[0]) if name == "thomas" else (x, y)
            assert np.allclose(x, y, rtol=1e-12, atol=1e-12), name


if __name__ == "__main__":
    main()
