"""Timing of the compiled divided-difference kernels against the pure-Python ones.

Usage::

    python3 benchmarks/bench_kernels.py [--simplices 2000] [--repeat 5] [--seed 0]

Prints the best-of-``repeat`` wall time per kernel and backend, the speedup,
and the largest relative disagreement between backends.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from tentmle import kernels
from tentmle.geometry import PointConfiguration
from tentmle.kernels import backends
from tentmle.solver import SolverOptions, solve_mle


def _nodes(rng, simplices: int, d: int) -> np.ndarray:
    # mixes well-separated and nearly confluent rows so both code paths run
    z = rng.normal(scale=2.0, size=(simplices, d + 1))
    close = rng.random(simplices) < 0.3
    z[close] = z[close, :1] + 1e-4 * rng.standard_normal((int(close.sum()), d + 1))
    return z


def _flat(out) -> np.ndarray:
    parts = out if isinstance(out, tuple) else (out,)
    return np.concatenate([np.ravel(a) for a in parts if a is not None])


def _time(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--simplices", type=int, default=2000)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    found = backends()
    if "compiled" not in found:
        print("compiled extension not built; only the pure-Python backend is timed")
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    print(f"{'kernel':<28}{'backend':<10}{'seconds':>12}{'speedup':>10}{'max rel diff':>14}")
    for d in (1, 2, 3):
        z = _nodes(rng, args.simplices, d)
        for name, call in (
            ("simplex_values", lambda m: m.simplex_values(z)),
            ("simplex_derivatives", lambda m: m.simplex_derivatives(z, True)),
        ):
            times, outs = {}, {}
            for label, mod in found.items():
                outs[label] = call(mod)
                times[label] = _time(lambda: call(mod), args.repeat)
            ref = _flat(outs["python"])
            for label in found:
                got = _flat(outs[label])
                diff = float(np.max(np.abs(got - ref) / np.maximum(np.abs(ref), 1e-300)))
                speed = times["python"] / times[label]
                print(f"{name + f' d={d}':<28}{label:<10}{times[label]:>12.5f}{speed:>10.1f}{diff:>14.2e}")

    # end to end: one solve on a fixed random planar configuration, per backend
    pts = np.random.default_rng(np.random.SeedSequence(args.seed + 1)).standard_normal((10, 2))
    config = PointConfiguration(pts)
    w = np.full(10, 0.1)
    saved = {name: getattr(kernels, name) for name in ("dd_exp", "simplex_values", "simplex_derivatives")}
    try:
        for label, mod in found.items():
            for name in saved:
                setattr(kernels, name, getattr(mod, name))
            t = _time(lambda: solve_mle(config, w, SolverOptions()), args.repeat)
            print(f"{'solve_mle n=10 d=2':<28}{label:<10}{t:>12.5f}")
    finally:
        for name, fn in saved.items():
            setattr(kernels, name, fn)


if __name__ == "__main__":
    main()
