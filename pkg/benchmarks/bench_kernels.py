"""Time the compiled RK4 integrator against the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py [--regions 10 --steps 20000 --repeat 3]``.
"""

import argparse
import timeit

import numpy as np

from regiosim import EconomyState, ModelParams, SpatialWeights, build_config, simulate
from regiosim import _backend, _fallback


def _economy(n_regions, seed):
    rng = np.random.default_rng(seed)
    w = rng.uniform(size=(n_regions, n_regions))
    np.fill_diagonal(w, 0.0)
    w /= w.sum(axis=1, keepdims=True)
    labels = [f"R{i}" for i in range(n_regions)]
    params = ModelParams(alpha=0.35, beta=0.1, gamma=0.2, theta=0.4)
    config = build_config(params, 0.2, 0.25, 0.02, SpatialWeights(labels, w, standardized=True))
    state = EconomyState(0.0, rng.uniform(-1, 1, n_regions), rng.uniform(-1, 1, n_regions), np.zeros(n_regions))
    return config, state


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--regions", type=int, default=10)
    ap.add_argument("--steps", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    config, state = _economy(args.regions, seed=0)
    dt = 0.05
    horizon = dt * args.steps
    backends = {"fallback": _fallback}
    if _backend.kernels is not _fallback:
        backends["compiled"] = _backend.kernels
    else:
        print("compiled extension not available; timing the fallback only")
    best = {}
    finals = {}
    for name, mod in backends.items():
        run = lambda: simulate(config, state, dt, horizon, tol=0.0, record_every=args.steps, backend=mod)  # noqa: E731
        finals[name] = run().ln_A[-1]
        best[name] = min(timeit.repeat(run, number=1, repeat=args.repeat))
        print(f"{name:>9}: {best[name] * 1e3:9.1f} ms  ({args.steps} steps, {args.regions} regions)")
    if "compiled" in best:
        drift = float(np.max(np.abs(finals["compiled"] - finals["fallback"]) / np.abs(finals["fallback"]).clip(1e-300)))
        print(f"  speedup: {best['fallback'] / best['compiled']:.1f}x, max relative state difference {drift:.1e}")


if __name__ == "__main__":
    main()
