"""Benchmark the numba kernels against the pure-numpy fallback.

Times the three per-observation kernels and a full descent iteration on a
representative completion workload, on every available backend::

    python -m tuckercomplete.benchmark --d 50 --r 3 --alpha 8 --repeat 5
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from . import kernels
from .completion import DescentConfig, _contig, _penalized_value, _search_step, riemannian_gradient, resolve_rho
from .experiments import generate_odeco, sample_count
from .grassmann import coherence
from .observations import sample_uniform
from .spectral import initialize


def _time(fn, repeat):
    fn()  # warm-up (JIT compile on the numba path)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=int, default=50)
    ap.add_argument("--r", type=int, default=3)
    ap.add_argument("--alpha", type=float, default=8.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    d, r = args.d, args.r
    n = sample_count(args.alpha, r, d)
    truth = generate_odeco(d, r, args.seed)
    obs = sample_uniform(truth.tensor, n, [args.seed, 1])
    mu0 = max(1.0, max(coherence(f) for f in truth.factors))
    frames = _contig(initialize(obs, (r, r, r), mu0))
    config = DescentConfig(mu0=mu0)
    rho = resolve_rho(config, obs)
    i1, i2, i3 = obs.idx[:, 0], obs.idx[:, 1], obs.idx[:, 2]
    core = np.zeros((r, r, r))
    core[0, 0, 0] = 1.0
    res = obs.values.copy()

    print(f"workload: d={d} r={r} alpha={args.alpha:g} n={n}")
    cases = {
        "tucker_values": lambda: kernels.tucker_values(i1, i2, i3, *frames, core),
        "normal_system": lambda: kernels.normal_system(i1, i2, i3, obs.values, *frames),
        "scatter_products": lambda: kernels.scatter_products(i1, i2, i3, res, *frames),
        "descent_iteration": None,  # assigned below, needs backend state
    }

    def descent_iteration():
        value, c0, _ = _penalized_value(frames, obs, mu0, rho)
        g = riemannian_gradient(frames, c0, obs, mu0, rho)
        dirs = tuple(-x for x in g)
        _search_step(frames, dirs, obs, config, frames, mu0, rho, value, c0)

    cases["descent_iteration"] = descent_iteration

    timings = {}
    for backend in kernels.available_backends():
        kernels.use_backend(backend)
        for name, fn in cases.items():
            timings[(backend, name)] = _time(fn, args.repeat)

    width = max(len(n) for _, n in timings)
    print(f"{'kernel':<{width}}  ", "  ".join(f"{b:>12}" for b in kernels.available_backends()), "  speedup")
    for name in cases:
        row = [timings[(b, name)] for b in kernels.available_backends()]
        ratio = max(row) / min(row)
        fastest = kernels.available_backends()[int(np.argmin(row))]
        print(
            f"{name:<{width}}  ",
            "  ".join(f"{t * 1e3:9.3f} ms" for t in row),
            f"  {ratio:6.1f}x ({fastest})",
        )
    kernels.use_backend(kernels._default_backend())
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
