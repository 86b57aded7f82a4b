"""Plain-text interchange formats.

Tensor files: first line ``d1 d2 d3``, then the ``d1*d2*d3`` entries as
whitespace-separated decimals in storage order (last index fastest).
Observation files: first line ``d1 d2 d3 n``, then ``n`` lines
``i1 i2 i3 value`` with 1-based indices.  Trial CSV: fixed header
``d,r,alpha,n,trial,seed,success,rel_error,iterations,dp_init,runtime_ms``.

All floats are written with 17 significant digits, enough to round-trip
float64 exactly.
"""

from __future__ import annotations

import numpy as np

from .experiments import TrialRecord
from .observations import ObservationSet

CSV_HEADER = "d,r,alpha,n,trial,seed,success,rel_error,iterations,dp_init,runtime_ms"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_tensor(path, t: np.ndarray) -> None:
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 3:
        raise ValueError("tensor must be 3-way")
    d1, d2, d3 = t.shape
    with open(path, "w") as fh:
        fh.write(f"{d1} {d2} {d3}\n")
        flat = t.reshape(d1 * d2, d3)
        for row in flat:
            fh.write(" ".join(_fmt(v) for v in row) + "\n")


def read_tensor(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError(f"{path}: first line must be 'd1 d2 d3'")
        d1, d2, d3 = (int(v) for v in header)
        body = fh.read().split()
    if len(body) != d1 * d2 * d3:
        raise ValueError(
            f"{path}: expected {d1 * d2 * d3} values, found {len(body)}"
        )
    return np.array(body, dtype=np.float64).reshape(d1, d2, d3)


def write_observations(path, obs: ObservationSet) -> None:
    d1, d2, d3 = obs.dims
    with open(path, "w") as fh:
        fh.write(f"{d1} {d2} {d3} {obs.n}\n")
        for (i1, i2, i3), v in zip(obs.idx, obs.values):
            fh.write(f"{i1 + 1} {i2 + 1} {i3 + 1} {_fmt(v)}\n")


def read_observations(path) -> ObservationSet:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 4:
            raise ValueError(f"{path}: first line must be 'd1 d2 d3 n'")
        d1, d2, d3, n = (int(v) for v in header)
        idx = np.empty((n, 3), dtype=np.int64)
        vals = np.empty(n)
        for k in range(n):
            parts = fh.readline().split()
            if len(parts) != 4:
                raise ValueError(f"{path}: bad observation line {k + 2}")
            idx[k] = [int(parts[0]) - 1, int(parts[1]) - 1, int(parts[2]) - 1]
            vals[k] = float(parts[3])
    return ObservationSet(dims=(d1, d2, d3), idx=idx, values=vals)


def emit_csv(records, path) -> None:
    """Write trial records; one row per record, success as 0/1."""
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for rec in records:
            fh.write(format_csv_row(rec) + "\n")


def format_csv_row(rec: TrialRecord) -> str:
    return ",".join(
        [
            str(rec.d),
            str(rec.r),
            _fmt(rec.alpha),
            str(rec.n),
            str(rec.trial),
            str(rec.seed),
            str(int(rec.success)),
            _fmt(rec.rel_error),
            str(rec.iterations),
            _fmt(rec.dp_init),
            _fmt(rec.runtime_ms),
        ]
    )
