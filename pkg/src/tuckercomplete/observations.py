"""Uniform sampling with replacement and the entrywise sampling operator.

Entries are drawn i.i.d. uniformly over the index grid; duplicate draws are
kept and contribute with multiplicity to every sum over samples (objective,
normal equations, second-moment estimator).

Randomness comes from numpy's Philox counter-based generator, which has a
documented, platform-independent state transition; bounded indices use
numpy's exact Lemire-style mapping.  Identical ``(seed, n, dims)`` therefore
reproduce identical draws everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor_ops import _check_tensor3


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


@dataclass(frozen=True)
class ObservationSet:
    """Immutable list of sampled entries of a (d1, d2, d3) tensor.

    Attributes
    ----------
    dims : (d1, d2, d3)
    idx : int64 array, shape (n, 3)
        0-based index triples, duplicates permitted.
    values : float array, shape (n,)
        Tensor values at the triples.
    """

    dims: tuple[int, int, int]
    idx: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        idx = np.ascontiguousarray(self.idx, dtype=np.int64)
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if idx.ndim != 2 or idx.shape[1] != 3:
            raise ValueError("idx must have shape (n, 3)")
        if values.shape != (idx.shape[0],):
            raise ValueError("values length must match idx")
        if idx.shape[0] < 1:
            raise ValueError("need at least one observation")
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3 or any(d < 1 for d in dims):
            raise ValueError(f"bad dims {self.dims!r}")
        if (idx < 0).any() or (idx >= np.asarray(dims)).any():
            raise ValueError("index triple out of range")
        idx.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "idx", idx)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.idx.shape[0]


def sample_uniform(t: np.ndarray, n: int, seed) -> ObservationSet:
    """Draw ``n`` entries of ``t`` i.i.d. uniformly with replacement.

    The three index columns are drawn as consecutive length-``n`` blocks
    from a single Philox stream keyed by ``seed``, so the output is a pure
    function of ``(seed, n, t.shape)`` and of the sampled values of ``t``.
    """
    t = _check_tensor3(t)
    if n < 1:
        raise ValueError("n must be >= 1")
    d1, d2, d3 = t.shape
    rng = _rng(seed)
    i1 = rng.integers(0, d1, size=n, dtype=np.int64)
    i2 = rng.integers(0, d2, size=n, dtype=np.int64)
    i3 = rng.integers(0, d3, size=n, dtype=np.int64)
    idx = np.stack([i1, i2, i3], axis=1)
    return ObservationSet(dims=(d1, d2, d3), idx=idx, values=t[i1, i2, i3])


def project_omega(a: np.ndarray, obs: ObservationSet) -> np.ndarray:
    """Evaluate ``a`` at every sampled triple (with multiplicity).

    ``sum(project_omega(a, obs)**2)`` equals the squared Frobenius norm of
    the sampled-entry operator applied to ``a``, duplicates accumulating.
    """
    a = _check_tensor3(a)
    if a.shape != obs.dims:
        raise ValueError(f"dims mismatch: {a.shape} vs {obs.dims}")
    return a[obs.idx[:, 0], obs.idx[:, 1], obs.idx[:, 2]]


def evaluate_tucker_at(
    obs: ObservationSet, x: np.ndarray, y: np.ndarray, z: np.ndarray, core: np.ndarray
) -> np.ndarray:
    """Values of the Tucker product ``(x, y, z) . core`` at the observed
    triples, without materializing the dense tensor."""
    from .kernels import tucker_values

    x, y, z = (np.ascontiguousarray(f, dtype=np.float64) for f in (x, y, z))
    core = np.ascontiguousarray(core, dtype=np.float64)
    if (
        x.shape != (obs.dims[0], core.shape[0])
        or y.shape != (obs.dims[1], core.shape[1])
        or z.shape != (obs.dims[2], core.shape[2])
    ):
        raise ValueError(
            f"factor shapes {x.shape}, {y.shape}, {z.shape} inconsistent with "
            f"dims {obs.dims} and core {core.shape}"
        )
    return tucker_values(
        obs.idx[:, 0], obs.idx[:, 1], obs.idx[:, 2], x, y, z, core
    )
