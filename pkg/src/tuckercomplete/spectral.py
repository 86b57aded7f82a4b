"""Second-moment spectral initialization of the factor subspaces.

For each mode the sampled entries define sparse one-hot matrices
``x_i = (d1 d2 d3) * unfolding of the single-entry tensor at sample i``.
The symmetric pairwise statistic

    nhat = (1 / (n (n - 1))) * sum_{i < j} (x_i x_j^T + x_j x_i^T)

is an unbiased estimate of ``m m^T`` where ``m`` is the mode unfolding of
the underlying tensor, and its top eigenspace estimates the corresponding
factor subspace.  It is computed through the algebraic rearrangement

    sum_{i != j} x_i x_j^T = s s^T - sum_i x_i x_i^T,   s = sum_i x_i,

where ``s`` is sparse with at most n nonzeros and each ``x_i x_i^T`` is a
single diagonal contribution, so nothing dense of the unfolding's width is
ever formed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .grassmann import TripleFrame, trim
from .observations import ObservationSet


@dataclass(frozen=True)
class SecondMomentEstimate:
    """Symmetric dk x dk estimate of the mode unfolding's second moment."""

    mode: int
    matrix: np.ndarray
    n: int


def _mode_rows_cols(obs: ObservationSet, mode: int) -> tuple[np.ndarray, np.ndarray, int, int]:
    d1, d2, d3 = obs.dims
    i1, i2, i3 = obs.idx[:, 0], obs.idx[:, 1], obs.idx[:, 2]
    if mode == 1:
        return i1, i2 * d3 + i3, d1, d2 * d3
    if mode == 2:
        return i2, i1 * d3 + i3, d2, d1 * d3
    if mode == 3:
        return i3, i1 * d2 + i2, d3, d1 * d2
    raise ValueError(f"mode must be 1, 2 or 3, got {mode!r}")


def second_moment_estimate(obs: ObservationSet, mode: int) -> SecondMomentEstimate:
    """Pairwise second-moment estimate for one mode.

    Cost is O(n) accumulation plus a sparse Gram product; duplicates among
    the samples contribute with multiplicity, exactly as in the literal
    pair sum over i < j.
    """
    if obs.n < 2:
        raise ValueError("need at least two observations")
    rows, cols, dk, other = _mode_rows_cols(obs, mode)
    scale = float(np.prod(obs.dims))
    v = scale * obs.values

    s = sp.coo_matrix((v, (rows, cols)), shape=(dk, other)).tocsr()
    gram = (s @ s.T).toarray()
    diag = np.zeros(dk)
    np.add.at(diag, rows, v * v)
    nhat = (gram - np.diag(diag)) / (obs.n * (obs.n - 1))
    nhat = 0.5 * (nhat + nhat.T)
    return SecondMomentEstimate(mode=mode, matrix=nhat, n=obs.n)


def top_eigenspace(est: SecondMomentEstimate, r: int) -> np.ndarray:
    """Orthonormal frame spanning the eigenvectors of the ``r``
    algebraically largest eigenvalues.

    On (near-)degenerate spectra any orthonormal basis of the invariant
    subspace may be returned; compare results via subspace distance, not
    entrywise.
    """
    dk = est.matrix.shape[0]
    if not 1 <= r <= dk:
        raise ValueError(f"rank {r} out of range for dimension {dk}")
    w, vecs = np.linalg.eigh(est.matrix)
    return np.ascontiguousarray(vecs[:, ::-1][:, :r])


def largest_eigenvalue(est: SecondMomentEstimate) -> float:
    return float(np.linalg.eigvalsh(est.matrix)[-1])


def initialize(
    obs: ObservationSet, ranks: tuple[int, int, int], mu0: float
) -> TripleFrame:
    """Spectral initialization: per-mode second-moment estimate, top-r
    eigenspace, then incoherence trimming at level ``mu0``.

    Every returned frame has coherence at most ``3 * mu0``.
    """
    if any(r < 1 for r in ranks):
        raise ValueError("ranks must be >= 1")
    frames = []
    for mode, r in zip((1, 2, 3), ranks):
        est = second_moment_estimate(obs, mode)
        frames.append(trim(top_eigenspace(est, r), mu0))
    return TripleFrame(*frames)
