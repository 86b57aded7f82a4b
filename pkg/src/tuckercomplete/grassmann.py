"""Grassmannian geometry on orthonormal frames.

A subspace is represented by a d x r matrix with orthonormal columns (a
Stiefel representative); all operations here are invariant under right
multiplication by r x r orthogonal matrices, i.e. they are well defined on
the Grassmannian.  Tangent directions at a frame ``x`` are d x r matrices
``dvec`` with ``x.T @ dvec = 0``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

ORTHO_TOL = 1e-10
_DRIFT_TOL = 1e-12


class TripleFrame(NamedTuple):
    """A point on the product of three Grassmannians."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray


def orthonormality_defect(x: np.ndarray) -> float:
    """max-norm of ``x.T x - I``."""
    r = x.shape[1]
    return float(np.max(np.abs(x.T @ x - np.eye(r)))) if r else 0.0


def check_frame(x: np.ndarray, name: str = "frame") -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < x.shape[1] or x.shape[1] < 1:
        raise ValueError(f"{name} must be d x r with 1 <= r <= d, got {x.shape}")
    if orthonormality_defect(x) > ORTHO_TOL:
        raise ValueError(f"{name} columns are not orthonormal")
    return x


def orthonormalize(x: np.ndarray) -> np.ndarray:
    """Thin-QR orthonormalization of the columns of ``x``."""
    q, _ = np.linalg.qr(np.asarray(x, dtype=np.float64))
    return q


def reorthonormalize_if_drifted(x: np.ndarray) -> np.ndarray:
    """QR-polish a frame whose orthonormality drifted past 1e-12."""
    return orthonormalize(x) if orthonormality_defect(x) > _DRIFT_TOL else x


def random_frame(d: int, r: int, rng: np.random.Generator) -> np.ndarray:
    return orthonormalize(rng.standard_normal((d, r)))


def coherence(x: np.ndarray) -> float:
    """(d/r) times the largest squared row norm.

    For an orthonormal frame the squared row norm equals the squared norm of
    the projection of the corresponding basis vector onto the column span,
    so this is the usual subspace coherence, lying in [1, d/r].
    """
    d, r = x.shape
    return float(d / r * np.max(np.einsum("ij,ij->i", x, x)))


def proj_distance(x: np.ndarray, u: np.ndarray) -> float:
    """Projection distance between the column spans of two frames.

    Equals ``norm(u u^T - x x^T, 'fro') / sqrt(2)``; computed as
    ``norm(x - u (u^T x))`` (the Frobenius norm of the principal-angle
    sines), which is O(d r^2) and stays accurate near zero distance.
    """
    if x.shape != u.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {u.shape}")
    if x is u:
        return 0.0
    return float(np.linalg.norm(x - u @ (u.T @ x)))


def triple_distance(p: TripleFrame, q: TripleFrame) -> float:
    """Sum of the three componentwise projection distances."""
    return (
        proj_distance(p.x, q.x)
        + proj_distance(p.y, q.y)
        + proj_distance(p.z, q.z)
    )


def tangent_project(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Project ``g`` onto the horizontal space at ``x``: ``g - x (x^T g)``."""
    g = np.asarray(g, dtype=np.float64)
    if g.shape != x.shape:
        raise ValueError(f"shape mismatch: {g.shape} vs {x.shape}")
    return g - x @ (x.T @ g)


def geodesic(x: np.ndarray, dvec: np.ndarray, t: float) -> np.ndarray:
    """Point reached after time ``t`` along the geodesic from ``x`` with
    initial velocity ``dvec``.

    With the thin SVD ``dvec = l @ diag(s) @ rt``, the geodesic is
    ``x @ rt.T @ cos(s t) @ rt + l @ sin(s t) @ rt``.  Singular values below
    1e-14 are treated as exactly zero (identity on that subspace).
    """
    if dvec.shape != x.shape:
        raise ValueError(f"shape mismatch: {dvec.shape} vs {x.shape}")
    l, s, rt = np.linalg.svd(dvec, full_matrices=False)
    s = np.where(s < 1e-14, 0.0, s)
    cos_t = np.cos(s * t)
    sin_t = np.sin(s * t)
    out = x @ (rt.T * cos_t) @ rt + (l * sin_t) @ rt
    return reorthonormalize_if_drifted(out)


def _spread_frame(d: int, r: int) -> np.ndarray:
    # first r columns of the orthonormal DCT-II basis; every squared row
    # norm is < 2r/d, hence coherence < 2
    i = np.arange(d)[:, None]
    k = np.arange(r)[None, :]
    b = np.cos(np.pi * (2 * i + 1) * k / (2 * d)) * np.sqrt(2.0 / d)
    b[:, 0] = np.sqrt(1.0 / d)
    return b


def trim(x: np.ndarray, mu0: float) -> np.ndarray:
    """Force the frame's coherence below ``3 * mu0`` while moving its span
    as little as possible.

    A frame that already satisfies the bound is returned unchanged.
    Otherwise rows with squared norm above ``2 mu0 r / d`` are scaled down
    to that cap and the columns re-orthonormalized by thin QR, up to three
    passes.  If clipping alone cannot reach the bound (e.g. a rank-1 frame
    concentrated on one coordinate, which QR simply renormalizes), the
    clipped frame is blended with a maximally spread orthonormal frame at
    decreasing weights until the bound holds; the final blend weight 0
    gives the spread frame itself, so the procedure always terminates with
    coherence <= 3 mu0.
    """
    if mu0 < 1:
        raise ValueError("mu0 must be >= 1")
    x = check_frame(x)
    bound = 3.0 * mu0
    if coherence(x) <= bound:
        return x

    d, r = x.shape
    cap = 2.0 * mu0 * r / d

    def clip_rows(f):
        sq = np.einsum("ij,ij->i", f, f)
        scale = np.where(sq > cap, np.sqrt(cap / np.maximum(sq, 1e-300)), 1.0)
        return f * scale[:, None]

    cur = x
    for _ in range(3):
        cur = orthonormalize(clip_rows(cur))
        if coherence(cur) <= bound:
            return cur

    spread = _spread_frame(d, r)
    clipped = clip_rows(x)
    for w in (0.75, 0.5, 0.25, 0.0):
        cand = orthonormalize(w * clipped + (1.0 - w) * spread)
        if coherence(cand) <= bound:
            return cand
    return spread  # unreachable: w = 0 gives the spread frame
