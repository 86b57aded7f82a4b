"""Dense order-3 tensor algebra: unfoldings, Tucker products, norms, ranks.

Tensors are plain ``numpy.ndarray`` objects of shape ``(d1, d2, d3)`` stored
in C order, so the last index varies fastest in memory.  The mode-k unfolding
conventions are fixed once here and relied on everywhere else:

* mode 1: row ``i1``, column ``i2*d3 + i3``
* mode 2: row ``i2``, column ``i1*d3 + i3``
* mode 3: row ``i3``, column ``i1*d2 + i2``

(all 0-based).  With these conventions the unfolding of a Tucker product
``(X, Y, Z) . C`` factors as ``X @ unfold(C,1) @ kron(Y, Z).T`` and the
mode-2/3 analogues, which the gradient computations exploit.
"""

from __future__ import annotations

import numpy as np

_MODES = (1, 2, 3)


def _check_tensor3(a: np.ndarray, name: str = "tensor") -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 3:
        raise ValueError(f"{name} must be a 3-way array, got ndim={a.ndim}")
    return a


def unfold(a: np.ndarray, mode: int) -> np.ndarray:
    """Return the mode-``mode`` unfolding of a 3-way array.

    Parameters
    ----------
    a : ndarray, shape (d1, d2, d3)
    mode : int
        One of 1, 2, 3.

    Returns
    -------
    ndarray of shape ``(d_mode, d1*d2*d3 / d_mode)`` under the module's
    fixed column conventions.
    """
    a = _check_tensor3(a)
    d1, d2, d3 = a.shape
    if mode == 1:
        return a.reshape(d1, d2 * d3)
    if mode == 2:
        return a.transpose(1, 0, 2).reshape(d2, d1 * d3)
    if mode == 3:
        return a.transpose(2, 0, 1).reshape(d3, d1 * d2)
    raise ValueError(f"mode must be 1, 2 or 3, got {mode!r}")


def refold(m: np.ndarray, mode: int, dims: tuple[int, int, int]) -> np.ndarray:
    """Inverse of :func:`unfold`: rebuild the (d1, d2, d3) array from its
    mode-``mode`` unfolding."""
    m = np.asarray(m, dtype=np.float64)
    d1, d2, d3 = dims
    if m.ndim != 2:
        raise ValueError(f"unfolded matrix must be 2-D, got ndim={m.ndim}")
    expected = {1: (d1, d2 * d3), 2: (d2, d1 * d3), 3: (d3, d1 * d2)}
    if mode not in _MODES:
        raise ValueError(f"mode must be 1, 2 or 3, got {mode!r}")
    if m.shape != expected[mode]:
        raise ValueError(
            f"mode-{mode} unfolding of dims {dims} must have shape "
            f"{expected[mode]}, got {m.shape}"
        )
    if mode == 1:
        return m.reshape(d1, d2, d3)
    if mode == 2:
        return m.reshape(d2, d1, d3).transpose(1, 0, 2)
    return m.reshape(d3, d1, d2).transpose(1, 2, 0)


def multilinear_product(
    core: np.ndarray, x: np.ndarray, y: np.ndarray, z: np.ndarray
) -> np.ndarray:
    """Tucker (trilinear) product: contract ``core`` with factor matrices.

    ``out[i1,i2,i3] = sum_j core[j1,j2,j3] * x[i1,j1] * y[i2,j2] * z[i3,j3]``

    Parameters
    ----------
    core : ndarray, shape (r1, r2, r3)
    x, y, z : ndarrays of shapes (d1, r1), (d2, r2), (d3, r3)
    """
    core = _check_tensor3(core, "core")
    x, y, z = (np.asarray(f, dtype=np.float64) for f in (x, y, z))
    for f, axis, nm in ((x, 0, "x"), (y, 1, "y"), (z, 2, "z")):
        if f.ndim != 2 or f.shape[1] != core.shape[axis]:
            raise ValueError(
                f"factor {nm} of shape {f.shape} does not match core mode "
                f"{axis + 1} size {core.shape[axis]}"
            )
    out = np.tensordot(x, core, axes=(1, 0))        # (d1, r2, r3)
    out = np.tensordot(out, y, axes=(1, 1))         # (d1, r3, d2)
    out = np.tensordot(out, z, axes=(1, 1))         # (d1, d2, d3)
    return out


def inner(a: np.ndarray, b: np.ndarray) -> float:
    """Entrywise (vector-space) inner product of two equally shaped tensors."""
    a = _check_tensor3(a, "a")
    b = _check_tensor3(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.dot(a.ravel(), b.ravel()))


def norm(a: np.ndarray, kind: str = "frobenius") -> float:
    """Frobenius or entrywise-max norm of a 3-way array."""
    a = _check_tensor3(a)
    if kind == "frobenius":
        return float(np.linalg.norm(a.ravel()))
    if kind == "max":
        return float(np.max(np.abs(a))) if a.size else 0.0
    raise ValueError(f"kind must be 'frobenius' or 'max', got {kind!r}")


def _rank_one_value(a: np.ndarray, u: np.ndarray, v: np.ndarray, w: np.ndarray) -> float:
    return float(np.einsum("ijk,i,j,k->", a, u, v, w))


def _als_polish(a, u, v, w, sweeps):
    # alternating updates; each sweep is nondecreasing in <a, u (x) v (x) w>
    val = _rank_one_value(a, u, v, w)
    for _ in range(sweeps):
        cu = np.einsum("ijk,j,k->i", a, v, w)
        nu = np.linalg.norm(cu)
        if nu > 0:
            u = cu / nu
        cv = np.einsum("ijk,i,k->j", a, u, w)
        nv = np.linalg.norm(cv)
        if nv > 0:
            v = cv / nv
        cw = np.einsum("ijk,i,j->k", a, u, v)
        nw = np.linalg.norm(cw)
        if nw > 0:
            w = cw / nw
        new = nw if nw > 0 else _rank_one_value(a, u, v, w)
        if new - val <= 1e-15 * max(abs(val), 1.0):
            val = max(val, new)
            break
        val = new
    return val


def spectral_lower_bound(
    a: np.ndarray, sweeps: int = 50, seed: int = 0, restarts: int = 8
) -> float:
    """Certified lower bound on the tensor spectral norm.

    Runs alternating power iteration for the best rank-one alignment
    ``max <a, u (x) v (x) w>`` over unit vectors.  Starts include every
    canonical basis triple attaining the entrywise max (capped at 256), so
    the result is always >= ``norm(a, 'max')``, plus ``restarts`` seeded
    random starts.  Each start is a feasible probe, so the result is always
    <= the true spectral norm; equality holds for orthogonally decomposable
    tensors in practice.
    """
    a = _check_tensor3(a)
    if sweeps < 1:
        raise ValueError("sweeps must be >= 1")
    amax = norm(a, "max")
    if amax == 0.0:
        return 0.0
    d1, d2, d3 = a.shape

    best = 0.0
    hits = np.argwhere(np.abs(a) == amax)[:256]
    for (i, j, k) in hits:
        u = np.zeros(d1)
        v = np.zeros(d2)
        w = np.zeros(d3)
        u[i] = 1.0 if a[i, j, k] > 0 else -1.0
        v[j] = 1.0
        w[k] = 1.0
        best = max(best, _als_polish(a, u, v, w, sweeps))

    rng = np.random.Generator(np.random.Philox(seed))
    for _ in range(restarts):
        u = rng.standard_normal(d1)
        v = rng.standard_normal(d2)
        w = rng.standard_normal(d3)
        u /= np.linalg.norm(u)
        v /= np.linalg.norm(v)
        w /= np.linalg.norm(w)
        best = max(best, _als_polish(a, u, v, w, sweeps))
    return best


def multilinear_ranks(a: np.ndarray, tol: float = 1e-10) -> tuple[int, int, int]:
    """Ranks of the three unfoldings, counting singular values above
    ``tol`` times the largest."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = _check_tensor3(a)
    ranks = []
    for mode in _MODES:
        s = np.linalg.svd(unfold(a, mode), compute_uv=False)
        smax = s[0] if s.size else 0.0
        ranks.append(int(np.sum(s > tol * smax)))
    return tuple(ranks)


def condition_number(a: np.ndarray, tol: float = 1e-10) -> float:
    """Largest over smallest nonzero unfolding singular value, across modes."""
    a = _check_tensor3(a)
    hi = 0.0
    lo = np.inf
    for mode in _MODES:
        s = np.linalg.svd(unfold(a, mode), compute_uv=False)
        smax = s[0] if s.size else 0.0
        nz = s[s > tol * smax]
        if nz.size == 0:
            return np.inf
        hi = max(hi, nz[0])
        lo = min(lo, nz[-1])
    return float(hi / lo)
