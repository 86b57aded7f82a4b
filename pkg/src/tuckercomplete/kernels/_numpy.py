"""Pure-numpy implementations of the per-observation hot kernels.

Reference semantics for the numba backend; also the fallback when numba is
unavailable or disabled via ``TUCKERCOMPLETE_BACKEND=numpy``.
"""

from __future__ import annotations

import numpy as np


def tucker_values(i1, i2, i3, x, y, z, core):
    """values[t] = sum_j core[j1,j2,j3] x[i1[t],j1] y[i2[t],j2] z[i3[t],j3]"""
    return np.einsum(
        "tj,tk,tl,jkl->t", x[i1], y[i2], z[i3], core, optimize=True
    )


def design_matrix(i1, i2, i3, x, y, z):
    # row t = x[i1[t]] (x) y[i2[t]] (x) z[i3[t]], flattened j3-fastest
    n = i1.shape[0]
    e = (
        x[i1][:, :, None, None]
        * y[i2][:, None, :, None]
        * z[i3][:, None, None, :]
    )
    return e.reshape(n, -1)


def normal_system(i1, i2, i3, vals, x, y, z):
    """Normal matrix ``sum_t v_t v_t^T`` and moment vector ``sum_t vals[t] v_t``
    for the least-squares core fit, where v_t is the design row at sample t."""
    e = design_matrix(i1, i2, i3, x, y, z)
    return e.T @ e, e.T @ vals


def scatter_products(i1, i2, i3, res, x, y, z):
    """Accumulate residual-weighted Kronecker rows for the three data
    gradients.

    Returns (p1, p2, p3) with
      p1[a] = sum_{t: i1[t]=a} res[t] * (y[i2[t]] (x) z[i3[t]]),
    and the mode-2/3 analogues; shapes (d1, r2*r3), (d2, r1*r3), (d3, r1*r2).
    """
    n = i1.shape[0]
    d1, r1 = x.shape
    d2, r2 = y.shape
    d3, r3 = z.shape
    xr, yr, zr = x[i1], y[i2], z[i3]
    p1 = np.zeros((d1, r2 * r3))
    p2 = np.zeros((d2, r1 * r3))
    p3 = np.zeros((d3, r1 * r2))
    np.add.at(p1, i1, (res[:, None, None] * yr[:, :, None] * zr[:, None, :]).reshape(n, -1))
    np.add.at(p2, i2, (res[:, None, None] * xr[:, :, None] * zr[:, None, :]).reshape(n, -1))
    np.add.at(p3, i3, (res[:, None, None] * xr[:, :, None] * yr[:, None, :]).reshape(n, -1))
    return p1, p2, p3
