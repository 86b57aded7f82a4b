"""Numba-compiled hot kernels.

Same signatures and semantics as ``_numpy``; plain loops over observations,
no temporaries of size n x r1*r2*r3.  ``cache=True`` persists the compiled
code on disk so repeated runs (and worker processes) skip recompilation.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def tucker_values(i1, i2, i3, x, y, z, core):
    n = i1.shape[0]
    r1, r2, r3 = core.shape
    out = np.empty(n)
    for t in range(n):
        a = i1[t]
        b = i2[t]
        c = i3[t]
        acc = 0.0
        for j1 in range(r1):
            xv = x[a, j1]
            for j2 in range(r2):
                xy = xv * y[b, j2]
                for j3 in range(r3):
                    acc += xy * z[c, j3] * core[j1, j2, j3]
        out[t] = acc
    return out


@njit(cache=True)
def design_matrix(i1, i2, i3, x, y, z):
    n = i1.shape[0]
    r1 = x.shape[1]
    r2 = y.shape[1]
    r3 = z.shape[1]
    e = np.empty((n, r1 * r2 * r3))
    for t in range(n):
        a = i1[t]
        b = i2[t]
        c = i3[t]
        p = 0
        for j1 in range(r1):
            xv = x[a, j1]
            for j2 in range(r2):
                xy = xv * y[b, j2]
                for j3 in range(r3):
                    e[t, p] = xy * z[c, j3]
                    p += 1
    return e


def normal_system(i1, i2, i3, vals, x, y, z):
    # assemble the design rows in compiled code, leave the Gram product to
    # BLAS (faster than a hand-rolled triangle update for r1*r2*r3 >= ~8)
    e = design_matrix(i1, i2, i3, x, y, z)
    return e.T @ e, e.T @ vals


@njit(cache=True)
def scatter_products(i1, i2, i3, res, x, y, z):
    n = i1.shape[0]
    d1, r1 = x.shape
    d2, r2 = y.shape
    d3, r3 = z.shape
    p1 = np.zeros((d1, r2 * r3))
    p2 = np.zeros((d2, r1 * r3))
    p3 = np.zeros((d3, r1 * r2))
    for t in range(n):
        a = i1[t]
        b = i2[t]
        c = i3[t]
        rv = res[t]
        p = 0
        for j2 in range(r2):
            yv = rv * y[b, j2]
            for j3 in range(r3):
                p1[a, p] += yv * z[c, j3]
                p += 1
        p = 0
        for j1 in range(r1):
            xv = rv * x[a, j1]
            for j3 in range(r3):
                p2[b, p] += xv * z[c, j3]
                p += 1
        p = 0
        for j1 in range(r1):
            xv = rv * x[a, j1]
            for j2 in range(r2):
                p3[c, p] += xv * y[b, j2]
                p += 1
    return p1, p2, p3
