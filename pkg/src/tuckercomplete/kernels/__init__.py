"""Backend dispatch for the per-observation hot kernels.

Two interchangeable implementations exist: numba-compiled loops
(``_numba``) and pure numpy (``_numpy``).  The default is numba when it
imports cleanly.  Selection is controlled by the environment variable
``TUCKERCOMPLETE_BACKEND``:

* unset or ``auto`` -- numba if available, else numpy;
* ``numba``         -- require numba, fail loudly if missing;
* ``numpy``         -- force the pure-numpy path.

``use_backend()`` switches at runtime (used by the benchmark and tests).
"""

from __future__ import annotations

import os

from . import _numpy

_BACKENDS = {"numpy": _numpy}
_numba_error = None
try:
    from . import _numba

    _BACKENDS["numba"] = _numba
except ImportError as exc:  # pragma: no cover - depends on environment
    _numba_error = exc


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def use_backend(name: str) -> None:
    """Route all kernel calls through the named backend."""
    global _impl, _active
    if name not in _BACKENDS:
        if name == "numba" and _numba_error is not None:
            raise RuntimeError(f"numba backend unavailable: {_numba_error}")
        raise ValueError(f"unknown backend {name!r}; have {available_backends()}")
    _impl = _BACKENDS[name]
    _active = name


def active_backend() -> str:
    return _active


def _default_backend() -> str:
    want = os.environ.get("TUCKERCOMPLETE_BACKEND", "auto").strip().lower()
    if want in ("", "auto"):
        return "numba" if "numba" in _BACKENDS else "numpy"
    if want not in ("numba", "numpy"):
        raise ValueError(
            f"TUCKERCOMPLETE_BACKEND must be 'numba', 'numpy' or 'auto', got {want!r}"
        )
    return want


_impl = None
_active = ""
use_backend(_default_backend())


def tucker_values(i1, i2, i3, x, y, z, core):
    return _impl.tucker_values(i1, i2, i3, x, y, z, core)


def design_matrix(i1, i2, i3, x, y, z):
    return _impl.design_matrix(i1, i2, i3, x, y, z)


def normal_system(i1, i2, i3, vals, x, y, z):
    return _impl.normal_system(i1, i2, i3, vals, x, y, z)


def scatter_products(i1, i2, i3, res, x, y, z):
    return _impl.scatter_products(i1, i2, i3, res, x, y, z)
