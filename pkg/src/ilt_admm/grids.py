"""Square pixel-grid primitives shared by every other module.

Grids are plain numpy arrays of shape (n, n); the helpers here validate
shapes, move between flat (row-major) and square views, and provide the
handful of elementwise/reduction primitives the solver needs.
"""

from __future__ import annotations

import numpy as np


class GridError(ValueError):
    """Raised for malformed grids: wrong size, non-square, non-finite."""


def as_grid(values, *, complex_ok: bool = False) -> np.ndarray:
    """Validate a square 2-D grid and return it as a float or complex array.

    Raises GridError on non-square shape or non-finite entries.
    """
    a = np.asarray(values)
    if complex_ok:
        a = a.astype(complex) if not np.iscomplexobj(a) else a
    else:
        if np.iscomplexobj(a):
            raise GridError("expected a real grid, got complex data")
        a = a.astype(float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise GridError(f"grid must be square 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise GridError("grid contains non-finite values")
    return a


def grid_from_flat(values, *, complex_ok: bool = False) -> np.ndarray:
    """Reshape a row-major flat vector of length n*n into an (n, n) grid."""
    v = np.asarray(values).ravel()
    n = int(round(np.sqrt(v.size)))
    if n * n != v.size or v.size == 0:
        raise GridError(f"flat length {v.size} is not a positive square")
    return as_grid(v.reshape(n, n), complex_ok=complex_ok)


def as_binary(values) -> np.ndarray:
    """Validate a grid whose every entry is exactly 0 or 1."""
    a = as_grid(values)
    if not np.all((a == 0.0) | (a == 1.0)):
        raise GridError("pattern is not binary (values outside {0, 1})")
    return a


def check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise GridError(f"dimension mismatch: {a.shape} vs {b.shape}")


def project_box(u: np.ndarray) -> np.ndarray:
    """Clamp every entry to [0, 1]."""
    return np.clip(u, 0.0, 1.0)


def l1_norm(x: np.ndarray) -> float:
    return float(np.sum(np.abs(x)))


def l2_norm(x: np.ndarray) -> float:
    return float(np.linalg.norm(x.ravel()))


def inner(a: np.ndarray, b: np.ndarray) -> float:
    """Real part of the Hermitian inner product <a, b>."""
    check_same_shape(a, b)
    return float(np.real(np.vdot(a, b)))
