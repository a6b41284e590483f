"""Independent brute-force oracles for the test suite and the `derive`
subcommand. Deliberately slow and simple: double-loop convolution, dense
1-D search for the V-update, central-difference gradients, and a power
series Bessel J1. Nothing here imports solver internals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass
class OracleResult:
    argmin: complex
    min_value: float
    evaluations: int


def convolve_naive(kernel: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Direct double-sum zero-padded linear convolution, central n x n crop.

    Capped at n <= 32: this is reference semantics, not production code.
    """
    u = np.asarray(u)
    kernel = np.asarray(kernel, dtype=complex)
    n = u.shape[0]
    if n > 32:
        raise ValueError("naive convolution capped at 32x32 inputs")
    k = kernel.shape[0]
    full = np.zeros((n + k - 1, n + k - 1), dtype=complex)
    for i in range(n):
        for j in range(n):
            if u[i, j] != 0:
                full[i:i + k, j:j + k] += u[i, j] * kernel
    s = (k - 1) // 2
    return full[s:s + n, s:s + n]


def _v_cost(v: complex, w: complex, target: float, rho: float, tr: float) -> float:
    t = 1.0 if abs(v) ** 2 >= tr else 0.0
    return (t - target) ** 2 + 0.5 * rho * abs(v - w) ** 2


def v_oracle(w: complex, target: float, rho: float, tr: float,
             points: int = 100_000, full_2d: bool = False) -> OracleResult:
    """Brute-force minimizer of the per-pixel V-update cost.

    The cost depends on V only through |V| and |V - W|, so the optimum lies
    on the ray through W; we search the magnitude densely and add the
    analytic candidates |W|, sqrt(tr), and sqrt(tr) - 1e-9 (the infimum
    side for target 0). full_2d=True instead scans a 200x200 grid of the
    complex plane, validating the ray reduction itself.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    w = complex(w)
    root = np.sqrt(tr)
    phase = w / abs(w) if abs(w) > 0 else 1.0 + 0.0j

    if full_2d:
        lim = abs(w) + 2.0 * root
        xs = np.linspace(-lim, lim, 200)
        best, best_v, count = np.inf, 0j, 0
        for x in xs:
            for y in xs:
                v = complex(x, y)
                c = _v_cost(v, w, target, rho, tr)
                count += 1
                if c < best:
                    best, best_v = c, v
        return OracleResult(argmin=best_v, min_value=best, evaluations=count)

    mags = np.linspace(0.0, abs(w) + 2.0 * root, points)
    candidates = np.concatenate([mags, [abs(w), root, root - 1e-9]])
    best, best_m = np.inf, 0.0
    for m in candidates:
        if m < 0:
            continue
        c = _v_cost(m * phase, w, target, rho, tr)
        if c < best:
            best, best_m = c, m
    return OracleResult(argmin=best_m * phase, min_value=best,
                        evaluations=len(candidates))


def v_oracle_min_batch(w: np.ndarray, target: np.ndarray, rho: np.ndarray,
                       tr: float, points: int = 2000) -> np.ndarray:
    """Vectorized dense-search minimum of the per-pixel V-update cost for
    many (W, I, rho) cases at once; same ray reduction as v_oracle with a
    coarser magnitude grid plus the analytic candidates."""
    w = np.asarray(w, dtype=complex).ravel()
    target = np.asarray(target, dtype=float).ravel()
    rho = np.asarray(rho, dtype=float).ravel()
    absw = np.abs(w)
    root = np.sqrt(tr)
    # dense magnitudes per case, then the analytic candidates appended
    frac = np.linspace(0.0, 1.0, points)
    mags = np.outer(absw + 2.0 * root, frac)
    extra = np.stack([absw,
                      np.full_like(absw, root),
                      np.full_like(absw, root - 1e-9),
                      np.full_like(absw, root + 1e-9)], axis=1)
    mags = np.concatenate([mags, extra], axis=1)
    misfit = ((mags ** 2 >= tr).astype(float) - target[:, None]) ** 2
    cost = misfit + 0.5 * rho[:, None] * (mags - absw[:, None]) ** 2
    return cost.min(axis=1)


def fd_gradient(f: Callable[[np.ndarray], float], u: np.ndarray,
                h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of a scalar field, one coordinate at a
    time. For complex grids the real and imaginary parts are separate
    coordinates and the result is returned as a complex grid.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    u = np.asarray(u)
    if np.iscomplexobj(u):
        directions = (1.0, 1.0j)
        out = np.zeros(u.shape, dtype=complex)
    else:
        directions = (1.0,)
        out = np.zeros(u.shape, dtype=float)
    for idx in np.ndindex(u.shape):
        for direction in directions:
            e = np.zeros(u.shape, dtype=out.dtype)
            e[idx] = direction * h
            out[idx] += direction * (f(u + e) - f(u - e)) / (2.0 * h)
    return out


def bessel_j1(x: float) -> float:
    """J1 by its power series, terms added until the ratio drops below 1e-16.

    Only used to cross-check the PSF radial profile; capped at |x| < 50
    where the series is still well conditioned in double precision.
    """
    if abs(x) >= 50:
        raise ValueError("series evaluation capped at |x| < 50")
    half = x / 2.0
    term = half
    total = term
    k = 0
    while True:
        k += 1
        term *= -(half * half) / (k * (k + 1))
        total += term
        if abs(term) <= 1e-16 * max(abs(total), 1e-300):
            return float(total)
