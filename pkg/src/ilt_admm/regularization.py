"""Discrete TV operators, the binarity penalty, the combined splitting map
Phi(U) = (b1*Dx U, b1*Dy U, b2*U(1-U)), and the soft-threshold operator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import GridError


@dataclass
class SplitTriple:
    """Three same-shaped fields: the two TV difference images and the
    binarity-penalty image. Also holds the Bregman variables d and b."""

    tv_x: np.ndarray
    tv_y: np.ndarray
    pen: np.ndarray

    def __post_init__(self):
        if not (self.tv_x.shape == self.tv_y.shape == self.pen.shape):
            raise GridError("split triple components must share one shape")

    def __add__(self, other: "SplitTriple") -> "SplitTriple":
        return SplitTriple(self.tv_x + other.tv_x,
                           self.tv_y + other.tv_y,
                           self.pen + other.pen)

    def __sub__(self, other: "SplitTriple") -> "SplitTriple":
        return SplitTriple(self.tv_x - other.tv_x,
                           self.tv_y - other.tv_y,
                           self.pen - other.pen)

    def l1(self) -> float:
        return float(np.abs(self.tv_x).sum() + np.abs(self.tv_y).sum()
                     + np.abs(self.pen).sum())

    def sq_norm(self) -> float:
        return float((self.tv_x ** 2).sum() + (self.tv_y ** 2).sum()
                     + (self.pen ** 2).sum())

    @classmethod
    def zeros_like(cls, u: np.ndarray) -> "SplitTriple":
        z = np.zeros_like(u, dtype=float)
        return cls(z.copy(), z.copy(), z.copy())


def diff_forward(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Forward differences along columns (x) and rows (y); the trailing
    column/row is closed with zeros."""
    if u.shape[0] < 2 or u.shape[1] < 2:
        raise GridError("differences need at least a 2x2 grid")
    dx = np.zeros_like(u, dtype=float)
    dy = np.zeros_like(u, dtype=float)
    dx[:, :-1] = u[:, 1:] - u[:, :-1]
    dy[:-1, :] = u[1:, :] - u[:-1, :]
    return dx, dy


def diff_adjoint(yx: np.ndarray, yy: np.ndarray) -> np.ndarray:
    """Adjoint of diff_forward: negative backward differences.

    The trailing column of yx / row of yy is ignored, matching the zero
    closure of the forward operator.
    """
    out = np.zeros_like(yx, dtype=float)
    out[:, 0] -= yx[:, 0]
    out[:, 1:-1] += yx[:, :-2] - yx[:, 1:-1]
    out[:, -1] += yx[:, -2]
    out[0, :] -= yy[0, :]
    out[1:-1, :] += yy[:-2, :] - yy[1:-1, :]
    out[-1, :] += yy[-2, :]
    return out


def tv_norm(u: np.ndarray) -> float:
    """Anisotropic total variation: l1 of both forward-difference fields."""
    dx, dy = diff_forward(u)
    return float(np.abs(dx).sum() + np.abs(dy).sum())


def binarity_penalty(u: np.ndarray) -> float:
    """Sum of |u(1-u)| over pixels; zero exactly on binary grids."""
    return float(np.abs(u * (1.0 - u)).sum())


def phi(u: np.ndarray, beta1: float, beta2: float) -> SplitTriple:
    """The splitting map (b1*Dx U, b1*Dy U, b2*U(1-U))."""
    dx, dy = diff_forward(u)
    return SplitTriple(beta1 * dx, beta1 * dy, beta2 * u * (1.0 - u))


def shrink(x, kappa: float):
    """Soft threshold sgn(x) * max(|x| - kappa, 0), elementwise.

    Accepts an array or a SplitTriple; the same kappa applies to every
    component.
    """
    if kappa < 0:
        raise ValueError("shrink parameter must be nonnegative")
    if isinstance(x, SplitTriple):
        return SplitTriple(shrink(x.tv_x, kappa), shrink(x.tv_y, kappa),
                           shrink(x.pen, kappa))
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(np.abs(x) - kappa, 0.0)
