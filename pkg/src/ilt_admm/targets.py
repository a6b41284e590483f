"""Bundled target-pattern generators: rectangles, strips, and a mixed
layout. These reproduce the experiment families as parameterized code;
they are approximations of the published figures, not pixel-exact copies.

Feature pitches are kept above the coherent resolution limit of the
production optics (lambda/NA = 227nm, about 45 pixels at 5nm), so every
bundled pattern is printable: separations below that pitch cannot be
resolved by any mask, since the corresponding spatial frequencies fall
outside the pupil.
"""

from __future__ import annotations

import numpy as np


def rectangles(n: int = 144, rows: int = 1, cols: int = 2,
               width: int = 20, height: int = 140) -> np.ndarray:
    """rows x cols lattice of width x height rectangles centered in equal
    cells of an n x n field."""
    if n <= 0 or rows <= 0 or cols <= 0:
        raise ValueError("pattern dimensions must be positive")
    if width > n // cols or height > n // rows:
        raise ValueError("rectangles do not fit their cells")
    out = np.zeros((n, n))
    for r in range(rows):
        for c in range(cols):
            ci = int((r + 0.5) * n / rows)
            cj = int((c + 0.5) * n / cols)
            i0, j0 = ci - height // 2, cj - width // 2
            out[i0:i0 + height, j0:j0 + width] = 1.0
    return out


def ten_rectangles(n: int = 144, width: int = 20, margin: int = 2,
                   rows: int = 5, cols: int = 2) -> np.ndarray:
    """The ten-rectangle target: two columns of five vertically abutting
    rectangles, forming two long bars.

    The columns sit half a field apart (resolvable); the rectangles within
    a column share edges, so the union prints as a continuous bar whose
    width bias and line-end rounding are what optimization corrects.
    """
    if width <= 0 or margin < 0:
        raise ValueError("pattern dimensions must be positive")
    if 2 * margin >= n or width > n // cols:
        raise ValueError("rectangles do not fit the field")
    out = np.zeros((n, n))
    span = n - 2 * margin
    edges = [margin + round(r * span / rows) for r in range(rows + 1)]
    for c in range(cols):
        cj = int((c + 0.5) * n / cols)
        j0 = cj - width // 2
        for r in range(rows):
            out[edges[r]:edges[r + 1], j0:j0 + width] = 1.0
    return out


def strips(n: int = 144, count: int = 3, width: int = 16,
           margin: int = 16) -> np.ndarray:
    """count long vertical strips of the given width, spanning the field
    height minus the margin."""
    if count <= 0 or width <= 0:
        raise ValueError("strip dimensions must be positive")
    if count * width > n:
        raise ValueError("strips do not fit")
    out = np.zeros((n, n))
    for c in range(count):
        cj = int((c + 0.5) * n / count)
        j0 = cj - width // 2
        out[margin:n - margin, j0:j0 + width] = 1.0
    return out


def mixed(n: int = 144) -> np.ndarray:
    """Two squares on the left half, one long strip on the right half."""
    out = np.zeros((n, n))
    s = 32
    for ci in (int(0.25 * n), int(0.75 * n)):
        cj = n // 4
        out[ci - s // 2:ci + s // 2, cj - s // 2:cj + s // 2] = 1.0
    j0 = 3 * n // 4 - 10
    out[8:n - 8, j0:j0 + 20] = 1.0
    return out


GENERATORS = {
    "ten_rectangles": ten_rectangles,
    "strips": strips,
    "mixed": mixed,
}
