"""Edge placement error: the pixelwise |printed - target| map and its
l2 norm, the scalar quality measure for a mask."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import optics as _optics
from .grids import as_binary, check_same_shape, l2_norm
from .optics import OpticsConfig, PsfKernel


@dataclass
class EvaluationReport:
    epe: np.ndarray
    error: float
    nonzero_epe_pixels: int


def epe_map(output: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Elementwise |output - target|."""
    output = as_binary(output)
    target = as_binary(target)
    check_same_shape(output, target)
    return np.abs(output - target)


def epe_error(output: np.ndarray, target: np.ndarray) -> float:
    """l2 norm of the EPE map; sqrt(#differing pixels) for binary inputs."""
    return l2_norm(epe_map(output, target))


def evaluate(mask: np.ndarray, target: np.ndarray, optics_cfg: OpticsConfig,
             kernel: PsfKernel | None = None) -> EvaluationReport:
    """Image the mask through the forward chain (convolve, aerial image,
    hard threshold) and compare the printed pattern with the target.

    Evaluation always uses the hard threshold: it is the printed wafer
    pattern, not the sigmoid surrogate used inside the solver.
    """
    if kernel is None:
        kernel = _optics.build_psf(optics_cfg)
    v = _optics.convolve(kernel, np.asarray(mask, dtype=float))
    printed = _optics.image_threshold(_optics.aerial_image(v), optics_cfg.threshold)
    epe = epe_map(printed, target)
    return EvaluationReport(
        epe=epe,
        error=l2_norm(epe),
        nonzero_epe_pixels=int(np.count_nonzero(epe)),
    )
