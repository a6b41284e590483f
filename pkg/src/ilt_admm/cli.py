"""Command-line interface.

Subcommands: psf (dump the kernel), simulate (forward imaging chain),
optimize (full ADMM run), evaluate (EPE metrics for a given mask),
derive (print oracle reference values), sweep (parameter / kernel-noise
grid, one history CSV per cell).

Parameter precedence: command-line flags > config file > built-in
defaults. Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import oracles, targets
from .grids import l2_norm
from .metrics import evaluate
from .optics import OpticsConfig, PsfKernel, aerial_image, build_psf, convolve, image_threshold
from .pgmio import (PatternFormatError, load_config, load_mask, load_pattern,
                    save_grid, write_history)
from .solver import (SolverConfig, admm_optimize, check_rho_condition,
                     estimate_lipschitz, lagrangian_trace_check)

_OPTICS_FIELDS = {f.name: f.type for f in dataclasses.fields(OpticsConfig)}
_SOLVER_FIELDS = {f.name: f.type for f in dataclasses.fields(SolverConfig)}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 1 for usage errors
        raise _UsageError(message)


def _add_optics_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--wavelength", type=float, dest="wavelength_nm")
    p.add_argument("--na", type=float, dest="numerical_aperture")
    p.add_argument("--defocus", type=float, dest="defocus_nm")
    p.add_argument("--pixel-size", type=float, dest="pixel_size_nm")
    p.add_argument("--kernel-size", type=int, dest="kernel_size")
    p.add_argument("--steepness", type=float, dest="sigmoid_steepness")
    p.add_argument("--threshold", type=float, dest="threshold")


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rho", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--beta1", type=float)
    p.add_argument("--beta2", type=float)
    p.add_argument("--outer-tol", type=float, dest="outer_tol")
    p.add_argument("--outer-iters", type=int, dest="outer_max_iters")
    p.add_argument("--bregman-iters", type=int, dest="bregman_max_iters")
    p.add_argument("--bregman-tol", type=float, dest="bregman_tol")
    p.add_argument("--descent-iters", type=int, dest="descent_max_iters")


def _coerce(value: str, typename: str):
    if "int" in typename:
        return int(value)
    if "bool" in typename:
        return value.lower() in ("1", "true", "yes")
    return float(value)


def _merged(args: argparse.Namespace, fields: dict[str, str]) -> dict:
    """CLI flags override config-file keys, which override defaults."""
    cfg_file = {}
    if getattr(args, "config", None):
        cfg_file = load_config(args.config)
    out = {}
    for name, typename in fields.items():
        if name in cfg_file:
            out[name] = _coerce(cfg_file[name], str(typename))
        flag = getattr(args, name, None)
        if flag is not None:
            out[name] = flag
    return out


def _make_optics(args) -> OpticsConfig:
    return OpticsConfig(**_merged(args, _OPTICS_FIELDS))


def _make_solver(args) -> SolverConfig:
    return SolverConfig(**_merged(args, _SOLVER_FIELDS))


def _load_target(spec: str) -> np.ndarray:
    """A target is either a bundled generator name or a file path."""
    if spec in targets.GENERATORS:
        return targets.GENERATORS[spec]()
    return load_pattern(spec)


def _outdir(args) -> Path:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_psf(args) -> int:
    oc = _make_optics(args)
    kernel = build_psf(oc)
    out = _outdir(args)
    save_grid(kernel.samples.real, out / "psf_real.txt", mode="text")
    save_grid(kernel.samples.imag, out / "psf_imag.txt", mode="text")
    save_grid(np.abs(kernel.samples), out / "psf_magnitude.pgm",
              mode="continuous", comment="kernel magnitude")
    print(f"wrote kernel ({oc.kernel_size}x{oc.kernel_size}, "
          f"dc_gain={kernel.dc_gain:.12f}) to {out}")
    return 0


def cmd_simulate(args) -> int:
    oc = _make_optics(args)
    mask = load_mask(args.mask)
    kernel = build_psf(oc)
    v = convolve(kernel, mask)
    ia = aerial_image(v)
    printed = image_threshold(ia, oc.threshold)
    out = _outdir(args)
    save_grid(ia, out / "aerial.pgm", mode="continuous", comment="aerial image")
    save_grid(printed, out / "wafer.pgm", mode="binary")
    if args.target:
        target = _load_target(args.target)
        report = evaluate(mask, target, oc, kernel=kernel)
        save_grid(report.epe, out / "epe.pgm", mode="binary")
        print(f"epe_error={report.error!r} "
              f"nonzero_epe_pixels={report.nonzero_epe_pixels}")
    print(f"simulation outputs in {out}")
    return 0


def _save_mask_outputs(u, target, oc, kernel, records, out: Path) -> None:
    save_grid(u, out / "mask.txt", mode="text")
    save_grid(u, out / "mask.pgm", mode="binary",
              comment="mask binarized at 0.5; continuous values in mask.txt")
    report = evaluate(u, target, oc, kernel=kernel)
    printed = image_threshold(
        aerial_image(convolve(kernel, u)), oc.threshold)
    save_grid(printed, out / "wafer.pgm", mode="binary")
    save_grid(report.epe, out / "epe.pgm", mode="binary")
    write_history(records, out / "history.csv")


def cmd_optimize(args) -> int:
    oc = _make_optics(args)
    sc = _make_solver(args)
    target = _load_target(args.target)
    kernel = build_psf(oc)
    baseline = evaluate(target, target, oc, kernel=kernel).error

    def progress(rec):
        if not args.quiet:
            print(f"iter {rec.iteration:3d}  epe={rec.epe_error:10.4f}  "
                  f"lagrangian={rec.lagrangian:14.6f}  "
                  f"residual={rec.primal_residual:10.4f}")

    u, records = admm_optimize(target, oc, sc, progress=progress, kernel=kernel)
    out = _outdir(args)
    _save_mask_outputs(u, target, oc, kernel, records, out)
    final = evaluate(u, target, oc, kernel=kernel).error
    trace = lagrangian_trace_check(records)
    print(f"baseline epe_error={baseline!r}, optimized epe_error={final!r}")
    print(f"lagrangian nonincreasing fraction: "
          f"{trace.nonincreasing_fraction:.3f}")
    print(f"outputs in {out}")
    return 0


def cmd_evaluate(args) -> int:
    oc = _make_optics(args)
    mask = load_mask(args.mask)
    target = _load_target(args.target)
    report = evaluate(mask, target, oc)
    if args.output_dir:
        out = _outdir(args)
        save_grid(report.epe, out / "epe.pgm", mode="binary")
    print(f"epe_error={report.error!r} "
          f"nonzero_epe_pixels={report.nonzero_epe_pixels}")
    return 0


def cmd_derive(args) -> int:
    print("# oracle reference values")
    for target in (1.0, 0.0):
        res = oracles.v_oracle(0.2, target, rho=1.0, tr=0.3)
        print(f"v_oracle(W=0.2, I={int(target)}, rho=1, tr=0.3): "
              f"argmin={res.argmin.real:.6f}, min={res.min_value:.6f}")
    res = oracles.v_oracle(5.0, 0.0, rho=10.0, tr=0.3)
    print(f"v_oracle(W=5, I=0, rho=10, tr=0.3): argmin={res.argmin.real:.6f}")
    lo, hi = 3.8, 3.9
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if oracles.bessel_j1(lo) * oracles.bessel_j1(mid) <= 0:
            hi = mid
        else:
            lo = mid
    print(f"first positive zero of J1: {0.5 * (lo + hi):.6f}")
    lh = estimate_lipschitz(20.0, 0.3, samples=200_000)
    print(f"estimate_lipschitz(a=20, tr=0.3) ~= {lh:.4f}")
    print(f"check_rho_condition(rho=10, L_h={lh:.4f}): "
          f"{check_rho_condition(10.0, lh)}")
    return 0


def _parse_list(text: str, cast=float) -> list:
    return [cast(tok) for tok in text.split(",") if tok.strip()]


def cmd_sweep(args) -> int:
    if not any((args.sweep_rho, args.sweep_gamma, args.sweep_beta1,
                args.sweep_beta2, args.kernel_noise)):
        raise _UsageError("sweep needs at least one of --rho/--gamma/"
                          "--beta1/--beta2/--kernel-noise lists")
    oc = _make_optics(args)
    base = _make_solver(args)
    target = _load_target(args.target)
    out = _outdir(args)
    rng = np.random.default_rng(args.seed)
    kernel = build_psf(oc)

    cells = []
    for name, flag in (("rho", args.sweep_rho), ("gamma", args.sweep_gamma),
                       ("beta1", args.sweep_beta1), ("beta2", args.sweep_beta2)):
        if flag:
            for value in _parse_list(flag):
                cells.append((name, value, None))
    if args.kernel_noise:
        for level in _parse_list(args.kernel_noise):
            noise = rng.normal(size=kernel.samples.shape) \
                + 1j * rng.normal(size=kernel.samples.shape)
            noise *= level * l2_norm(kernel.samples) / l2_norm(noise)
            cells.append(("kernel_noise", level,
                          PsfKernel(kernel.samples + noise, config=oc)))
    for name, value, perturbed in cells:
        sc = base if name == "kernel_noise" else dataclasses.replace(
            base, **{name: value})
        k = perturbed if perturbed is not None else kernel
        _, records = admm_optimize(target, oc, sc, kernel=k)
        tag = f"{name}_{value:g}".replace(".", "p")
        write_history(records, out / f"history_{tag}.csv")
        print(f"{name}={value:g}: final epe_error="
              f"{records[-1].epe_error!r} -> history_{tag}.csv")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="ilt-admm",
                     description="Inverse lithography mask synthesis")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, solver=False):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--output-dir", default="out")
        p.add_argument("--seed", type=int, default=0)
        _add_optics_flags(p)
        if solver:
            _add_solver_flags(p)

    p = sub.add_parser("psf", help="dump the PSF kernel")
    common(p)
    p.set_defaults(func=cmd_psf)

    p = sub.add_parser("simulate", help="forward imaging chain for a mask")
    p.add_argument("--mask", required=True)
    p.add_argument("--target", help="optional target for an EPE panel")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize", help="run the ADMM mask optimization")
    p.add_argument("--target", required=True,
                   help="pattern file or builtin: " + ", ".join(targets.GENERATORS))
    p.add_argument("--quiet", action="store_true")
    common(p, solver=True)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("evaluate", help="EPE metrics for a mask vs target")
    p.add_argument("--mask", required=True)
    p.add_argument("--target", required=True)
    common(p)
    # evaluate only prints unless an output directory is asked for
    p.set_defaults(func=cmd_evaluate, output_dir=None)

    p = sub.add_parser("derive", help="print brute-force oracle reference values")
    common(p)
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("sweep", help="parameter / kernel-noise sweep")
    p.add_argument("--target", required=True)
    p.add_argument("--rho", dest="sweep_rho",
                   help="comma-separated rho values")
    p.add_argument("--gamma", dest="sweep_gamma")
    p.add_argument("--beta1", dest="sweep_beta1")
    p.add_argument("--beta2", dest="sweep_beta2")
    p.add_argument("--kernel-noise",
                   help="comma-separated relative l2 noise levels for H")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--output-dir", default="out")
    p.add_argument("--seed", type=int, default=0)
    _add_optics_flags(p)
    # the solver list flags above replace the scalar --rho/--gamma/--beta1/
    # --beta2; only the budget flags carry over
    p.add_argument("--outer-tol", type=float, dest="outer_tol")
    p.add_argument("--outer-iters", type=int, dest="outer_max_iters")
    p.add_argument("--bregman-iters", type=int, dest="bregman_max_iters")
    p.add_argument("--bregman-tol", type=float, dest="bregman_tol")
    p.add_argument("--descent-iters", type=int, dest="descent_max_iters")
    p.set_defaults(func=cmd_sweep)
    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (PatternFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
