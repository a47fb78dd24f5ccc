"""Command-line driver: ``ptychodirect <subcommand> ...``.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench, io
from .core import make_shift_set
from .forward import simulate_1d, simulate_2d
from .solver1d import reconstruct_1d
from .solver2d import reconstruct_2d
from .windows import Window, Window2D, custom_window, exponential_window, gaussian_window

log = logging.getLogger(__name__)

METRIC_HEADER = ["mse_total", "mse_phase", "mse_amp"]


class UsageError(Exception):
    pass


def parse_window_spec(spec: str, N: int) -> Window:
    """``ew:a=4,s=8``, ``gw:alpha=0.99,s=8[,photons=1]`` or a PTYG coefficient file."""
    kind, sep, rest = spec.partition(":")
    kind = kind.strip().lower()
    if not sep or kind not in ("ew", "gw"):
        path = Path(spec)
        if not path.exists():
            raise UsageError(f"window spec {spec!r} is neither 'ew:...'/'gw:...' nor an existing file")
        coeffs = io.read_grid(path)
        if coeffs.ndim != 1 or coeffs.size != N:
            raise ValueError(f"window file holds shape {coeffs.shape}, need ({N},)")
        return custom_window(coeffs)
    params = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise UsageError(f"bad window parameter {item!r}")
        try:
            params[key.strip()] = float(val)
        except ValueError:
            raise UsageError(f"bad window parameter value {item!r}") from None
    if "s" not in params:
        raise UsageError("window spec needs s=<support>")
    s = int(params.pop("s"))
    allowed = {"ew": {"a"}, "gw": {"alpha", "photons"}}[kind]
    if set(params) - allowed:
        raise UsageError(f"unknown {kind} parameters: {sorted(set(params) - allowed)}")
    if kind == "ew":
        return exponential_window(N, s, **params)
    return gaussian_window(N, s, **params)


def _cmd_window(args) -> int:
    if args.kind == "ew":
        w = exponential_window(args.N, args.s, a=args.a)
    else:
        w = gaussian_window(args.N, args.s, alpha=args.alpha, photons=args.photons)
    io.write_grid(args.out, w.coeffs)
    return 0


def _cmd_phantom(args) -> int:
    F = bench.phantom(args.N, seed=args.seed)
    io.write_grid(args.out, F if args.dims == 2 else F[0])
    return 0


def _cmd_simulate(args) -> int:
    f = io.read_grid(args.object)
    if args.dims is not None and args.dims != f.ndim:
        raise UsageError(f"--dims {args.dims} does not match the {f.ndim}D object")
    N = f.shape[0]
    K = args.K
    w = parse_window_spec(args.window_spec, N)
    step = bench.resolve_freq_step(args.freq_step, N, K)
    sh = make_shift_set(N, w.s, args.kappa, args.mode)
    if f.ndim == 1:
        meas = simulate_1d(f, w, sh, K, freq_step=step)
    else:
        meas = simulate_2d(f, Window2D(w, w), (sh, sh), K, freq_step=step)
    io.write_measurements(args.out, meas)
    return 0


def _cmd_reconstruct(args) -> int:
    meas = io.read_measurements(args.measurements)
    w = parse_window_spec(args.window_spec, meas.N)
    stabilized = False if args.no_degree_norm else None
    if meas.ndims == 1:
        res = reconstruct_1d(meas, w, args.projector, stabilized=stabilized,
                             pattern_method=args.pattern_method)
    else:
        res = reconstruct_2d(meas, Window2D(w, w), args.projector, stabilized=stabilized,
                             pattern_method=args.pattern_method)
    io.write_grid(args.out, res.estimate)
    if args.pgm_prefix:
        if res.estimate.ndim != 2:
            raise UsageError("--pgm-prefix needs a 2D reconstruction")
        io.export_pgm(res.estimate, "amplitude", f"{args.pgm_prefix}_amplitude.pgm")
        io.export_pgm(res.estimate, "phase", f"{args.pgm_prefix}_phase.pgm")
    print(f"components={res.diagnostics['components']}")
    return 0


def _cmd_eval(args) -> int:
    truth, est = io.read_grid(args.truth), io.read_grid(args.estimate)
    if truth.shape != est.shape:
        raise ValueError(f"shape mismatch: truth {truth.shape}, estimate {est.shape}")
    m = bench.mse_metrics(truth, est)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(METRIC_HEADER)
    out.writerow([repr(m["total"]), repr(m["phase"]), repr(m["amplitude"])])
    return 0


def _cmd_sweep(args) -> int:
    try:
        raw = json.loads(Path(args.config).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"bad sweep config: {exc}") from None
    rows = bench.sweep(bench.SweepConfig.from_dict(raw))
    with open(args.out, "w", newline="") as fh:
        bench.write_csv(rows, fh)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ptychodirect", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("window", help="write window coefficients as PTYG")
    q.add_argument("--kind", choices=["ew", "gw"], required=True)
    q.add_argument("--s", type=int, required=True)
    q.add_argument("--N", type=int, required=True)
    q.add_argument("--a", type=float, default=4.0)
    q.add_argument("--alpha", type=float, default=0.99)
    q.add_argument("--photons", type=float, default=1.0)
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_window)

    q = sub.add_parser("phantom", help="write a seeded smooth test object")
    q.add_argument("--N", type=int, required=True)
    q.add_argument("--dims", type=int, choices=[1, 2], default=2)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_phantom)

    q = sub.add_parser("simulate", help="object + window -> PTYM measurements")
    q.add_argument("--object", required=True)
    q.add_argument("--window-spec", required=True)
    q.add_argument("--K", type=int, required=True)
    q.add_argument("--kappa", type=int, default=1)
    q.add_argument("--mode", choices=["interior", "circulant"], default="interior")
    q.add_argument("--dims", type=int, choices=[1, 2])
    q.add_argument("--freq-step", default="1",
                   help="modulation stride: integer or 'uniform' (N // (K+1))")
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_simulate)

    q = sub.add_parser("reconstruct", help="PTYM measurements -> estimate")
    q.add_argument("--measurements", required=True)
    q.add_argument("--window-spec", required=True)
    q.add_argument("--projector", choices=["tight", "pattern"], default="tight")
    q.add_argument("--pattern-method", choices=["basic", "ridge"], default="basic",
                   help="least-squares solution used by the pattern projector")
    q.add_argument("--no-degree-norm", action="store_true")
    q.add_argument("--out", required=True)
    q.add_argument("--pgm-prefix")
    q.set_defaults(func=_cmd_reconstruct)

    q = sub.add_parser("eval", help="print MSE metrics as CSV")
    q.add_argument("--truth", required=True)
    q.add_argument("--estimate", required=True)
    q.set_defaults(func=_cmd_eval)

    q = sub.add_parser("sweep", help="run a JSON-configured benchmark sweep")
    q.add_argument("--config", required=True)
    q.add_argument("--out", required=True)
    q.set_defaults(func=_cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "freq_step", None) not in (None, "uniform"):
        try:
            args.freq_step = int(args.freq_step)
        except ValueError:
            print("error: --freq-step must be an integer or 'uniform'", file=sys.stderr)
            return 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
