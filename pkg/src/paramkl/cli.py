"""Batch command-line driver; each subcommand fronts one library operation."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .core import ParameterGrid
from .fields import spd_field_reduce
from .kernels import builtin_kernel, feature_factorize, nystrom_eigensolve, snapshot_kernel
from .report import SpectrumReport
from .spectral import ReducedModel, decompose, evaluate, truncate
from .stationary import STATIONARY_KERNELS, spectral_density, synthesize_realizations
from .tensor import tt_decompose, tt_error_bound, tt_eval

log = logging.getLogger("paramkl")

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _echo(**params):
    for key in sorted(params):
        print(f"{key}={params[key]!r}", file=sys.stderr)


def _rank_or_tol(args):
    if (args.rank is None) == (args.tol is None):
        raise UsageError("give exactly one of --rank and --tol")
    if args.tol is not None and args.tol < 0:
        raise UsageError("--tol must be non-negative")


def cmd_decompose(args):
    _echo(method=args.method, cutoff=args.cutoff)
    s = io.load_snapshots(args.input)
    sd = decompose(s, method=args.method, cutoff=args.cutoff)
    io.save_model(ReducedModel.full(sd, s), args.out)
    log.info("rank %d model written to %s", sd.rank, args.out)


def cmd_truncate(args):
    _rank_or_tol(args)
    _echo(rank=args.rank, tol=args.tol)
    rm = truncate(io.load_model(args.model), rank=args.rank, tol=args.tol)
    io.save_model(rm, args.out)
    log.info("kept %d terms, tail energy %.6g", rm.truncation_rank, rm.tail_energy)


def cmd_eval(args):
    _echo(index=args.index)
    vec = evaluate(io.load_model(args.model), args.index)
    if args.out:
        io.write_csv(args.out, vec)
    else:
        sys.stdout.write("".join(f"{x:.17g}\n" for x in vec))


def cmd_kernel_eig(args):
    _echo(kernel=args.kernel, scale=args.scale, points=args.points, count=args.count)
    if args.input:
        s = io.load_snapshots(args.input)
        kern, grid = snapshot_kernel(s), s.grid
    else:
        if args.kernel is None or args.points is None:
            raise UsageError("give --kernel and --points, or --input")
        kern = builtin_kernel(args.kernel, args.scale)
        grid = ParameterGrid.midpoint(args.points)
    res = nystrom_eigensolve(kern, grid, args.count)
    io.save_arrays({"eigenvalues": res.eigenvalues, "eigenfunctions": res.eigenfunctions,
                    "points": grid.points, "weights": grid.weights},
                   args.out, kernel=kern.name, clamped=res.clamped)


def cmd_feature(args):
    _echo(input=args.input, snapshots=args.snapshots)
    feats, grid = io.load_features(args.input)
    snaps = io.load_snapshots(args.snapshots) if args.snapshots else None
    ff = feature_factorize(feats, grid, snaps)
    arrays = {"kernel": ff.kernel, "eigenvalues": ff.eigenvalues,
              "parameter_modes": ff.parameter_modes, "chi_modes": ff.chi_modes}
    if ff.table is not None:
        arrays.update(spatial_modes=ff.spatial_modes, table=ff.table)
    io.save_arrays(arrays, args.out, spectrum_discrepancy=ff.spectrum_discrepancy)


def cmd_stationary(args):
    _echo(kernel=args.kernel, scale=args.scale, length=args.length, points=args.points)
    if args.kernel not in STATIONARY_KERNELS:
        raise UsageError(f"unknown stationary kernel {args.kernel!r}")
    k = STATIONARY_KERNELS[args.kernel](args.scale, args.length, args.points)
    dens = spectral_density(k)
    if not dens.admissible:
        log.warning("kernel is not positive definite on this grid (clamped %.3e)", dens.clamped)
    io.save_density(dens, args.out)


def cmd_synthesize(args):
    _echo(count=args.count, seed=args.seed)
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    dens = io.load_density(args.density)
    io.write_csv(args.out, synthesize_realizations(dens, args.count, args.seed))


def cmd_tt(args):
    if args.action == "compress":
        _echo(tol=args.tol, max_rank=args.max_rank)
        if args.out is None:
            raise UsageError("tt compress needs --out")
        if args.tol < 0:
            raise UsageError("--tol must be non-negative")
        tt = tt_decompose(io.load_tensor(args.input), args.tol, args.max_rank)
        io.save_tt(tt, args.out)
        log.info("ranks %s, error bound %.6g", tt.ranks, tt_error_bound(tt))
    else:
        if args.index is None:
            raise UsageError("tt eval needs --index")
        try:
            index = tuple(int(x) for x in args.index.split(","))
        except ValueError:
            raise UsageError(f"malformed --index {args.index!r}") from None
        _echo(index=index)
        print(f"{tt_eval(io.load_tt(args.input), index):.17g}")


def cmd_spd_field(args):
    _rank_or_tol(args)
    _echo(rank=args.rank, tol=args.tol, center=not args.no_center)
    field, grid = io.load_spd_field(args.input)
    model = spd_field_reduce(field, grid, rank=args.rank, tol=args.tol, center=not args.no_center)
    io.save_spd_model(model, args.out)


def cmd_report(args):
    rm = io.load_model(args.model)
    rep = SpectrumReport(rm.spectral.eigenvalues)
    out = Path(args.out)
    rep.to_csv(out)
    rep.to_svg(Path(args.svg) if args.svg else out.with_suffix(".svg"),
               title=rm.source_name or "eigenvalue decay")


def build_parser():
    p = _Parser(prog="paramkl", description=__doc__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    c = sub.add_parser("decompose", help="KL/POD decomposition of a snapshot set")
    c.add_argument("--input", required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--method", choices=["snapshots", "correlation"], default="snapshots")
    c.add_argument("--cutoff", type=float, default=1e-12)
    c.set_defaults(func=cmd_decompose)

    c = sub.add_parser("truncate", help="best n-term truncation of a model")
    c.add_argument("--model", required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--rank", type=int)
    c.add_argument("--tol", type=float)
    c.set_defaults(func=cmd_truncate)

    c = sub.add_parser("eval", help="evaluate a model at a grid index")
    c.add_argument("--model", required=True)
    c.add_argument("--index", type=int, required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_eval)

    c = sub.add_parser("kernel-eig", help="Nystrom eigenpairs of a kernel")
    c.add_argument("--kernel", choices=["brownian", "exp", "gauss"])
    c.add_argument("--scale", type=float, default=1.0)
    c.add_argument("--points", type=int)
    c.add_argument("--input", help="snapshot set; uses its kernel and grid")
    c.add_argument("--count", type=int, required=True)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_kernel_eig)

    c = sub.add_parser("feature", help="factorize a kernel through feature samples")
    c.add_argument("--input", required=True)
    c.add_argument("--snapshots")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_feature)

    c = sub.add_parser("stationary", help="spectral density of a stationary kernel")
    c.add_argument("--kernel", required=True)
    c.add_argument("--scale", type=float, default=1.0)
    c.add_argument("--length", type=float, required=True)
    c.add_argument("--points", type=int, required=True)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_stationary)

    c = sub.add_parser("synthesize", help="seeded stationary realizations")
    c.add_argument("--density", required=True)
    c.add_argument("--count", type=int, required=True)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_synthesize)

    c = sub.add_parser("tt", help="tensor-train compression and evaluation")
    c.add_argument("action", choices=["compress", "eval"])
    c.add_argument("--input", required=True)
    c.add_argument("--tol", type=float, default=0.0)
    c.add_argument("--max-rank", type=int)
    c.add_argument("--index")
    c.add_argument("--out")
    c.set_defaults(func=cmd_tt)

    c = sub.add_parser("spd-field", help="log-domain reduction of an SPD field")
    c.add_argument("--input", required=True)
    c.add_argument("--rank", type=int)
    c.add_argument("--tol", type=float)
    c.add_argument("--no-center", action="store_true")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_spd_field)

    c = sub.add_parser("report", help="spectrum decay table and plot")
    c.add_argument("--model", required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--svg")
    c.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    level = os.environ.get("PARAMKL_LOG", "warn").upper()
    level = {"WARN": "WARNING"}.get(level, level)
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"paramkl {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, IndexError, OSError, KeyError, RuntimeError) as exc:
        print(f"paramkl {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
