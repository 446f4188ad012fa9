"""Command line entry point ``beurling``.

Exit codes: 0 success, 2 configuration or usage error, 3 numerical error,
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .algebra import schur_pnorm, unweighted_pnorm
from .config import override, parse_config
from .errors import ConfigError, NumericalError, UsageError, BeurlingError
from .experiments import run_experiment
from .io import dump_json, kernel_from_json, kernel_to_json, load_json, sequence_from_json, sequence_to_json
from .results import OutputError, write_results
from .spectral import decay_profile, hermitian_spectrum, invert, spectral_radius_algebra
from .twisted import inner_residual, twisted_inverse
from .weights import AuditGrid, check_admissible, check_weak_growth, weight_from_spec

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _u64(text):
    val = int(text, 0)
    if not 0 <= val < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return val


def _weight_arg(text):
    """A weight given inline as JSON or as a path to a JSON file."""
    if text is None:
        return None
    stripped = text.lstrip()
    spec = json.loads(text) if stripped.startswith("{") else load_json(text)
    return weight_from_spec(spec)


def build_parser():
    parser = argparse.ArgumentParser(prog="beurling", description="Weighted p-Beurling algebra experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("--config", required=True)
    run.add_argument("--out")
    run.add_argument("--seed", type=_u64)
    run.add_argument("--format", choices=("csv", "json"))
    run.add_argument("--workers", type=int, default=1)

    norm = sub.add_parser("norm", help="weighted Schur p-norm of a kernel file")
    norm.add_argument("kernel")
    norm.add_argument("--p", type=float, default=1.0)
    norm.add_argument("--weight", help="weight spec as inline JSON or a file path")

    spec = sub.add_parser("spectrum", help="norm roots, operator norm and eigenvalues")
    spec.add_argument("kernel")
    spec.add_argument("--p", type=float, default=1.0)
    spec.add_argument("--weight")
    spec.add_argument("--j-max", type=int, default=8)

    inv = sub.add_parser("invert", help="inverse kernel and its off-diagonal decay")
    inv.add_argument("kernel")
    inv.add_argument("--tol", type=float, default=1e-8)

    tw = sub.add_parser("twisted-invert", help="finite-section inverse of a twisted sequence")
    tw.add_argument("sequence")
    tw.add_argument("--op-radius", type=int, required=True)
    tw.add_argument("--tol", type=float, default=1e-8)

    aud = sub.add_parser("weights-audit", help="admissibility and weak-growth audit of a weight")
    aud.add_argument("weight", help="weight spec as inline JSON or a file path")
    aud.add_argument("--delta", type=float, default=0.5)
    aud.add_argument("--seed", type=_u64, default=0)
    return parser


def _cmd_run(args):
    with open(args.config, encoding="utf-8") as fh:
        text = fh.read()
    cfg = override(parse_config(text), seed=args.seed, format=args.format, output=args.out)
    table = run_experiment(cfg, workers=args.workers)
    paths = write_results(table, cfg.output, cfg.format)
    failed = sum(1 for e in table.column("error") if e)
    return {"experiment": cfg.experiment, "rows": len(table.rows), "failed_cells": failed, "files": paths}


def _cmd_norm(args):
    K = kernel_from_json(load_json(args.kernel))
    w = _weight_arg(args.weight)
    out = {"p": args.p, "weight": None if w is None else w.label(), "schur_pnorm": schur_pnorm(K, args.p, w)}
    if w is None:
        out["l1_schur"] = unweighted_pnorm(K, 1.0)
        out["l2_schur"] = unweighted_pnorm(K, 2.0)
    return out


def _cmd_spectrum(args):
    K = kernel_from_json(load_json(args.kernel))
    rep = spectral_radius_algebra(K, args.p, _weight_arg(args.weight), args.j_max)
    out = rep.to_dict()
    if K.is_hermitian():
        out["eigenvalues"] = [float(v) for v in hermitian_spectrum(K)]
    return out


def _cmd_invert(args):
    K = kernel_from_json(load_json(args.kernel))
    inv = invert(K, args.tol)
    return {"inverse": kernel_to_json(inv), "decay": decay_profile(inv).to_dict()}


def _cmd_twisted(args):
    a = sequence_from_json(load_json(args.sequence))
    b = twisted_inverse(a, args.op_radius, args.tol)
    return {"inverse": sequence_to_json(b), "inner_residual": inner_residual(a, b)}


def _cmd_audit(args):
    w = _weight_arg(args.weight)
    grid = AuditGrid(seed=args.seed)
    audit = check_admissible(w, grid)
    growth = check_weak_growth(w, args.delta, grid)
    return {
        "weight": w.label(),
        "concave_ok": audit.concave_ok, "grs_ok": audit.grs_ok, "submult_ok": audit.submult_ok,
        "even_ok": audit.even_ok, "admissible": audit.admissible,
        "weak_growth": {"delta": args.delta, "ok": growth.ok, "C_min": growth.C_min,
                        "last_decade_decrease": growth.last_decade_decrease},
    }


COMMANDS = {
    "run": _cmd_run, "norm": _cmd_norm, "spectrum": _cmd_spectrum, "invert": _cmd_invert,
    "twisted-invert": _cmd_twisted, "weights-audit": _cmd_audit,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        result = COMMANDS[args.command](args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except (OutputError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, BeurlingError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(dump_json(result))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
