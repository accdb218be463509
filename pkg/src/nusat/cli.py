"""Command-line interface: ``nusat <subcommand> [flags]``.

stdout carries only the payload (DIMACS, JSON or CSV); diagnostics go to
stderr.  Exit codes: 0 success, 10 SAT and 20 UNSAT (``solve`` only),
2 usage error, 3 runtime error.

Any long flag may also be given in a JSON object passed with
``--config FILE`` (keys use underscores, e.g. ``"m_grid"``); flags on the
command line win over the file.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import analysis, witness, xlab
from .dist import EnsembleSpec, instantiate, parse_dist
from .errors import DistributionError, NusatError
from .formula import read_dimacs, to_dimacs
from .generator import DEFAULT_RETRY_CAP, GeneratorConfig, sample_formula
from .solver import solve2

EXIT_OK = 0
EXIT_SAT = 10
EXIT_UNSAT = 20
EXIT_USAGE = 2
EXIT_RUNTIME = 3

SCHEMA_VERSION = 1
log = logging.getLogger("nusat")


class UsageError(Exception):
    pass


def _dist_arg(text: str) -> EnsembleSpec:
    try:
        return parse_dist(text)
    except (DistributionError, OSError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_dist(p, *, need_m=False):
    p.add_argument("--dist", type=_dist_arg, help="uniform | powerlaw:BETA | geometric:B | file:PATH")
    p.add_argument("--n", type=int, help="number of variables (defaults to the weight count for file:)")
    if need_m:
        p.add_argument("--m", type=int, help="number of clauses")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nusat",
        description="Non-uniform random 2-SAT: generation, solving, witnesses, threshold predictions and experiments.",
    )
    parser.add_argument("--config", metavar="FILE", help="JSON file with default flag values")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging on stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("gen", help="sample a random formula as DIMACS")
    _add_dist(p, need_m=True)
    p.add_argument("--k", type=int, default=2, help="clause width (default 2)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--retry-cap", type=int, default=DEFAULT_RETRY_CAP)
    p.add_argument("--out", default="-", help="output file, '-' for stdout")

    p = sub.add_parser("solve", help="decide a 2-CNF; exit 10 SAT / 20 UNSAT")
    p.add_argument("file", help="DIMACS file, '-' for stdin")
    p.add_argument("--permissive", action="store_true", help="accept clauses repeating a variable")

    p = sub.add_parser("witness", help="find a bicycle, snake or full-sign core")
    p.add_argument("file", help="DIMACS file, '-' for stdin")
    p.add_argument("--find", default="bicycle", help="bicycle | snake:T | core")
    p.add_argument("--t-max", type=int, default=20, help="longest bicycle searched")

    p = sub.add_parser("threshold", help="predicted threshold and regime")
    _add_dist(p)

    p = sub.add_parser("bounds", help="evaluate every probability bound at (dist, n, m)")
    _add_dist(p, need_m=True)
    p.add_argument("--t", type=int, help="snake size (default ceil(ln(f)^2))")
    p.add_argument("--t-max", type=int, help="bicycle sum truncation (default n)")

    p = sub.add_parser("sweep", help="Pr(sat) estimates on an m grid, as CSV")
    _add_dist(p)
    grid = p.add_mutually_exclusive_group()
    grid.add_argument("--m-grid", type=_int_list, help="comma-separated clause counts")
    grid.add_argument("--rel-grid", type=_float_list, help="comma-separated multiples of m*")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--workers", type=int, help=f"worker processes (env {xlab.WORKERS_ENV})")
    p.add_argument("--retry-cap", type=int, default=DEFAULT_RETRY_CAP)
    p.add_argument("--out", default="-", help="output file, '-' for stdout")

    p = sub.add_parser("crossing", help="locate the m where Pr(sat) = 1/2")
    _add_dist(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=10_000, help="total trials (>= 1000)")
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--workers", type=int, help=f"worker processes (env {xlab.WORKERS_ENV})")

    p = sub.add_parser("sharpness", help="relative transition width across n")
    p.add_argument("--dist", type=_dist_arg, help="uniform | powerlaw:BETA | geometric:B")
    p.add_argument("--n-grid", type=_int_list, help="comma-separated increasing sizes")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=6_000, help="trials per n")
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--workers", type=int, help=f"worker processes (env {xlab.WORKERS_ENV})")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        cfg = json.loads(Path(known.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"--config: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("--config: expected a JSON object")
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sp in subparsers.choices.values():
        conv = {a.dest: a.type for a in sp._actions if a.dest != "help"}
        values = {}
        for key, val in cfg.items():
            if key not in conv:
                continue
            if isinstance(val, list):
                val = ",".join(map(str, val))
            if isinstance(val, str) and conv[key] is not None:
                try:
                    val = conv[key](val)
                except (argparse.ArgumentTypeError, ValueError) as exc:
                    raise UsageError(f"--config {key}: {exc}") from None
            values[key] = val
        sp.set_defaults(**values)
    unknown = set(cfg) - {a.dest for sp in subparsers.choices.values() for a in sp._actions}
    if unknown:
        raise UsageError(f"--config: unknown key(s) {sorted(unknown)}")


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise UsageError(f"missing required flag --{name.replace('_', '-')}")


def _distribution(args):
    _require(args, "dist")
    n = args.n
    if n is None:
        n = args.dist.fixed_size
        if n is None:
            raise UsageError("missing required flag --n")
    return instantiate(args.dist, n)


def _emit(text: str, out: str = "-"):
    if out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(out).write_text(text)


def _emit_json(obj: dict):
    payload = {"schema_version": SCHEMA_VERSION, **obj}
    _emit(json.dumps(payload, indent=2) + "\n")


def cmd_gen(args) -> int:
    d = _distribution(args)
    _require(args, "m")
    f = sample_formula(d, args.k, args.m, GeneratorConfig(args.seed, args.retry_cap))
    _emit(to_dimacs(f.relabel(d.labels)), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    f = read_dimacs(args.file, 2, strict=not args.permissive)
    res = solve2(f)
    _emit_json(res.to_json())
    return EXIT_SAT if res.satisfiable else EXIT_UNSAT


def cmd_witness(args) -> int:
    f = read_dimacs(args.file, 2)
    what = args.find
    if what == "bicycle":
        b = witness.find_bicycle(f, args.t_max)
        result = b.to_json() if b else None
    elif what == "core":
        core = witness.full_sign_core(f)
        result = {"type": "core", "variables": list(core)} if core else None
    elif what.startswith("snake:"):
        try:
            t = int(what.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"--find: bad snake size in {what!r}") from None
        occ = witness.count_snake_occurrences(f, t)
        result = None
        if occ:
            s = min(occ, key=lambda x: x.w)
            c = occ[s]
            result = {
                **s.to_json(),
                "multiplicity": c.multiplicity,
                "exactly_once": c.exactly_once,
                "classes_found": len(occ),
            }
    else:
        raise UsageError(f"--find: expected bicycle, snake:T or core, got {what!r}")
    _emit_json({"find": what, "result": result})
    return EXIT_OK


def cmd_threshold(args) -> int:
    d = _distribution(args)
    _emit_json({"dist": str(args.dist), "n": d.n, **analysis.predict_threshold(d).to_json()})
    return EXIT_OK


def cmd_bounds(args) -> int:
    d = _distribution(args)
    _require(args, "m")
    bounds = analysis.all_bounds(d, args.m, t=args.t, t_max=args.t_max)
    _emit_json({"dist": str(args.dist), "n": d.n, "m": args.m, "q_max": d.q_max, "bounds": bounds})
    return EXIT_OK


def cmd_sweep(args) -> int:
    _require(args, "dist", "trials")
    n = args.n if args.n is not None else args.dist.fixed_size
    if n is None:
        raise UsageError("missing required flag --n")
    if args.m_grid is None and args.rel_grid is None:
        raise UsageError("one of --m-grid or --rel-grid is required")
    grid = tuple(args.m_grid) if args.m_grid is not None else xlab.RelativeGrid(tuple(args.rel_grid))
    try:
        cfg = xlab.SweepConfig(args.dist, n, grid, args.trials, args.seed, args.confidence, args.retry_cap)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    records = xlab.run_sweep(cfg, workers=args.workers)
    redraws = sum(r.redraws for r in records)
    if redraws:
        log.warning("%d trial(s) re-drawn after hitting the retry cap", redraws)
    _emit(xlab.records_to_csv(records), args.out)
    return EXIT_OK


def cmd_crossing(args) -> int:
    _require(args, "dist")
    n = args.n if args.n is not None else args.dist.fixed_size
    if n is None:
        raise UsageError("missing required flag --n")
    if args.budget < xlab.MIN_BUDGET:
        raise UsageError(f"--budget must be >= {xlab.MIN_BUDGET}")
    est = xlab.estimate_crossing(
        args.dist, n, args.seed, args.budget, confidence=args.confidence, workers=args.workers
    )
    _emit_json({"dist": str(args.dist), **est.to_json()})
    return EXIT_OK


def cmd_sharpness(args) -> int:
    _require(args, "dist", "n_grid")
    if not 0 < args.delta <= 0.5:
        raise UsageError("--delta must lie in (0, 0.5]")
    rep = xlab.sharpness_probe(
        args.dist,
        args.n_grid,
        args.delta,
        args.budget,
        seed=args.seed,
        confidence=args.confidence,
        workers=args.workers,
    )
    _emit_json({"dist": str(args.dist), **rep.to_json()})
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "solve": cmd_solve,
    "witness": cmd_witness,
    "threshold": cmd_threshold,
    "bounds": cmd_bounds,
    "sweep": cmd_sweep,
    "crossing": cmd_crossing,
    "sharpness": cmd_sharpness,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return EXIT_USAGE if exc.code else EXIT_OK
        logging.basicConfig(
            stream=sys.stderr,
            level=logging.WARNING - 10 * min(args.verbose, 2),
            format="nusat: %(levelname)s: %(message)s",
        )
        if args.command is None:
            parser.print_usage(sys.stderr)
            print("nusat: error: a subcommand is required", file=sys.stderr)
            return EXIT_USAGE
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"nusat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NusatError, OSError, ValueError) as exc:
        print(f"nusat: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
