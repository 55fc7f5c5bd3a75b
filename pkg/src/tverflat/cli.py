"""``tverflat`` command line: gen, solve, verify, radon, sweep.

Exit status: 0 success/accept, 1 input or usage error, 2 solve failure/reject.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import io
from .certificate import verify
from .errors import MalformedCertificate, TverflatError
from .geometry import exact_array
from .instances import DEGENERACIES, DISTRIBUTIONS, GadgetSpec, gen_degenerate, gen_gadget, gen_random
from .radon import radon_partition
from .solver import STRATEGIES, SolveFailed, SolverConfig, solve
from .sweep import parse_cells, run_sweep

EXIT_OK, EXIT_INPUT, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 by default, which here means "reject"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _emit(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise UsageError(f"cannot read {path}: {err.strerror or err}") from err


def known_certificate_path(path: str) -> Path:
    p = Path(path)
    return p.with_name(p.stem + ".cert" + (p.suffix or ".json"))


def _tuple_str(v) -> str:
    return "(" + ", ".join(io.scalar_str(x) for x in v) + ")"


def _config(args) -> SolverConfig:
    threads = args.threads if args.threads is not None else (os.cpu_count() or 1)
    try:
        return SolverConfig(strategy=args.strategy, restarts=args.restarts,
                            max_iters=args.max_iters, tol_success=args.tol,
                            seed=args.seed, time_budget=args.time_budget, threads=threads)
    except ValueError as err:
        raise UsageError(str(err)) from err


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args) -> int:
    d, k = args.d, args.k
    if not 0 <= k < d:
        raise UsageError(f"need 0 <= k < d, got d={d}, k={k}")
    if args.gadget:
        inst, cert = gen_gadget(GadgetSpec(d, k))
        _emit(io.dump_instance(inst), args.output)
        if args.output not in (None, "-"):
            known_certificate_path(args.output).write_text(io.dump_certificate(cert), encoding="utf-8")
        return EXIT_OK
    if args.degenerate:
        inst = gen_degenerate(d, k, args.degenerate, seed=args.seed)
    else:
        inst = gen_random(d, k, args.distribution, seed=args.seed)
    _emit(io.dump_instance(inst), args.output)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = io.load_instance(_read(args.instance))
    cfg = _config(args)
    try:
        cert = solve(inst, cfg)
    except SolveFailed as fail:
        rep = fail.report
        diag = {
            "status": "failed",
            "best_residual": rep.best_residual,
            "restarts": rep.restarts,
            "strategy": rep.strategy,
            "tol": cfg.tol_success,
            "best_certificate": io.certificate_to_obj(rep.best_certificate)
            if rep.best_certificate is not None else None,
        }
        sys.stdout.write(json.dumps(diag, indent=1) + "\n")
        return EXIT_FAIL
    _emit(io.dump_certificate(cert), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = io.load_instance(_read(args.instance))
    cert = io.load_certificate(_read(args.certificate), d=inst.d)
    try:
        rep = verify(inst, cert, tol=args.tol)
    except MalformedCertificate as err:
        sys.stdout.write("verdict: MALFORMED\n")
        for key, msg in sorted(err.problems.items()):
            sys.stdout.write(f"problem: {key}: {msg}\n")
        return EXIT_INPUT
    lines = list(rep.lines())
    accepted = rep.accepted
    if args.exact and not rep.exact:
        accepted = False
        lines[0] = "verdict: REJECT"
        lines.append("note: exact acceptance required")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK if accepted else EXIT_FAIL


def cmd_radon(args) -> int:
    pts = io.load_points(_read(args.points))
    n, m = pts.shape
    if n < m + 2:
        raise UsageError(f"need at least {m + 2} points in R^{m}, got {n}")
    R = radon_partition(exact_array(pts))
    a, b = R.parts
    out = [
        f"partition: {{{','.join(map(str, a))}}} | {{{','.join(map(str, b))}}}",
        f"zeros: {{{','.join(map(str, R.zeros))}}}",
        f"radon point: {_tuple_str(R.point)}",
        f"dependence: {_tuple_str(R.dependence.coefficients)}",
    ]
    sys.stdout.write("\n".join(out) + "\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        cells = parse_cells(args.cells)
    except ValueError as err:
        raise UsageError(str(err)) from err
    if args.trials < 0 or args.degenerate < 0:
        raise UsageError("trial counts must be nonnegative")
    cfg = _config(args)
    report = run_sweep(cells, args.trials, seed=args.seed, config=cfg,
                       degenerate=args.degenerate, distribution=args.distribution)
    sys.stdout.write("\n".join(report.text_lines()) + "\n")
    if args.json:
        _emit(json.dumps(report.to_json(timing=args.timing), indent=1, sort_keys=True) + "\n", args.json)
    return EXIT_OK if report.failures == 0 else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser


def _solver_flags(p, tol_help="success tolerance on the residual"):
    p.add_argument("--tol", type=float, default=1e-6, help=tol_help)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--strategy", choices=STRATEGIES, default="radon-trace")
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--max-iters", type=int, default=400)
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: logical CPUs)")
    p.add_argument("--time-budget", type=float, default=30.0, help="seconds per instance")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="tverflat", description="Transversal flats for 2-partitions of point sets.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate an instance")
    mode = g.add_mutually_exclusive_group(required=True)
    mode.add_argument("--gadget", action="store_true", help="barycentre gadget (plus known certificate)")
    mode.add_argument("--random", action="store_true", help="random dyadic points")
    mode.add_argument("--degenerate", choices=DEGENERACIES)
    g.add_argument("-d", type=int, required=True)
    g.add_argument("-k", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--distribution", choices=DISTRIBUTIONS, default="unit-cube")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="find a certificate")
    s.add_argument("instance")
    _solver_flags(s)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a certificate against an instance")
    v.add_argument("instance")
    v.add_argument("certificate")
    v.add_argument("--tol", type=float, default=1e-6)
    v.add_argument("--exact", action="store_true", help="accept only an exactly zero residual")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("radon", help="Radon partition of a point list")
    r.add_argument("points")
    r.set_defaults(func=cmd_radon)

    w = sub.add_parser("sweep", help="solve random instances per (d, k) cell")
    w.add_argument("--cells", default="2:1,3:1,3:2")
    w.add_argument("--trials", type=int, default=100)
    w.add_argument("--degenerate", type=int, default=0, help="instances per degenerate kind per cell")
    w.add_argument("--distribution", choices=DISTRIBUTIONS, default="unit-cube")
    w.add_argument("--json", help="write the machine-readable report here ('-' for stdout)")
    w.add_argument("--timing", action="store_true", help="include wall times in the JSON report")
    _solver_flags(w)
    w.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, io.FormatError, TverflatError, ValueError) as err:
        sys.stderr.write(f"tverflat {args.command}: error: {err}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
