"""Command-line driver: ``qfragile <subcommand> [options]``.

Exit codes: 0 success, 1 input error, 2 a checked bound failed.
Set ``QFRAGILE_THREADS`` to run sweep cells in parallel (default 1).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import checks, states
from .channels import apply_D
from .circuits import estimate_for, random_circuit, simulate, verify_haupt
from .fragility import EstimateConfig, bound_table, estimate_e, hypersurface_check, inner_sup, r_wn
from .linalg import MAX_QUBITS
from .observables import CANONICAL_P, as_family
from .specs import (
    SpecError, decode_matrix, encode_matrix, load_json, parse_channel, parse_circuit, parse_family, parse_state,
)

THREADS_ENV = "QFRAGILE_THREADS"


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        try:
            if ".." in part:
                lo, hi = (int(v) for v in part.split(".."))
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected integers or ranges like 2..10, got {part!r}")
    if not out or any(not 1 <= n <= MAX_QUBITS for n in out):
        raise argparse.ArgumentTypeError(f"qubit counts must lie in 1..{MAX_QUBITS}, got {text!r}")
    return sorted(set(out))


def _float_list(text: str) -> list[float]:
    try:
        out = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if any(not 0.0 <= w <= 1.0 for w in out):
        raise argparse.ArgumentTypeError(f"error probabilities must lie in [0, 1], got {text!r}")
    return sorted(set(out))


def _config(args, **over) -> EstimateConfig:
    fields = dict(restarts=args.restarts, max_evals=args.max_evals, seed=args.seed, method=args.method)
    fields.update(over)
    try:
        return EstimateConfig(**fields)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _emit(args, json_obj, header=None, rows=None) -> None:
    if args.format == "csv":
        if header is None:
            header, rows = list(json_obj), [list(json_obj.values())]
        text = _csv(header, rows)
    else:
        text = _json(json_obj)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- subcommands

def cmd_e_estimate(args) -> int:
    rho = parse_state(load_json(args.state, "--state"))
    n = states.n_qubits(rho)
    fam = parse_family(load_json(args.family, "--family"), n) if args.family else None
    if fam is not None:
        value, _ = inner_sup(rho, fam)
        angles = as_family(fam, n).angles.tolist()
        out = {"e": value, "witness_angles": angles, "starts": 1, "converged": True}
    else:
        out = estimate_e(rho, _config(args, families=args.families)).to_json()
    _emit(args, out)
    return 0


def cmd_channel_apply(args) -> int:
    rho = parse_state(load_json(args.state, "--state"))
    ch = parse_channel(load_json(args.channel, "--channel"))
    res = ch.apply(rho)
    out = res.rho
    if args.format == "csv":
        d = out.shape[0]
        rows = [(i, j, out[i, j].real, out[i, j].imag) for i in range(d) for j in range(d)]
        _emit(args, None, ("row", "col", "re", "im"), rows)
    else:
        _emit(args, {"rho": encode_matrix(out), "mode": res.mode, "branches": res.branches,
                     "seed": res.seed, "trace": float(np.trace(out).real)})
    return 0


def cmd_bounds_table(args) -> int:
    table = bound_table(args.n, args.w, args.alpha)
    records = list(table.records())
    if args.format == "json":
        _emit(args, records)
    else:
        _emit(args, None, table.HEADER, [[r[k] for k in table.HEADER] for r in records])
    return 0


def cmd_hypersurface(args) -> int:
    rho = parse_state(load_json(args.state, "--state"))
    n = states.n_qubits(rho)
    fam = parse_family(load_json(args.family, "--family"), n)
    if args.witness:
        c = decode_matrix(load_json(args.witness, "--witness"), "witness")
    else:
        _, c = inner_sup(rho, fam)
    res = hypersurface_check(rho, fam, c)
    _emit(args, {"value": res.value, "threshold": res.threshold,
                 "separable_consistent": res.separable_consistent,
                 "certifies_entanglement": res.certifies_entanglement})
    return 0


def cmd_circuit_run(args) -> int:
    if (args.circuit is None) == (args.random is None):
        raise InputError("give exactly one of --circuit or --random N")
    if args.circuit:
        c = parse_circuit(load_json(args.circuit, "--circuit"))
    else:
        c = random_circuit(args.random, args.w, args.error_model, args.seed)
    rho = simulate(c)
    report = estimate_for(c, rho, _config(args))
    verdict = verify_haupt(c, report, args.tol)
    _emit(args, {**report.to_json(), **verdict.to_json()})
    return 0 if verdict.passed else 2


def cmd_verify(args) -> int:
    only = set(args.only.split(",")) if args.only else None
    if only and not only <= set(checks.CHECKS):
        raise InputError(f"--only: unknown check(s) {sorted(only - set(checks.CHECKS))}; "
                         f"known: {', '.join(checks.CHECKS)}")
    results = checks.run_checks(args.level, args.seed, only)
    passed = sum(r.passed for r in results)
    if args.format == "json":
        _emit(args, {"level": args.level, "seed": args.seed, "passed": passed,
                     "total": len(results), "checks": [r.to_json() for r in results]})
    elif args.format == "csv":
        _emit(args, None, ("key", "passed", "cases", "worst"),
              [(r.key, r.passed, r.cases, r.worst) for r in results])
    else:
        lines = [r.line() for r in results] + [f"{passed}/{len(results)} checks passed"]
        text = "\n".join(lines) + "\n"
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    return 0 if passed == len(results) else 2


def _sweep_cell(cell, config):
    n, w = cell
    rho = apply_D(states.standard_state("cat", n), w).rho
    return n, w, estimate_e(rho, config).e_estimate, r_wn(n, w)


def cmd_sweep(args) -> int:
    config = _config(args)
    cells = [(n, w) for n in args.n for w in args.w]
    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(lambda cell: _sweep_cell(cell, config), cells))
    else:
        rows = [_sweep_cell(cell, config) for cell in cells]
    rows.sort(key=lambda r: (r[0], r[1]))
    header = ("n", "w", "e_D_cat", "r_wn")
    if args.format == "json":
        _emit(args, [dict(zip(header, r)) for r in rows])
    else:
        _emit(args, None, header, rows)
    return 0


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise InputError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


# ---------------------------------------------------------------- parser

def _common(p, fmt="json", formats=("json", "csv")):
    p.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")
    p.add_argument("--format", choices=formats, default=fmt, help=f"output format (default: {fmt})")
    p.add_argument("--output", "-o", help="write to this file instead of stdout")


def _optimizer(p):
    p.add_argument("--restarts", type=int, default=16,
                   help="local searches, the two canonical families included (default: 16)")
    p.add_argument("--max-evals", type=int, default=5000,
                   help="objective evaluations per local search (default: 5000)")
    p.add_argument("--method", choices=("nelder-mead", "ascent"), default="nelder-mead",
                   help="local search: Nelder-Mead with ascent polish, or the ascent alone "
                        "(default: nelder-mead)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qfragile", description=__doc__.splitlines()[0],
                     formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("e-estimate", help="estimate e for a state")
    p.add_argument("--state", required=True, help="state JSON (inline or file path)")
    p.add_argument("--family", help="evaluate only this projector family (JSON or \"P\")")
    p.add_argument("--families", choices=("all", CANONICAL_P), default="all",
                   help="optimize over all Bloch families or only the canonical P (default: all)")
    _optimizer(p)
    _common(p)
    p.set_defaults(func=cmd_e_estimate)

    p = sub.add_parser("channel-apply", help="apply G, D, G_l, D_l or a local error to a state")
    p.add_argument("--state", required=True, help="state JSON (inline or file path)")
    p.add_argument("--channel", required=True, help="channel JSON, e.g. '{\"channel\":\"D\",\"w\":0.1}'")
    _common(p)
    p.set_defaults(func=cmd_channel_apply)

    p = sub.add_parser("bounds-table", help="tabulate r_wn, the asymptotic bound and haupt_x")
    p.add_argument("--n", type=_int_list, required=True, help="qubit counts, e.g. 2..10 or 2,4,8")
    p.add_argument("--w", type=_float_list, required=True, help="error probabilities, e.g. 0.1,0.3")
    p.add_argument("--alpha", type=float, default=0.5, help="split point of the asymptotic bound (default: 0.5)")
    _common(p, "csv")
    p.set_defaults(func=cmd_bounds_table)

    p = sub.add_parser("hypersurface", help="test a state against the separable band +-2/sqrt(n)")
    p.add_argument("--state", required=True, help="state JSON (inline or file path)")
    p.add_argument("--family", default='"P"', help="projector family JSON (default: canonical P)")
    p.add_argument("--witness", help="witness matrix JSON with [re, im] entries "
                                     "(default: the optimal witness for the family)")
    _common(p)
    p.set_defaults(func=cmd_hypersurface)

    p = sub.add_parser("circuit-run", help="simulate a noisy circuit and check it against haupt_x")
    p.add_argument("--circuit", help="circuit JSON (inline or file path)")
    p.add_argument("--random", type=int, metavar="N", help="use a seeded random circuit on N qubits")
    p.add_argument("--w", type=float, default=0.1, help="gate error probability for --random (default: 0.1)")
    p.add_argument("--error-model", choices=("depolarizing", "dephasing"), default="depolarizing",
                   help="error model for --random (default: depolarizing)")
    p.add_argument("--tol", type=float, default=1e-6, help="tolerance of the bound check (default: 1e-6)")
    _optimizer(p)
    _common(p)
    p.set_defaults(func=cmd_circuit_run)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--level", choices=checks.LEVELS, default="quick", help="grid size (default: quick)")
    p.add_argument("--only", help="comma-separated check keys, e.g. 1,5,I3")
    _common(p, "text", ("text", "json", "csv"))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="e(D(cat)) against r_wn over an (n, w) grid")
    p.add_argument("--n", type=_int_list, required=True, help="qubit counts, e.g. 2..6")
    p.add_argument("--w", type=_float_list, required=True, help="error probabilities, e.g. 0.1,0.3")
    _optimizer(p)
    _common(p, "csv")
    p.set_defaults(func=cmd_sweep)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, SpecError, ValueError, OSError) as exc:
        print(f"qfragile {args.command}: error: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
