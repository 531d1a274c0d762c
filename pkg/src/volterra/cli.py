"""Command-line front end.

Subcommands: ``tensor`` (print a Poisson matrix), ``verify`` (run identity
families, JSON lines), ``integrate`` (trajectories as CSV or JSON).

Exit codes: 0 success, 1 some identity failed, 2 bad arguments, 3 numerical
domain error (singular matrix, off-leaf point, blow-up). Points and indices
are 1-based in all user-facing output; internally arrays are 0-based.
"""
import argparse
import contextlib
import json
import os
import sys

import numpy as np

from . import hierarchy, realization, uspace, verify
from .errors import VolterraError, Unsupported
from .flow import integrate, integrate_henon_vs_u, integrate_qp_vs_u, integrate_volterra

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


def _floats(text):
    try:
        return np.array([float(v) for v in text.split(",") if v.strip()], dtype=float)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _open_out(path):
    return open(path, "w", newline="") if path else contextlib.nullcontext(sys.stdout)


POINT_FLAGS = ("--at", "--x0")


def _glue_point_args(argv):
    """Rewrite ``--at -1,2`` as ``--at=-1,2`` so argparse does not read the value as a flag."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in POINT_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def _emit_matrix(M, fmt, out, meta):
    if fmt == "json":
        body = {"v": SCHEMA_VERSION, **meta, "matrix": M.tolist()}
        out.write(json.dumps(body) + "\n")
    elif fmt == "csv":
        for row in M:
            out.write(",".join(repr(float(v)) for v in row) + "\n")
    else:
        labels = meta.get("labels") or [str(i) for i in range(1, M.shape[0] + 1)]
        width = max(12, max(len(s) for s in labels) + 1)
        out.write(" " * width + "".join(s.rjust(width) for s in labels) + "\n")
        for lab, row in zip(labels, M):
            out.write(lab.rjust(width) + "".join(f"{v:{width}.6g}" for v in row) + "\n")


def cmd_tensor(args):
    x = args.at
    if args.space == "u":
        try:
            M = uspace.bracket_pi(args.index, x)
            how = "closed-form"
        except Unsupported:
            M = hierarchy.project_tensor(hierarchy.tensor_field(args.index, (x.size + 1) // 2), x)
            how = "projected"
        labels = [f"u{i}" for i in range(1, x.size + 1)]
    else:
        if x.size % 2:
            raise UsageError("a (q, p) point needs an even number of components")
        if args.n is not None and x.size != 2 * args.n:
            raise UsageError(f"--n {args.n} needs {2 * args.n} components, got {x.size}")
        M = hierarchy.generate_tensor(args.index, x)
        how = "closed-form" if args.index in (2, 3) else "recursion"
        n = x.size // 2
        labels = [f"q{i}" for i in range(1, n + 1)] + [f"p{i}" for i in range(1, n + 1)]
    meta = {"space": args.space, "index": args.index, "point": x.tolist(), "provenance": how, "labels": labels}
    with _open_out(args.output) as out:
        _emit_matrix(M, args.format, out, meta)
    return 0


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("VOLTERRA_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"VOLTERRA_SEED must be an integer, got {env!r}")


def cmd_verify(args):
    seed = _seed(args)
    jobs = []
    for family in args.family:
        ms, ns = args.m or [], args.n or []
        if not ms and not ns:
            if family in verify.QP_FAMILIES:
                ns = [3]
            else:
                ms = [5]
        for m in ms:
            if family not in verify.U_FAMILIES:
                raise UsageError(f"family {family} runs in (q, p) space; use --n")
            jobs.append((family, {"m": m}))
        for n in ns:
            if family not in verify.QP_FAMILIES:
                raise UsageError(f"family {family} runs in u-space; use --m")
            jobs.append((family, {"n": n}))
    ok = True
    with _open_out(args.output) as out:
        for family, size in jobs:
            try:
                rep = verify.run_identity_suite(
                    family, points=args.points, seed=seed, tolerance=args.tolerance, **size
                )
            except ValueError as exc:
                raise UsageError(str(exc))
            ok &= rep.passed
            if args.format == "pretty":
                status = "PASS" if rep.passed else "FAIL"
                out.write(f"{status} {rep.identity_id}: max residual {rep.max_residual:.3e} "
                          f"(tol {rep.tolerance:.0e}, {rep.points_tested} points)\n")
            else:
                out.write(json.dumps(rep.to_dict()) + "\n")
            out.flush()
    return 0 if ok else 1


def _write_traj(columns, rows, summary, args):
    with _open_out(args.output) as out:
        if args.format == "json":
            out.write(json.dumps({"v": SCHEMA_VERSION, "columns": columns,
                                  "rows": rows.tolist(), "summary": summary}) + "\n")
        else:
            out.write(",".join(columns) + "\n")
            for row in rows:
                out.write(",".join(repr(float(v)) for v in row) + "\n")
    print(json.dumps({"v": SCHEMA_VERSION, "summary": summary}), file=sys.stderr)


def cmd_integrate(args):
    x0 = args.x0
    if args.space == "u":
        tr = integrate_volterra(x0, args.t_end, args.dt)
        summary = {"max_H_drift": tr.max_drift("H")}
        if tr.meta["eigenvalue_monitor"]:
            summary["max_eigenvalue_drift"] = tr.max_drift("lambda", relative=False)
        else:
            summary["eigenvalue_monitor"] = tr.meta["eigenvalue_monitor_reason"]
        _write_traj(tr.columns(), tr.rows(), summary, args)
        return 0
    if args.space in ("qp", "paired"):
        if x0.size % 2 or (args.n is not None and x0.size != 2 * args.n):
            raise UsageError("--x0 must hold 2n phase-space components")
        n = x0.size // 2
    if args.space == "qp":
        mon = lambda x: {"h1": realization.hamiltonian_h(x, 1), "h2": realization.hamiltonian_h(x, 2)}
        tr = integrate(realization.hamiltonian_field(n), x0, args.t_end, args.dt, mon)
        _write_traj(tr.columns(), tr.rows(), {"max_h_drift": tr.max_drift("h")}, args)
        return 0
    if args.space == "paired":
        pair = integrate_qp_vs_u(x0, args.t_end, args.dt)
        names = [f"q{i}" for i in range(1, n + 1)] + [f"p{i}" for i in range(1, n + 1)]
        names += [f"u{i}" for i in range(1, 2 * n)]
    else:
        if x0.size % 2 == 0:
            raise UsageError("henon pairing needs an odd number of u components")
        pair = integrate_henon_vs_u(x0, args.t_end, args.dt)
        k = (x0.size + 1) // 2
        names = [f"a{i}" for i in range(1, k)] + [f"b{i}" for i in range(1, k + 1)]
        names += [f"u{i}" for i in range(1, x0.size + 1)]
    rows = np.hstack([pair.first.times[:, None], pair.first.states, pair.second.states, pair.gap[:, None]])
    _write_traj(["t"] + names + ["gap"], rows, {"max_gap": pair.max_gap}, args)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="volterra", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tensor", help="print a Poisson matrix at a point")
    p.add_argument("--space", choices=["u", "qp"], required=True)
    p.add_argument("--index", type=int, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--at", type=_floats, required=True, help="comma-separated point")
    p.add_argument("--format", choices=["json", "csv", "pretty"], default="json")
    p.add_argument("--output")
    p.set_defaults(func=cmd_tensor)

    p = sub.add_parser("verify", help="run identity families, one JSON line per (family, size)")
    p.add_argument("--family", action="append", choices=verify.FAMILIES, required=True)
    p.add_argument("--m", type=int, nargs="+")
    p.add_argument("--n", type=int, nargs="+")
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--seed", type=int, help="falls back to $VOLTERRA_SEED, then 0")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--format", choices=["json", "pretty"], default="json")
    p.add_argument("--output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("integrate", help="RK4 trajectories with conservation monitors")
    p.add_argument("--space", choices=["u", "qp", "paired", "henon"], required=True)
    p.add_argument("--x0", type=_floats, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--t-end", dest="t_end", type=float, required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--output")
    p.set_defaults(func=cmd_integrate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(_glue_point_args(sys.argv[1:] if argv is None else list(argv)))
    if getattr(args, "points", 0) is not None and getattr(args, "points", 0) < 0:
        parser.error("--points must be >= 0")
    if args.command == "integrate" and not (args.dt > 0 and args.t_end >= 0):
        parser.error("need --dt > 0 and --t-end >= 0")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"volterra: error: {exc}", file=sys.stderr)
        return 2
    except VolterraError as exc:
        print(json.dumps({"v": SCHEMA_VERSION, **exc.to_dict()}))
        print(f"volterra: {exc}", file=sys.stderr)
        return 3
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"volterra: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
