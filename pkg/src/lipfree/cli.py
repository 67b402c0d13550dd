"""Command-line front end.

Exit codes: 0 completed with a positive or unrefuted verdict, 1 completed with
a negative verdict, 2 usage or parse error, 3 solver failure or inconclusive
cross-check.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from ._config import DEFAULT_TOL
from .classify import (INCONCLUSIVE, NEGATIVE, _jsonable, classify_connectable,
                       classify_daugavet_element, classify_daugavet_molecule, delta_ball_test,
                       delta_slice_test, length_space_test)
from .corpus import EXAMPLE_NAMES, ExampleSpec
from .elements import molecule
from .exceptions import BoundViolation, DomainError, MetricStructureError, SolverError
from .freespace import free_norm, make_slice
from .io import SpaceFileError, dumps_space, load_space, parse_element, parse_function
from .lipschitz import locality_profile
from .metric import validate_metric

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _parse_kv(items):
    out = {}
    for it in items:
        key, sep, val = it.partition("=")
        if not sep or not key:
            raise UsageError(f"expected key=value, got {it!r}")
        out[key.strip()] = val.strip()
    return out


def example_spec_from(name, kv, seed=0):
    kv = dict(kv)
    try:
        k = int(kv.pop("k", 20))
        seed = int(kv.pop("seed", seed))
        params = {key: float(v) for key, v in kv.items()}
    except ValueError as exc:
        raise UsageError(f"bad example parameter ({exc})") from None
    if name not in EXAMPLE_NAMES:
        raise UsageError(f"unknown example {name!r}; known: {', '.join(EXAMPLE_NAMES)}")
    return ExampleSpec(name, k, params, seed)


def open_space(source, tol, validate=True):
    """A space file path, or ``example:NAME[:key=value,...]``."""
    if source.startswith("example:") and not os.path.exists(source):
        _, _, rest = source.partition(":")
        name, _, args = rest.partition(":")
        kv = _parse_kv([a for a in args.split(",") if a]) if args else {}
        return example_spec_from(name, kv).build()
    return load_space(source, validate=validate, tol=tol)


def _tolerances(args):
    tol = DEFAULT_TOL
    if getattr(args, "tol_opt", None) is not None:
        tol = tol.with_(opt=args.tol_opt)
    if getattr(args, "tol_feas", None) is not None:
        tol = tol.with_(feas=args.tol_feas)
    return tol


def _emit(args, structured, table):
    text = (json.dumps(_jsonable(structured), indent=2, sort_keys=True)
            if args.format == "structured" else table)
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_validate(args):
    tol = _tolerances(args)
    space = open_space(args.space, tol, validate=False)
    rep = validate_metric(space, tol)
    structured = {
        "valid": rep.ok,
        "n_points": space.n,
        "violations": [{"kind": v.kind, "points": list(v.points), "detail": v.detail}
                       for v in rep.violations],
    }
    lines = [f"{'VALID' if rep.ok else 'INVALID'}: {space.n} points"]
    for v in rep.violations:
        lines.append(f"  {v.kind}: {', '.join(v.points)}: {v.detail}")
    _emit(args, structured, "\n".join(lines))
    return EXIT_OK if rep.ok else EXIT_NEGATIVE


def cmd_norm(args):
    tol = _tolerances(args)
    space = open_space(args.space, tol)
    if args.molecule:
        if args.element:
            raise UsageError("give either an element literal or --molecule, not both")
        mu = molecule(space, *args.molecule)
    elif args.element:
        mu = parse_element(space, args.element)
    else:
        raise UsageError("an element literal or --molecule X Y is required")
    res = free_norm(space, mu, method=args.method, cross_check=True, tol=tol, debug=args.dump)
    cert = {space.points[i]: float(v) for i, v in enumerate(res.certificate.values)}
    structured = {
        "element": mu.format(space),
        "norm": res.value,
        "method": res.method,
        "dual_value": res.dual,
        "primal_value": res.primal,
        "residual": res.residual,
        "slackness": res.slackness,
        "certificate": cert,
    }
    lines = [
        f"element      {mu.format(space)}",
        f"norm         {res.value:.12g}",
        f"dual (LP)    {res.dual:.12g}",
        f"primal (OT)  {res.primal:.12g}",
        f"residual     {res.residual:.3g}",
        f"slackness    {res.slackness:.3g}",
        "certificate (1-Lipschitz, vanishing at base):",
    ]
    lines += [f"  {p:<12} {v:.12g}" for p, v in cert.items()]
    if args.dump and res.debug:
        structured["debug"] = res.debug
        lines.append(res.debug)
    _emit(args, structured, "\n".join(lines))
    if res.residual >= tol.opt or res.slackness >= tol.slackness:
        sys.stderr.write("solver routes disagree beyond tolerance\n")
        return EXIT_SOLVER
    return EXIT_OK


def _need_points(args, n=2):
    if len(args.points) != n:
        raise UsageError(f"mode {args.mode} needs exactly {n} point names")
    return args.points


def cmd_classify(args):
    tol = _tolerances(args)
    space = open_space(args.space, tol)
    mode = args.mode
    reports = []
    if mode == "daugavet":
        if args.element:
            if args.points:
                raise UsageError("give either point names or --element, not both")
            mu = parse_element(space, args.element)
            reports.append(classify_daugavet_element(space, mu, args.eta, args.h, tol))
        else:
            x, y = _need_points(args)
            reports.append(classify_daugavet_molecule(space, x, y, args.eta, args.h, tol))
    elif mode == "delta":
        x, y = _need_points(args)
        reports.append(delta_ball_test(space, x, y, args.radii, args.eps, tol))
        slices = None
        if args.function:
            slices = [make_slice(space, parse_function(space, f, tol), args.alpha, f)
                      for f in args.function]
        reports.append(delta_slice_test(space, x, y, slices, args.scale, args.alpha,
                                        seed=args.seed, tol=tol))
    elif mode == "connectable":
        x, y = _need_points(args)
        reports.append(classify_connectable(space, x, y, args.eps, args.step, alpha=args.alpha,
                                            seed=args.seed, tol=tol))
    elif mode == "length":
        if args.points:
            raise UsageError("mode length takes no point names")
        step = args.step
        if args.delta is None and step is None:
            step = space.resolution or None
        if args.delta is None and step is None:
            raise UsageError("mode length needs --delta or --step (space has no resolution)")
        reports.append(length_space_test(space, args.delta, step, tol))
    verdicts = [r.verdict for r in reports]
    overall = (INCONCLUSIVE if INCONCLUSIVE in verdicts
               else NEGATIVE if NEGATIVE in verdicts else "positive")
    structured = {"mode": mode, "verdict": overall, "reports": [r.to_dict() for r in reports]}
    table = "\n\n".join(r.to_table() for r in reports)
    if len(reports) > 1:
        table += f"\n\noverall: {overall.upper()}"
    _emit(args, structured, table)
    if overall == INCONCLUSIVE:
        return EXIT_SOLVER
    return EXIT_NEGATIVE if overall == NEGATIVE else EXIT_OK


def cmd_example(args):
    spec = example_spec_from(args.name, _parse_kv(args.params), args.seed)
    space = spec.build()
    text = dumps_space(space)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        sys.stderr.write(f"wrote {space.n} points to {args.out}\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_scan(args):
    tol = _tolerances(args)
    space = open_space(args.space, tol)
    f = parse_function(space, args.function, tol)
    scales = sorted(set(args.scales), reverse=True)
    prof = locality_profile(space, f, scales)
    rows = []
    for row in prof.rows():
        pair = row["best_pair"]
        rows.append({
            "scale": row["scale"],
            "best_slope": row["best_slope"],
            "best_pair": [space.points[i] for i in pair] if pair else None,
            "epsilon_point_count": row["epsilon_point_count"],
            "local": row["local"],
        })
    structured = {"function": args.function, "lipschitz_constant": prof.lipschitz_constant,
                  "rows": rows}
    lines = [f"lipschitz constant {prof.lipschitz_constant:.10g}",
             f"{'scale':>12} {'best slope':>12} {'eps-points':>10}  pair"]
    for r in rows:
        if r["best_slope"] is None:
            lines.append(f"{r['scale']:>12.6g} {'empty':>12} {0:>10}")
        else:
            lines.append(f"{r['scale']:>12.6g} {r['best_slope']:>12.6g} "
                         f"{r['epsilon_point_count']:>10}  {', '.join(r['best_pair'])}")
    _emit(args, structured, "\n".join(lines))
    return EXIT_OK


def _common(p, tolerances=True):
    p.add_argument("--format", choices=("table", "structured"), default="table")
    p.add_argument("--out", help="write the report here instead of stdout")
    if tolerances:
        p.add_argument("--tol-opt", type=float, help="LP optimality tolerance")
        p.add_argument("--tol-feas", type=float, help="feasibility tolerance")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lipfree",
        description="Free-space norms and Daugavet / delta-point classification on finite "
                    "metric spaces. SPACE is a space file or example:NAME[:k=..,key=..].")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the metric axioms of a space file")
    p.add_argument("space")
    _common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("norm", help="free norm of an element, with certificate")
    p.add_argument("space")
    p.add_argument("element", nargs="?", help='literal such as "1*x - 0.5*y"')
    p.add_argument("--molecule", nargs=2, metavar=("X", "Y"))
    p.add_argument("--method", choices=("lp", "transport"), default="lp")
    p.add_argument("--dump", action="store_true", help="print the final tableau and flow")
    _common(p)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("classify", help="Daugavet, delta-point, connectable or length tests")
    p.add_argument("space")
    p.add_argument("mode", choices=("daugavet", "delta", "connectable", "length"))
    p.add_argument("points", nargs="*")
    p.add_argument("--element", help="element literal (daugavet mode)")
    p.add_argument("--eta", type=float, help="segment slack (default: space resolution)")
    p.add_argument("--h", type=float, help="pair-distance cutoff (default: space resolution)")
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--step", type=float, help="path step bound (default: space resolution)")
    p.add_argument("--scale", type=float, help="slice separation scale")
    p.add_argument("--alpha", type=float, default=0.1,
                   help="slice width for --function slices and built-in slices (default 0.1)")
    p.add_argument("--delta", type=float, help="constant Mid-set budget (length mode)")
    p.add_argument("--radii", type=float, nargs="+", help="lens radii (delta mode)")
    p.add_argument("--function", action="append",
                   help="slice functional literal (delta mode, repeatable)")
    p.add_argument("--seed", type=int, default=0)
    _common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("example", help="write an example space file")
    p.add_argument("name", help=", ".join(EXAMPLE_NAMES))
    p.add_argument("params", nargs="*", help="key=value, e.g. k=50 r=0.4")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("scan", help="locality profile of a function")
    p.add_argument("space")
    p.add_argument("function", help="[[name, value], ...], fxy:x,y, dist-to:p, plateau:alpha")
    p.add_argument("--scales", type=float, nargs="+", required=True)
    _common(p)
    p.set_defaults(func=cmd_scan)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, SpaceFileError, MetricStructureError, DomainError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (SolverError, BoundViolation) as exc:
        sys.stderr.write(f"solver failure: {exc}\n")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
