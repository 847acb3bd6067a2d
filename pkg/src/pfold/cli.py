"""Command line entry point ``pfold``.

Exit status: 0 when every hard check passes, 1 on configuration or solver
failure, 2 when a computed property is violated.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import estimates as est
from . import report
from .branch import Branch, BranchPoint, extremal_profile, trace, worker_count
from .errors import ConfigError, PFoldError
from .radial_ode import flux_residual, singular_lambda, solve_on_branch
from .stability import mu1, stability_threshold_scan

log = logging.getLogger("pfold")

EXIT_OK, EXIT_FAILURE, EXIT_VIOLATION = 0, 1, 2
SEMISTABLE_TOL = 1e-6
ORACLE_TOL = 1e-8

CSV_HELP = """\
CSV files:
  profile        r, u, du, w        (w = r^(n-1) |u'|^(p-2) u')
  branch         a, lambda, sup_norm, mu1, nedev_integral, key_ineq_min_slack
  eigenfunction  r, v
Floats carry 17 significant digits; empty cells mean "not computed".
"""


# ---------------------------------------------------------------- configuration


def _overrides(args) -> dict:
    """Raw config fragments from command-line flags."""
    out: dict = {}

    def put(section, key, value):
        if value is not None:
            out.setdefault(section, {})[key] = value

    put("problem", "p", getattr(args, "p", None))
    put("problem", "n", getattr(args, "n", None))
    put("problem", "R", getattr(args, "R", None))
    if getattr(args, "kind", None) is not None:
        nonlin = {"kind": args.kind}
        if args.m is not None:
            nonlin["m"] = args.m
        put("problem", "nonlinearity", nonlin)
    put("grid", "N", getattr(args, "N", None))
    put("grid", "gamma", getattr(args, "gamma", None))
    put("tolerances", "ode", getattr(args, "ode_tol", None))
    put("tolerances", "root", getattr(args, "root_tol", None))
    put("tolerances", "quadrature", getattr(args, "quad_tol", None))
    put("sweep", "a_min", getattr(args, "a_min", None))
    put("sweep", "a_max", getattr(args, "a_max", None))
    put("sweep", "steps", getattr(args, "steps", None))
    if getattr(args, "seed", None) is not None:
        out["seed"] = args.seed
    return out


def _raw_config(path) -> dict:
    if path is None:
        return {}
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        import json

        return json.loads(text)
    return cfgmod.tomllib.loads(text)


def resolve_config(args) -> cfgmod.ScenarioConfig:
    """Config file merged with flag overrides (flags win)."""
    try:
        raw = _raw_config(args.config)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(args.config), f"cannot read: {exc}") from exc
    for section, values in _overrides(args).items():
        if isinstance(values, dict):
            merged = dict(raw.get(section, {}))
            merged.update(values)
            raw[section] = merged
        else:
            raw[section] = values
    if args.config is None:
        raw.setdefault("problem", {}).setdefault("nonlinearity", {"kind": "exponential"})
    return cfgmod.from_dict(raw)


def _prov(cfg, module):
    return report.provenance(module, {"ode": cfg.tolerances.ode, "root": cfg.tolerances.root,
                                      "quadrature": cfg.tolerances.quadrature},
                             {"N": cfg.grid.N, "gamma": cfg.grid.gamma}, cfg.seed)


def _write(cfg, key, path, text):
    target = path or cfg.outputs.paths.get(key)
    if target:
        report.atomic_write(target, text)
        log.info("wrote %s", target)
    return target


# ---------------------------------------------------------------- orchestration


def _solve(cfg, a):
    lam, sol = solve_on_branch(cfg.problem, a, N=cfg.grid.N, gamma=cfg.grid.gamma,
                               **cfg.tolerances.solver_kwargs())
    return lam, sol


def annotate_point(pt: BranchPoint, semistable: bool, quad_tol: float, estimates: bool = True):
    """Attach mu1 and the estimate summary to a converged branch point."""
    sol = pt.solution
    try:
        pt.mu1 = mu1(sol).mu1
    except PFoldError as exc:
        log.warning("mu1 failed at a=%g: %s", pt.a, exc)
    if estimates:
        rep = est.verify_solution(sol, semistable=semistable, quad_tol=quad_tol)
        pt.estimates = {"nedev": rep.aggregates["nedev"], "key_ineq_min_slack": rep.aggregates["key_ineq_min_slack"],
                        "report": rep}
    return pt


def annotate_branch(branch: Branch, quad_tol: float, estimates: bool = True) -> Branch:
    minimal = {id(pt) for pt in branch.minimal_points()}
    todo = [pt for pt in branch.points if pt.failure is None]
    job = lambda pt: annotate_point(pt, id(pt) in minimal, quad_tol, estimates)
    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(job, todo))
    else:
        for pt in todo:
            job(pt)
    return branch


def branch_report(cfg, branch: Branch) -> dict:
    body = branch.to_dict()
    body["provenance"] = _prov(cfg, "pfold.branch")
    checks, aggregates = [], {}
    for pt in branch.points:
        rep = (pt.estimates or {}).get("report")
        if rep is None:
            continue
        for rec in rep.records:
            d = rec.to_dict()
            d["params"] = dict(d["params"], a=pt.a)
            checks.append(d)
    pts = [pt for pt in branch.minimal_points() if pt.estimates]
    if pts:
        a_vals = [pt.a for pt in pts]
        for key in ("nedev", "ned4"):
            vals = [pt.estimates["report"].aggregates[key] for pt in pts]
            ok, top, ref = est.plateau(vals, a_vals)
            aggregates[f"{key}_plateau"] = {"ok": ok, "max": top, "at_90pct": ref}
        aggregates["branch_norms"] = est.branch_norms(branch)
    body["checks"] = checks
    body["aggregates"] = aggregates
    if branch.ok_points and branch.method != "none":
        ext = extremal_profile(branch)
        body["extremal"] = {"a": ext.point.a, "lambda": ext.point.lam, "singular_gap": ext.singular_gap}
    return body


def _hard_failures(checks) -> int:
    return sum(1 for c in checks if c.get("hard") and not c.get("passed"))


# ---------------------------------------------------------------- subcommands


def cmd_solve(args, cfg):
    lam, sol = _solve(cfg, args.a)
    print(f"lambda = {report.fmt_float(lam)}  a = {report.fmt_float(sol.a)}  u(R) = {sol.boundary_residual:.3e}")
    _write(cfg, "profile", args.out, report.profile_csv(sol))
    body = {"problem": cfg.problem.to_dict(), "a": sol.a, "lambda": lam,
            "boundary_residual": sol.boundary_residual, "provenance": _prov(cfg, "pfold.radial_ode")}
    _write(cfg, "report", args.report, report.dumps(body))
    if args.plot:
        report.atomic_write(args.plot, report.gnuplot_script("profile", args.out or "profile.csv"))
    return EXIT_OK


def cmd_branch(args, cfg):
    sw = cfg.sweep
    branch = trace(cfg.problem, sw.a_min, sw.a_max, steps=sw.steps, refine=sw.refine, N=cfg.grid.N,
                   gamma=cfg.grid.gamma, tolerances=cfg.tolerances.solver_kwargs())
    annotate_branch(branch, cfg.tolerances.quadrature, estimates=not args.no_estimates)
    body = branch_report(cfg, branch)
    out = _write(cfg, "branch", args.out, report.branch_csv(branch))
    _write(cfg, "report", args.report, report.dumps(body))
    if args.plot:
        report.atomic_write(args.plot, report.gnuplot_script("branch", out or "branch.csv"))
    fold = branch.fold
    print(f"points = {len(branch.ok_points)}/{len(branch.points)}  method = {branch.method}  "
          f"lambda* = {report.fmt_float(branch.lambda_star_estimate)}"
          + (f"  a_fold = {report.fmt_float(fold[0])}" if fold else ""))
    if len(branch.ok_points) < len(branch.points):
        return EXIT_FAILURE
    return EXIT_VIOLATION if _hard_failures(body["checks"]) else EXIT_OK


def cmd_stability(args, cfg):
    lam, sol = _solve(cfg, args.a)
    rep = mu1(sol)
    body = {"problem": cfg.problem.to_dict(), "a": sol.a, "lambda": lam, **rep.to_dict(),
            "provenance": _prov(cfg, "pfold.stability")}
    print(report.dumps(body), end="")
    if args.eigen_out:
        report.atomic_write(args.eigen_out, report.csv_text(report.EIGEN_COLUMNS, zip(rep.nodes, rep.eigenfunction)))
    _write(cfg, "report", args.out, report.dumps(body))
    return EXIT_OK


def _verify_point(cfg, a, expected_lam=None):
    lam, sol = _solve(cfg, a)
    stab = mu1(sol)
    rep = est.verify_solution(sol, semistable=stab.mu1 >= -SEMISTABLE_TOL, quad_tol=cfg.tolerances.quadrature)
    if expected_lam is not None:
        rep.records.insert(0, est.CheckRecord("branch_roundtrip", {"rtol": 10 * cfg.tolerances.root},
                                              lhs=lam, rhs=expected_lam, kind="identity"))
    checks = []
    for rec in rep.records:
        d = rec.to_dict()
        d["params"] = dict(d["params"], a=a)
        checks.append(d)
    return checks, dict(rep.aggregates, a=a, **{"lambda": lam, "mu1": stab.mu1})


def cmd_verify(args, cfg):
    if args.branch:
        rows = report.read_csv(args.branch)
        targets = [(row["a"], row["lambda"]) for row in rows]
    elif args.a is not None:
        targets = [(args.a, None)]
    else:
        raise ConfigError("verify", "need --a or --branch")
    checks, aggregates = [], []
    for a, lam in targets:
        c, agg = _verify_point(cfg, a, lam)
        checks.extend(c)
        aggregates.append(agg)
    body = {"problem": cfg.problem.to_dict(), "checks": checks, "aggregates": aggregates,
            "provenance": _prov(cfg, "pfold.estimates")}
    _write(cfg, "report", args.out, report.dumps(body))
    bad = _hard_failures(checks)
    print(f"checks = {len(checks)}  hard failures = {bad}")
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_oracle(args, cfg):
    pr = cfg.problem
    if pr.nonlinearity.kind != "exponential":
        raise ConfigError("problem.nonlinearity.kind", "the singular oracle needs the exponential nonlinearity")
    lam = singular_lambda(pr.p, pr.n)
    r = np.geomspace(1e-4, 1.0, 200)
    res = float(np.max(np.abs(flux_residual(pr, lam, lambda x: -pr.p * np.log(x), r))))
    print(f"lambda_s = {report.fmt_float(lam)}  residual = {res:.3e}  n_c = {report.fmt_float(pr.n_c)}")
    body = {"problem": pr.to_dict(), "lambda_s": lam, "residual": res, "n_c": pr.n_c,
            "provenance": _prov(cfg, "pfold.radial_ode")}
    _write(cfg, "report", args.out, report.dumps(body))
    return EXIT_OK if res < ORACLE_TOL else EXIT_VIOLATION


def cmd_threshold_scan(args, cfg):
    p = cfg.problem.p
    rng = None if args.n_min is None else (args.n_min, args.n_max)
    scan = stability_threshold_scan(p, rng, N=cfg.grid.N)
    print(f"n* = {report.fmt_float(scan.n_star)}  p + 4p/(p-1) = {report.fmt_float(scan.n_formula)}  "
          f"deviation = {scan.deviation:.3e}")
    body = {"p": p, **scan.to_dict(), "provenance": _prov(cfg, "pfold.stability")}
    _write(cfg, "report", args.out, report.dumps(body))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _common(sp, need_n=True):
    g = sp.add_argument_group("scenario (flags override the config file)")
    g.add_argument("--config", help="TOML or JSON scenario file")
    g.add_argument("--p", type=float, help="exponent p in (1, 2]")
    if need_n:
        g.add_argument("--n", type=float, help="real dimension n >= 2")
    g.add_argument("--R", type=float, help="ball radius")
    g.add_argument("--kind", choices=("exponential", "power", "mems"), help="nonlinearity")
    g.add_argument("--m", type=float, help="nonlinearity parameter")
    g.add_argument("--N", type=int, help="grid intervals")
    g.add_argument("--gamma", type=float, help="grid grading exponent")
    g.add_argument("--ode-tol", type=float)
    g.add_argument("--root-tol", type=float)
    g.add_argument("--quad-tol", type=float)
    g.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pfold", description="Radial singular p-Laplace branches and estimates.",
                                     epilog=CSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.RawDescriptionHelpFormatter

    sp = sub.add_parser("solve", help="solution with a given center value", epilog=CSV_HELP, formatter_class=fmt)
    _common(sp)
    sp.add_argument("--a", type=float, required=True, help="center value u(0)")
    sp.add_argument("--out", help="profile CSV")
    sp.add_argument("--report", help="JSON report")
    sp.add_argument("--plot", help="gnuplot script path")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("branch", help="trace the minimal branch", epilog=CSV_HELP, formatter_class=fmt)
    _common(sp)
    sp.add_argument("--a-min", type=float)
    sp.add_argument("--a-max", type=float)
    sp.add_argument("--steps", type=int)
    sp.add_argument("--out", help="branch CSV")
    sp.add_argument("--report", help="JSON report")
    sp.add_argument("--plot", help="gnuplot script path")
    sp.add_argument("--no-estimates", action="store_true", help="skip the estimate checks per point")
    sp.set_defaults(func=cmd_branch)

    sp = sub.add_parser("stability", help="first radial eigenvalue at a center value", epilog=CSV_HELP,
                        formatter_class=fmt)
    _common(sp)
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--eigen-out", help="eigenfunction CSV")
    sp.add_argument("--out", help="JSON report")
    sp.set_defaults(func=cmd_stability)

    sp = sub.add_parser("verify", help="estimate checks at a point or along a branch CSV", epilog=CSV_HELP,
                        formatter_class=fmt)
    _common(sp)
    grp = sp.add_mutually_exclusive_group()
    grp.add_argument("--a", type=float)
    grp.add_argument("--branch", help="branch CSV written by 'pfold branch'")
    sp.add_argument("--out", help="JSON report")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("oracle", help="singular solution parameter and residual")
    _common(sp)
    sp.add_argument("--out", help="JSON report")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("threshold-scan", help="dimension where the singular solution becomes stable")
    _common(sp, need_n=False)
    sp.add_argument("--n-min", type=float)
    sp.add_argument("--n-max", type=float)
    sp.add_argument("--out", help="JSON report")
    sp.set_defaults(func=cmd_threshold_scan)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "threshold-scan" and args.n_min is not None and args.n_max is None:
        parser.error("--n-min needs --n-max")
    try:
        if args.command == "threshold-scan":
            # the scan chooses its own dimensions; a placeholder keeps config validation uniform
            args.n = None
            cfg = resolve_config(_with_dimension(args))
        else:
            cfg = resolve_config(args)
        return args.func(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except (PFoldError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def _with_dimension(args):
    ns = argparse.Namespace(**vars(args))
    raw = {}
    if args.config:
        raw = _raw_config(args.config).get("problem", {})
    if "n" not in raw:
        ns.n = 2.0 + (args.p if args.p is not None else raw.get("p", 2.0))
    return ns


if __name__ == "__main__":
    sys.exit(main())
