"""Command-line front end.

Exit status: 0 when the verdict is true (or a classification completed), 2 when the
verdict is false, 1 on any error.  ``--expect-false`` swaps 0 and 2.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings

import numpy as np

from . import __version__
from .core import SamplePlan, classify, local_geometry
from .errors import CFinslerError
from .report import dumps, envelope, table_csv

DEFAULT_SEED = 7
DEFAULT_TOL = 1e-7
GEODESIC_TOL = 1e-6
COMMANDS = ("classify", "project-check", "hilbert", "randers", "geodesic", "selftest")


class UsageError(CFinslerError):
    kind = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--builtin", help="built-in metric, optionally with parameters: disk:eps=-0.5")
    src.add_argument("--metric-file", help="YAML metric file")
    common.add_argument("--eps", type=float, help="parameter of the disk family (negative)")
    common.add_argument("--dim", type=int, help="complex dimension of built-ins that take one")
    common.add_argument("--samples", type=int, default=64)
    common.add_argument("--seed", type=int, help=f"sample seed (falls back to FINSLER_SEED, then {DEFAULT_SEED})")
    common.add_argument("--tol", type=float, help="residual tolerance for every boolean")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="report path (stdout if omitted)")
    common.add_argument("--figures", help="directory for PNG figures")
    common.add_argument("--expect-false", action="store_true", help="exit 0 when the verdict is false")

    p = _Parser(prog="cfinsler", description="Complex Finsler metric checks.")
    p.add_argument("--version", action="version", version=f"cfinsler {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.add_parser("classify", parents=[common], help="Kähler / weakly Kähler / Berwald flags")
    pc = sub.add_parser("project-check", parents=[common], help="projective relatedness of a pair")
    pc.add_argument("--with", dest="other", required=True, help="second metric: built-in text or file path")
    pc.add_argument("--mode", choices=("rapcsak", "weakly-kahler", "berwald"), default="rapcsak")
    sub.add_parser("hilbert", parents=[common], help="projectively flat (related to Euclidean)?")
    sub.add_parser("randers", parents=[common], help="Randers-specific projective checks")
    g = sub.add_parser("geodesic", parents=[common], help="integrate a geodesic and measure straightness")
    g.add_argument("--z0", help="comma separated complex start point, e.g. 0.1,0.2+0.1j")
    g.add_argument("--v0", help="comma separated complex initial velocity")
    g.add_argument("--step", type=float, default=1e-3)
    g.add_argument("--steps", type=int, default=1000)
    sub.add_parser("selftest", parents=[common], help="quick internal consistency checks")
    return p


# ---------------------------------------------------------------- metric loading


def _looks_like_file(text):
    return os.path.sep in text or text.endswith((".yaml", ".yml", ".mf")) or os.path.isfile(text)


def load_metric(args, text=None):
    from .dsl import load_metric_file
    from .zoo import builtin

    if text is not None:
        if _looks_like_file(text):
            return load_metric_file(text)
        return builtin(text, dim=args.dim)
    if args.metric_file:
        return load_metric_file(args.metric_file)
    if args.builtin:
        return builtin(args.builtin, dim=args.dim, eps=args.eps)
    raise UsageError("one of --builtin or --metric-file is required")


def _complex_list(text, what):
    try:
        return np.array([complex(s.strip().replace(" ", "")) for s in text.split(",")])
    except ValueError:
        raise UsageError(f"cannot parse {what} {text!r} as comma separated complex numbers") from None


def resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("FINSLER_SEED")
    if env is None or not env.strip():
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"FINSLER_SEED={env!r} is not an integer") from None


def config_echo(args, seed, tol) -> dict:
    """Everything that determines the result; output locations are left out."""
    skip = {"out", "figures", "expect_false"}
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    cfg["seed"] = seed
    cfg["tol"] = tol
    cfg["env_seed_used"] = args.seed is None and bool(os.environ.get("FINSLER_SEED", "").strip())
    return cfg


# ---------------------------------------------------------------- commands


def _projective_payload(rep):
    rows = [s.row() for s in rep.samples]
    result = {"check": rep.check, "conditions": rep.conditions, "diagnostics": rep.diagnostics,
              "flags": rep.flags, "skipped": rep.skipped, "failures": rep.failures,
              "domain": rep.domain, "samples": rows}
    return result, rows


def _sample_rows_flat(rows):
    out = []
    for r in rows:
        flat = {k: v for k, v in r.items() if k != "residuals"}
        flat.update(r.get("residuals", {}))
        out.append(flat)
    return out


def run_classify(args, plan, tol, figs):
    metric = load_metric(args)
    rep = classify(metric, plan, tol)
    maxima = {"kahler": rep.kahler_residual, "weakly_kahler": rep.weakly_kahler_residual,
              "generalized_berwald": rep.gen_berwald_residual, "theta_star": rep.theta_residual,
              "connection_gap": rep.connection_gap}
    result = {"flags": rep.flags(), "samples": rep.samples, "min_eigenvalue": rep.min_eigenvalue,
              "failures": rep.failures, "per_sample": rep.per_sample}
    result.update(rep.flags())
    figures = []
    if figs:
        from .plots import flags_figure, residual_figure
        figures.append(residual_figure(rep.per_sample, ["kahler", "weakly_kahler", "gen_berwald"], tol, figs,
                                       "classify_samples.png", metric.name))
        figures.append(flags_figure(maxima, tol, figs, "classify_maxima.png", metric.name))
    tols = {k: tol for k in rep.flags()}
    return dict(metrics=[metric.describe()], result=result, verdict=None, residual_maxima=maxima,
                tolerances=tols, figures=figures), rep.per_sample


def _projective_out(rep, metrics, tol, figs, stem):
    result, rows = _projective_payload(rep)
    figures = []
    if figs:
        from .plots import flags_figure, residual_figure
        flat = _sample_rows_flat(rows)
        figures.append(residual_figure(flat, sorted(rep.conditions), tol, figs, f"{stem}_samples.png",
                                       " vs ".join(rep.metrics)))
        figures.append(flags_figure({k: v for k, v in rep.conditions.items()}, tol, figs, f"{stem}_maxima.png",
                                    rep.check))
    tols = {k: tol for k in rep.conditions}
    tols["verdict"] = tol
    return dict(metrics=[m.describe() for m in metrics], result=result, verdict=rep.verdict,
                residual_maxima=dict(rep.conditions), tolerances=tols, figures=figures), _sample_rows_flat(rows)


def run_project_check(args, plan, tol, figs):
    from .projective import berwald_projective_check, rapcsak_check, weakly_kahler_projective_check

    L = load_metric(args)
    Lt = load_metric(args, args.other)
    fn = {"rapcsak": rapcsak_check, "weakly-kahler": weakly_kahler_projective_check,
          "berwald": berwald_projective_check}[args.mode]
    rep = fn(L, Lt, plan, tol)
    return _projective_out(rep, [L, Lt], tol, figs, "project")


def run_hilbert(args, plan, tol, figs):
    from .projective import hilbert_check

    Lt = load_metric(args)
    rep = hilbert_check(Lt, plan, tol)
    return _projective_out(rep, [Lt], tol, figs, "hilbert")


def run_randers(args, plan, tol, figs):
    from .projective import euclidean_randers_check, randers_projective_check

    Ft = load_metric(args)
    rep = randers_projective_check(Ft, plan, tol)
    eq = euclidean_randers_check(Ft, plan, tol)
    out, rows = _projective_out(rep, [Ft], tol, figs, "randers")
    out["result"]["euclidean_equivalence"] = {"conditions": eq.conditions, "diagnostics": eq.diagnostics,
                                              "flags": eq.flags, "verdict": eq.verdict}
    for k, v in eq.conditions.items():
        out["residual_maxima"][f"euclidean_{k}"] = v
        out["tolerances"][f"euclidean_{k}"] = tol
    out["verdict"] = bool(rep.verdict and eq.verdict)
    return out, rows


def run_geodesic(args, plan, tol, figs):
    from .geodesic import (integrate, matched_euclidean, pointset_distance, seeded_initial_data,
                           straightness, trajectory_metadata)

    metric = load_metric(args)
    if (args.z0 is None) != (args.v0 is None):
        raise UsageError("--z0 and --v0 go together")
    if args.z0 is None:
        z0, v0 = seeded_initial_data(plan.seed, metric.dim, 1)[0]
    else:
        z0, v0 = _complex_list(args.z0, "--z0"), _complex_list(args.v0, "--v0")
    traj = integrate(metric, z0, v0, args.step, args.steps)
    dev = straightness(traj)
    ref = matched_euclidean(traj)
    dist = pointset_distance(traj, ref)
    maxima = {"chord_deviation": dev.chord_deviation}
    verdict = dev.chord_deviation < tol
    # the real-rescaled Euclidean geodesic covers the same segment only when
    # sum conj(z0) v0 is real; otherwise the curve bends inside its complex line
    result = {"trajectory": trajectory_metadata(traj, dev), "z0": z0, "v0": v0,
              "matched_speed": ref.v[0], "z_end": traj.z[-1], "straight": verdict,
              "energy_drift": dev.energy_drift, "matched_pointset_distance": dist,
              "real_factor_data": bool(abs(np.vdot(z0, v0).imag) <= 1e-12 * max(1.0, abs(np.vdot(z0, v0))))}
    figures = []
    if figs:
        from .plots import trajectory_figure
        figures.append(trajectory_figure(traj, figs, "geodesic.png", ref, metric.name))
    return dict(metrics=[metric.describe()], result=result, verdict=verdict, residual_maxima=maxima,
                tolerances={"chord_deviation": tol}, figures=figures), traj


def run_selftest(args, plan, tol, figs):
    """Derivative oracle, Euler identity and the unconditional spray identity on the built-ins."""
    from .fdcheck import fd_sweep
    from .projective import spray_difference_relative
    from .zoo import builtin

    names = ["euclidean", "disk:eps=-1", "disk:eps=-0.5", "hartogs-alpha", "hartogs-randers"]
    metrics = [builtin(n, dim=2) for n in names]
    small = SamplePlan(min(plan.count, 8), plan.seed)
    maxima, checks = {}, {}
    for m in metrics:
        maxima[f"fd:{m.name}"] = max(fd_sweep(m, p).max_rel_error for p in small.points(m))
        euler = 0.0
        for p in small.points(m):
            geo = local_geometry(m, p)
            euler = max(euler, abs(geo.dL @ p.eta - geo.L) / max(1.0, abs(geo.L)))
        maxima[f"euler:{m.name}"] = float(euler)
    pairs = [(0, 1), (1, 0), (0, 4), (3, 4), (1, 4)]
    for i, j in pairs:
        a, b = metrics[i], metrics[j]
        pts, _ = small.draw([a, b])
        maxima[f"spray_identity:{a.name}|{b.name}"] = max(spray_difference_relative(a, b, p) for p in pts)
    tols = {k: (1e-6 if k.startswith("fd:") else tol) for k in maxima}
    for k, v in maxima.items():
        checks[k] = bool(v < tols[k])
    return dict(metrics=[m.describe() for m in metrics], result={"checks": checks}, verdict=all(checks.values()),
                residual_maxima=maxima, tolerances=tols, figures=[]), []


RUNNERS = {"classify": run_classify, "project-check": run_project_check, "hilbert": run_hilbert,
           "randers": run_randers, "geodesic": run_geodesic, "selftest": run_selftest}


# ---------------------------------------------------------------- entry point


def _exit_status(verdict, expect_false):
    if verdict is None:
        return 0
    ok = (not verdict) if expect_false else verdict
    return 0 if ok else 2


def _write(path, text):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def execute(argv=None) -> int:
    args = None
    command = "error"
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError(f"a command is required: {', '.join(COMMANDS)}")
        command = args.command
        seed = resolve_seed(args)
        tol = args.tol if args.tol is not None else (GEODESIC_TOL if command == "geodesic" else DEFAULT_TOL)
        if tol <= 0 or args.samples < 1:
            raise UsageError("--tol and --samples must be positive")
        plan = SamplePlan(args.samples, seed)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            body, table = RUNNERS[command](args, plan, tol, args.figures)
        body["result"]["warnings"] = sorted({str(w.message) for w in caught
                                             if not issubclass(w.category, DeprecationWarning)})
        status = _exit_status(body["verdict"], args.expect_false)
        report = envelope(command, config_echo(args, seed, tol), exit_status=status, **body)
    except CFinslerError as exc:
        return _fail(args, command, exc.record())
    except (OSError, ValueError) as exc:
        kind = "io" if isinstance(exc, OSError) else "value"
        return _fail(args, command, {"kind": kind, "type": type(exc).__name__, "message": str(exc)})

    text = dumps(report)
    if args.format == "csv":
        if command == "geodesic":
            from .geodesic import trajectory_csv
            csv_text = trajectory_csv(table)
        else:
            csv_text = table_csv(table)
        _write(args.out, csv_text)
        if args.out:
            _write(args.out + ".json", text)
    else:
        _write(args.out, text)
    return status


def _fail(args, command, record) -> int:
    cfg = {"seed": DEFAULT_SEED, "tol": DEFAULT_TOL}
    if args is not None and hasattr(args, "seed"):
        try:
            cfg = config_echo(args, resolve_seed(args), args.tol or DEFAULT_TOL)
        except CFinslerError:
            pass
    report = envelope(command, cfg, exit_status=1, error=record)
    sys.stderr.write(f"cfinsler: {record['kind']} error: {record['message']}\n")
    out = getattr(args, "out", None) if args is not None else None
    if args is not None and getattr(args, "format", "json") == "csv" and out:
        out = out + ".json"
    try:
        _write(out, dumps(report))
    except OSError:
        sys.stdout.write(dumps(report))
    return 1


def main(argv=None):
    sys.exit(execute(argv))


if __name__ == "__main__":
    main()
