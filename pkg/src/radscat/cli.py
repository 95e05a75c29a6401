"""Command-line entry point: simulate, scatter, certify, sweep and report.

Every subcommand reads one YAML config (see :mod:`radscat.config`) and writes
CSV tables plus a deterministic ``manifest.json`` into the output directory.

Exit codes: 0 success, 2 validation failure, 3 numerical failure,
4 certification failure.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, config_hash, dump_config, load_config
from .fields import WeightSpec, make_initial_data, make_nonlinearity, make_potential
from .lemma_verify import (DomainError, LemmaParams, PreconditionError, certify_lemma, check_duhamel_weighted_bounds,
                           check_pointwise_source_bounds, lemma_ids)
from .lemma_verify.quadrature import QuadratureError
from .lemma_verify.quadrature import TailBoundError as QuadTailError
from .radial_wave import BoundaryContaminationError, CFLError, SolverConfig, TailBoundError, residual
from .scattering import (ConvergenceError, ScatterPlan, SmallnessViolatedError, check_theorem_bounds,
                         picard_solve, scatter)
from .scenario import InvalidScenarioError, RawScenario, validate_scenario

__all__ = ["main", "EXIT_OK", "EXIT_VALIDATION", "EXIT_NUMERICAL", "EXIT_CERTIFICATION", "ManifestConflict"]

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_CERTIFICATION = 4

NUMERICAL_ERRORS = (CFLError, BoundaryContaminationError, TailBoundError, SmallnessViolatedError,
                    ConvergenceError, QuadTailError, QuadratureError, FloatingPointError)


class ManifestConflict(ValueError):
    """The output directory already holds a manifest for a different config."""


# ---------------------------------------------------------------- output helpers


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def write_manifest(out: Path, cfg: RunConfig, command: str, payload: dict) -> Path:
    """Add ``command``'s entry to ``out/manifest.json``; a manifest of another config is never touched."""
    out.mkdir(parents=True, exist_ok=True)
    path = out / "manifest.json"
    h = config_hash(cfg)
    doc = {"code_version": __version__, "config_hash": h, "config": cfg.to_dict(), "runs": {}}
    if path.exists():
        old = json.loads(path.read_text())
        if old.get("config_hash") != h:
            raise ManifestConflict(f"{path} belongs to config {old.get('config_hash')}, not {h}")
        doc["runs"] = old.get("runs", {})
    doc["runs"][command] = payload
    path.write_text(_dumps(doc))
    return path


def _check_manifest(out: Path, cfg: RunConfig):
    path = out / "manifest.json"
    if path.exists():
        old = json.loads(path.read_text())
        if old.get("config_hash") != config_hash(cfg):
            raise ManifestConflict(f"{path} belongs to config {old.get('config_hash')}, not {config_hash(cfg)}")


def write_csv(path: Path, header: list[str], rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([_cell(v) for v in row])
    return path


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (dict, list)):
        return json.dumps(_clean(v), sort_keys=True)
    return v


# ---------------------------------------------------------------- builders


def _raw(cfg: RunConfig) -> RawScenario:
    b = cfg.scenario
    return RawScenario(b.n, float(b.p), float(b.k), float(b.kappa), float(b.eps), float(b.V0))


def _inputs(cfg: RunConfig):
    s = validate_scenario(_raw(cfg))
    eps = s.eps if cfg.data.eps is None else float(cfg.data.eps)
    k = s.k_reduced if cfg.data.k is None else float(cfg.data.k)
    d = make_initial_data(cfg.data.profile, eps, k)
    V0 = s.V0 if cfg.potential.v0 is None else float(cfg.potential.v0)
    kappa = s.kappa if cfg.potential.kappa is None else float(cfg.potential.kappa)
    V = make_potential(V0, kappa, cfg.potential.shape)
    F = make_nonlinearity(float(cfg.nonlinearity.A), s.p)
    sv = cfg.solver
    plan = ScatterPlan(dr=float(sv.dr), t_min=float(sv.t_min), t_max=float(sv.t_max),
                       report_radius=float(sv.report_radius), r_max=sv.r_max,
                       fit_range=(float(cfg.scatter.fit_lo), float(cfg.scatter.fit_hi)))
    solver = SolverConfig(cfl=sv.cfl, scheme=sv.scheme)
    return s, d, V, F, plan, solver


def _lemma_list(cfg: RunConfig) -> list[str]:
    ids = cfg.verify.lemmas
    if ids == ["all"]:
        return lemma_ids()
    unknown = [x for x in ids if x not in lemma_ids()]
    if unknown:
        raise ConfigError(f"verify.lemmas: unknown ids {unknown}; known {lemma_ids()}")
    return list(ids)


# ---------------------------------------------------------------- commands


def cmd_simulate(cfg: RunConfig, out: Path) -> int:
    _check_manifest(out, cfg)
    s, d, V, F, plan, solver = _inputs(cfg)
    sc = cfg.scatter
    res = picard_solve(s, d, V, F, sc.tol, sc.max_iter, plan, solver, sc.tail_tol)
    u = res.u
    R = plan.report_radius
    J = u.grid.count_within(R)
    ti = range(0, len(u.t), cfg.output.cadence)
    rj = range(0, J, cfg.output.r_stride)
    write_csv(out / "snapshots.csv", ["t", "r", "u", "u0_minus"],
              ((u.t[i], u.r[j], u.values[i, j], res.u0_minus.values[i, j]) for i in ti for j in rj))
    write_csv(out / "iterations.csv", ["iteration", "increment"],
              ((i + 1, x) for i, x in enumerate(res.increments)))
    w = WeightSpec.from_scenario(s)
    payload = {
        "scenario": s.to_dict(),
        "grid": {"dr": u.grid.dr, "r_max": u.grid.r_max, "dt": u.window.dt, "J": u.grid.J,
                 "n_steps": u.window.n_steps, "scheme": solver.resolve_scheme(s.n)},
        "norm": res.norm,
        "iterations": res.iterations,
        "increments": res.increments,
        "contraction": res.contraction,
        "defect": res.defect,
        "residual": residual(u, s.n, F, V, r_limit=R),
        "tail_bound_past": res.tail_bound_past,
        "theorem_bound_past": check_theorem_bounds(u, res.u0_minus, w, "past", R),
        "max_abs_u": float(np.max(np.abs(u.values))),
        "flags": res.flags,
    }
    write_manifest(out, cfg, "simulate", payload)
    print(f"simulate: {res.iterations} iterations, norm {res.norm:.4g}, defect {res.defect:.3g}")
    return EXIT_OK


def _scatter_payload(cfg: RunConfig, res, s, F, V, solver) -> dict:
    w = WeightSpec.from_scenario(s)
    R = res.plan.report_radius
    ma1, ma2 = check_pointwise_source_bounds(res.u, F, V, w, r_limit=R)
    mb1, mb2 = check_duhamel_weighted_bounds(res.u, F, V, w, s.n, solver, r_limit=R)
    out = {"scenario": s.to_dict()}
    out.update(res.summary())
    out.update({
        "rho": res.contraction,
        "pointwise_ratio_nonlinear": ma1,
        "pointwise_ratio_potential": ma2,
        "duhamel_constant_nonlinear": mb1,
        "duhamel_constant_potential": mb2,
        "theorem_bound_past": check_theorem_bounds(res.u, res.u0_minus, w, "past", R),
        "theorem_bound_future": check_theorem_bounds(res.u, res.u0_plus, w, "future", R),
    })
    return out


def cmd_scatter(cfg: RunConfig, out: Path) -> int:
    _check_manifest(out, cfg)
    s, d, V, F, plan, solver = _inputs(cfg)
    sc = cfg.scatter
    res = scatter(s, d, V, F, sc.tol, sc.max_iter, plan, solver, sc.tail_tol)
    write_csv(out / "decay.csv", ["t", "e_minus", "e_plus"], zip(res.t_series, res.e_minus, res.e_plus))
    write_csv(out / "iterations.csv", ["iteration", "increment"],
              ((i + 1, x) for i, x in enumerate(res.increments)))
    payload = _scatter_payload(cfg, res, s, F, V, solver)
    write_manifest(out, cfg, "scatter", payload)
    th = lambda x: "undefined" if x is None else f"{x:.4f}"
    print(f"scatter: theta {th(s.theta)}, theta_hat- {th(res.theta_hat_minus)}, "
          f"theta_hat+ {th(res.theta_hat_plus)}, flags {res.flags}")
    return EXIT_OK


def _lemma_params(cfg: RunConfig) -> LemmaParams:
    if cfg.verify.params is not None:
        return LemmaParams(**{k: float(v) for k, v in cfg.verify.params.items()})
    return LemmaParams.from_scenario(validate_scenario(_raw(cfg)))


def cmd_certify(cfg: RunConfig, out: Path) -> int:
    _check_manifest(out, cfg)
    P = _lemma_params(cfg)
    ids = _lemma_list(cfg)
    reports = []
    for lid in ids:
        rep = certify_lemma(lid, P, box=float(cfg.verify.box), levels=cfg.verify.levels,
                            workers=int(cfg.verify.workers), where=cfg.verify.where)
        reports.append(rep)
        if rep.rows:
            coords = [c for c in rep.rows[0] if c not in ("component", "lhs", "envelope", "ratio")]
            header = coords + ["component", "lhs", "envelope", "ratio"]
            write_csv(out / f"lemma_{lid}.csv", header, ([row[h] for h in header] for row in rep.rows))
    write_csv(out / "certify_summary.csv",
              ["lemma_id", "C_hat", "argmax", "trend", "quad_change", "doubling_growth", "n_points", "verdict"],
              ([r.lemma_id, r.sup_ratio, r.argmax, r.trend, r.quad_change, r.doubling_growth, r.n_points,
                r.verdict] for r in reports))
    payload = {"params": P.to_dict(), "lemmas": {r.lemma_id: r.summary() for r in reports},
               "failures": {r.lemma_id: r.failures for r in reports if r.failures}}
    write_manifest(out, cfg, "certify", payload)
    for r in reports:
        print(f"{r.lemma_id:6s} C_hat {r.sup_ratio:.4g} growth {r.doubling_growth:+.3f} {r.verdict}")
    if not all(r.passed for r in reports):
        return EXIT_CERTIFICATION
    return EXIT_OK


SWEEP_HEADER = ["row", "n", "p", "k", "kappa", "eps", "V0", "valid", "status", "theta", "rho",
                "theta_hat_minus", "theta_hat_plus", "C_hats", "detail"]


def _sweep_row(args) -> dict:
    idx, cfg, out = args
    b = cfg.scenario
    row = {"row": idx, "n": b.n, "p": b.p, "k": b.k, "kappa": b.kappa, "eps": b.eps, "V0": b.V0,
           "valid": True, "status": "ok", "theta": None, "rho": None, "theta_hat_minus": None,
           "theta_hat_plus": None, "C_hats": None, "detail": ""}
    try:
        s = validate_scenario(_raw(cfg))
    except InvalidScenarioError as exc:
        row.update(valid=False, status="invalid", detail=";".join(v.tag for v in exc.violations))
        return row
    row["theta"] = s.theta
    sub = out / f"row_{idx:03d}"
    cmd = cfg.sweep.command
    try:
        if cmd == "scatter":
            cmd_scatter(cfg, sub)
            m = json.loads((sub / "manifest.json").read_text())["runs"]["scatter"]
            row.update(rho=m["rho"], theta_hat_minus=m["theta_hat_minus"], theta_hat_plus=m["theta_hat_plus"])
            if m["flags"]:
                row["detail"] = ";".join(m["flags"])
        elif cmd == "certify":
            code = cmd_certify(cfg, sub)
            m = json.loads((sub / "manifest.json").read_text())["runs"]["certify"]
            row["C_hats"] = {k: v["C_hat"] for k, v in m["lemmas"].items()}
            if code != EXIT_OK:
                row["status"] = "certification_failed"
    except (PreconditionError, ValueError, *NUMERICAL_ERRORS) as exc:
        row.update(status=type(exc).__name__, detail=str(exc).splitlines()[0][:300])
    return row


def cmd_sweep(cfg: RunConfig, out: Path) -> int:
    _check_manifest(out, cfg)
    grid = cfg.sweep.grid
    keys = list(grid)
    combos = list(itertools.product(*(grid[k] for k in keys))) if keys else [()]
    jobs = []
    for i, combo in enumerate(combos):
        sc = replace(cfg.scenario, **dict(zip(keys, combo)))
        jobs.append((i, replace(cfg, scenario=sc, sweep=replace(cfg.sweep, grid={})), out))
    workers = int(cfg.sweep.workers)
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            rows = list(ex.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(j) for j in jobs]
    write_csv(out / "sweep.csv", SWEEP_HEADER, ([r[h] for h in SWEEP_HEADER] for r in rows))
    write_manifest(out, cfg, "sweep", {"rows": rows})
    print(f"sweep: {len(rows)} rows, {sum(r['status'] == 'ok' for r in rows)} ok")
    return EXIT_OK


def cmd_report(cfg: RunConfig, out: Path) -> int:
    path = out / "manifest.json"
    if not path.exists():
        raise ConfigError(f"no manifest in {out}")
    doc = json.loads(path.read_text())
    lines = [f"code version {doc['code_version']}", f"config hash  {doc['config_hash']}"]
    runs = doc.get("runs", {})
    for name in sorted(runs):
        r = runs[name]
        if name in ("simulate", "scatter"):
            keys = ["iterations", "norm", "defect", "rho", "theta", "theta_hat_minus", "theta_hat_plus"]
            lines.append(f"[{name}] " + ", ".join(f"{k}={r[k]}" for k in keys if k in r))
        elif name == "certify":
            for lid, rep in sorted(r["lemmas"].items()):
                lines.append(f"[certify] {lid}: C_hat={rep['C_hat']:.4g} verdict={rep['verdict']}")
        elif name == "sweep":
            lines.append(f"[sweep] {len(r['rows'])} rows")
    text = "\n".join(lines) + "\n"
    (out / "report.txt").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "scatter": cmd_scatter,
    "certify": cmd_certify,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def _error_doc(kind: str, exc: Exception) -> dict:
    doc = {"error": kind, "type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, InvalidScenarioError):
        doc["violations"] = [v.to_dict() for v in exc.violations]
    if isinstance(exc, PreconditionError):
        doc["lemma_id"] = exc.lemma_id
        doc["reasons"] = exc.reasons
    if isinstance(exc, TailBoundError):
        doc["bound"] = exc.bound
        doc["suggested"] = exc.suggested
    return doc


COMMAND_HELP = {
    "simulate": "solve the fixed point and write field snapshots",
    "scatter": "solve, then fit decay of the scattering differences",
    "certify": "numerically certify the weighted integral inequalities",
    "sweep": "run a command over a parameter grid",
    "report": "summarize the manifest of an output directory",
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="radscat", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"radscat {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=COMMAND_HELP[name])
        p.add_argument("config", nargs="?", help="YAML run config (defaults are used when omitted)")
        p.add_argument("-o", "--out", help="output directory (overrides output.dir)")
    dump = sub.add_parser("dump-config", help="print the effective config as YAML")
    dump.add_argument("config", nargs="?")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
    except ConfigError as exc:
        sys.stderr.write(_dumps(_error_doc("validation", exc)))
        return EXIT_VALIDATION
    if args.command == "dump-config":
        sys.stdout.write(dump_config(cfg))
        return EXIT_OK
    out = Path(args.out or cfg.output.dir)
    try:
        return COMMANDS[args.command](cfg, out)
    except (InvalidScenarioError, PreconditionError, ConfigError, ManifestConflict, DomainError) as exc:
        doc = _error_doc("validation", exc)
        code = EXIT_VALIDATION
    except NUMERICAL_ERRORS as exc:
        doc = _error_doc("numerical", exc)
        code = EXIT_NUMERICAL
    except ValueError as exc:
        doc = _error_doc("validation", exc)
        code = EXIT_VALIDATION
    sys.stderr.write(_dumps(doc))
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "errors.json").write_text(_dumps(doc))
    except OSError:
        pass
    return code


if __name__ == "__main__":
    sys.exit(main())
