"""Sampling-based certification of the registered inequalities."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .quadrature import QuadratureError, TailBoundError, level
from .registry import LemmaParams, LemmaSpec, PreconditionError, get_lemma

__all__ = [
    "LemmaReport",
    "DomainError",
    "evaluate_lemma_lhs",
    "certify_lemma",
    "QUAD_RTOL",
    "DOUBLING_RTOL",
]

QUAD_RTOL = 0.01
DOUBLING_RTOL = 0.10


class DomainError(ValueError):
    """Evaluation point outside the inequality's domain."""


def _check_point(spec: LemmaSpec, pt: dict):
    missing = [c for c in spec.coords if c not in pt]
    if missing:
        raise DomainError(f"{spec.lemma_id}: point lacks coordinates {missing}")
    vals = {k: float(v) for k, v in pt.items()}
    if not all(math.isfinite(v) for v in vals.values()):
        raise DomainError(f"{spec.lemma_id}: non-finite coordinate in {pt}")
    if "r" in vals and vals["r"] <= 0:
        raise DomainError(f"{spec.lemma_id}: need r > 0")
    if spec.lemma_id == "A1" and vals["t"] < 0:
        raise DomainError("A1: need t >= 0")
    if "z" in vals and vals["z"] < 0:
        raise DomainError(f"{spec.lemma_id}: need z >= 0")
    if spec.lemma_id == "I_J" and vals["z"] < abs(vals["y"]):
        raise DomainError("I_J: need z >= |y|")
    if "w" in vals and vals["w"] > 0:
        raise DomainError(f"{spec.lemma_id}: need w <= 0")
    if "tau" in vals and vals["tau"] > 0:
        raise DomainError(f"{spec.lemma_id}: need tau <= 0")
    if "b" in vals and not vals["b"] < 1:
        raise DomainError(f"{spec.lemma_id}: need b < 1")
    if "sign" in vals and vals["sign"] not in (1.0, -1.0):
        raise DomainError(f"{spec.lemma_id}: sign must be +1 or -1")
    if "part" in vals and vals["part"] not in (3.0, 4.0):
        raise DomainError(f"{spec.lemma_id}: part must be 3 or 4")


def evaluate_lemma_lhs(spec: LemmaSpec | str, point: dict, params: LemmaParams, ell: int = 2,
                       enforce_hypotheses: bool = True):
    """Left-hand side, envelope without constant and their ratio, one entry per component."""
    if isinstance(spec, str):
        spec = get_lemma(spec)
    if enforce_hypotheses:
        reasons = spec.check(params)
        if reasons:
            raise PreconditionError(spec.lemma_id, reasons)
    _check_point(spec, point)
    lhs, env = spec.evaluate(params, point, level(ell))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(lhs == 0, 0.0, lhs / env)
    return lhs, env, ratio


@dataclass
class LemmaReport:
    lemma_id: str
    box: float
    n_points: int
    levels: tuple[int, ...]
    sup_ratio: float
    argmax: dict
    component_sup: dict
    trend: list[float]
    quad_change: float
    doubled_sup: float
    doubling_growth: float
    failures: list[dict] = field(default_factory=list)
    rows: list[dict] = field(default_factory=list, repr=False)

    @property
    def converged(self) -> bool:
        return self.quad_change < QUAD_RTOL

    @property
    def stable(self) -> bool:
        return self.doubling_growth < DOUBLING_RTOL

    @property
    def passed(self) -> bool:
        return (not self.failures and math.isfinite(self.sup_ratio) and self.converged and self.stable)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def summary(self) -> dict:
        return {
            "lemma_id": self.lemma_id,
            "C_hat": self.sup_ratio,
            "argmax": self.argmax,
            "trend": self.trend,
            "quad_change": self.quad_change,
            "doubling_growth": self.doubling_growth,
            "n_points": self.n_points,
            "n_failures": len(self.failures),
            "verdict": self.verdict,
        }


def _eval_block(args):
    lemma_id, params, points, ell = args
    spec = get_lemma(lemma_id)
    lev = level(ell)
    out = []
    for pt in points:
        try:
            lhs, env = spec.evaluate(params, pt, lev)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(lhs == 0, 0.0, lhs / env)
            out.append((lhs, env, ratio, None))
        except (TailBoundError, QuadratureError, FloatingPointError, ValueError) as exc:
            out.append((None, None, None, str(exc)))
    return out


def _evaluate_all(lemma_id, params, points, ell, workers):
    if workers <= 1:
        return _eval_block((lemma_id, params, points, ell))
    chunks = [points[i::workers] for i in range(workers)]
    with ProcessPoolExecutor(workers) as ex:
        parts = list(ex.map(_eval_block, [(lemma_id, params, c, ell) for c in chunks]))
    out = [None] * len(points)
    for i, part in enumerate(parts):
        out[i::workers] = part
    return out


def _select(points: list[dict], where: dict | None) -> list[dict]:
    if not where:
        return points
    for key in where:
        if points and key not in points[0]:
            raise DomainError(f"cannot filter on unknown coordinate {key!r}")

    def ok(pt):
        return all(any(math.isclose(pt[k], float(v), rel_tol=1e-12, abs_tol=1e-15) for v in vals)
                   for k, vals in where.items())

    return [pt for pt in points if ok(pt)]


def certify_lemma(spec: LemmaSpec | str, params: LemmaParams, box: float = 50.0,
                  levels=(0, 1, 2), points: list[dict] | None = None, workers: int = 1,
                  where: dict | None = None) -> LemmaReport:
    """Sup of ``lhs / envelope`` over the sampled box with quadrature and box-doubling checks.

    The finest level is also evaluated on the box doubled in every coordinate.
    ``where`` maps coordinate names to allowed values and thins both samples.
    """
    if isinstance(spec, str):
        spec = get_lemma(spec)
    reasons = spec.check(params)
    if reasons:
        raise PreconditionError(spec.lemma_id, reasons)
    levels = tuple(sorted(int(x) for x in levels))
    if len(levels) < 2:
        raise ValueError("need at least two quadrature levels")
    pts = _select(spec.points(params, box) if points is None else list(points), where)
    if not pts:
        raise DomainError(f"{spec.lemma_id}: no sample points left after filtering")
    for pt in pts:
        _check_point(spec, pt)

    failures: list[dict] = []
    ratios = {}
    finest = None
    for ell in levels:
        res = _evaluate_all(spec.lemma_id, params, pts, ell, workers)
        R = np.full((len(pts), len(spec.components)), np.nan)
        for i, (lhs, env, ratio, err) in enumerate(res):
            if err is not None:
                failures.append({"level": ell, "point": pts[i], "error": err})
            else:
                R[i] = ratio
        ratios[ell] = R
        finest = res

    top = ratios[levels[-1]]
    prev = ratios[levels[-2]]
    trend = [float(np.nanmax(ratios[ell])) if np.isfinite(ratios[ell]).any() else math.nan for ell in levels]
    sup = trend[-1]
    if np.isfinite(top).any():
        i, c = np.unravel_index(int(np.nanargmax(top)), top.shape)
        argmax = dict(pts[i], component=spec.components[c])
    else:
        argmax = {}
    comp_sup = {name: float(np.nanmax(top[:, j])) if np.isfinite(top[:, j]).any() else math.nan
                for j, name in enumerate(spec.components)}
    if sup > 0 and math.isfinite(sup):
        quad_change = float(np.nanmax(np.abs(top - prev)) / sup)
    else:
        quad_change = 0.0 if sup == 0 else math.inf

    if points is None:
        dpts = _select(spec.points(params, 2 * box), where)
        dres = _evaluate_all(spec.lemma_id, params, dpts, levels[-1], workers)
        dsup = 0.0
        for j, (lhs, env, ratio, err) in enumerate(dres):
            if err is not None:
                failures.append({"level": levels[-1], "point": dpts[j], "error": err, "box": 2 * box})
            else:
                dsup = max(dsup, float(np.max(ratio)))
    else:
        dsup = sup
    growth = (dsup / sup - 1.0) if sup > 0 else (0.0 if dsup == 0 else math.inf)

    rows = []
    for pt, (lhs, env, ratio, err) in zip(pts, finest):
        if err is not None:
            continue
        for j, name in enumerate(spec.components):
            rows.append(dict(pt, component=name, lhs=float(lhs[j]), envelope=float(env[j]), ratio=float(ratio[j])))

    return LemmaReport(
        lemma_id=spec.lemma_id, box=float(box), n_points=len(pts), levels=levels,
        sup_ratio=sup, argmax=argmax, component_sup=comp_sup, trend=trend,
        quad_change=quad_change, doubled_sup=dsup, doubling_growth=float(growth),
        failures=failures, rows=rows,
    )
