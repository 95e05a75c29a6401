"""Grid audits of the pointwise source bounds, the Duhamel bounds and the source-energy bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..fields import (Nonlinearity, Potential, Profile, RadialField, RadialGrid, TimeWindow, WeightSpec,
                      bracket, norm_X, weight_Wk)
from ..radial_wave import SolverConfig, duhamel, make_grid, make_window
from ..scenario import CorollaryNotApplicableError, Scenario, lame_parameters
from .quadrature import level
from .registry import LemmaParams, _integrate, _integrate_rows, hsrc_exponents, htilde

__all__ = [
    "check_pointwise_source_bounds",
    "check_duhamel_weighted_bounds",
    "SeparableSource",
    "KernelSample",
    "check_kernel_bound",
    "check_source_energy_integral",
    "envelope_field",
    "source_energy_envelope",
    "source_energy_consistency",
]


def _ratio_max(lhs, rhs) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(lhs == 0, 0.0, lhs / rhs)
    return float(np.max(q)) if q.size else 0.0


def check_pointwise_source_bounds(u: RadialField, F: Nonlinearity, V: Potential | None, w: WeightSpec,
                                  kappa: float | None = None, r_limit: float | None = None
                                  ) -> tuple[float, float]:
    """Worst grid ratios for the nonlinear and the potential pointwise source bounds.

    The nonlinear ratio is maximized over ``j, j0 in {0, 1}``; the potential
    ratio over ``j in {0, 1}``.  Both are 0 for ``u = 0``.
    """
    norm = norm_X(u, w, r_limit)
    J = u.grid.count_within(r_limit)
    lam = u.r[None, :J]
    vals = u.values[:, :J]
    ur = u.du_dr[:, :J]
    W = weight_Wk(w, lam, u.t[:, None])
    m = w.m

    ma1 = 0.0
    if norm > 0 and F.A > 0:
        p = F.p
        s0 = np.abs(F(vals))
        s1 = lam * np.abs(F.derivative(vals) * ur)
        for j in (0, 1):
            for j0 in (0, 1):
                lhs = s0 + (s1 if j0 else 0.0)
                rhs = 2 * F.A * p * norm**p * lam ** (j - m * p) * bracket(lam) ** (j0 - j) * W ** (-p)
                ma1 = max(ma1, _ratio_max(lhs, rhs))

    ma2 = 0.0
    if V is not None and norm > 0 and V.V0 > 0:
        kap = V.kappa if kappa is None else kappa
        Vr = V(lam)
        dV = V(lam, 1)
        s0 = np.abs(Vr * vals)
        s1 = lam * np.abs(dV * vals + Vr * ur)
        for j in (0, 1):
            lhs = s0 + (s1 if j else 0.0)
            rhs = 4 * V.V0 * norm * lam ** (j - 1 - m) * bracket(lam) ** (1 - kap) / W
            ma2 = max(ma2, _ratio_max(lhs, rhs))
    return ma1, ma2


def _duhamel_ratio(LG: RadialField, w: WeightSpec, scale: float, r_limit) -> float:
    if scale == 0:
        return 0.0 if not np.any(LG.values) else math.inf
    J = LG.grid.count_within(r_limit)
    r = LG.r[None, :J]
    Winv = 1.0 / weight_Wk(w, r, LG.t[:, None])
    e0 = scale * r ** (1 - w.m) / bracket(r) * Winv
    e1 = scale * r ** (-w.m) * Winv
    # one-sided time derivatives at the window edges are excluded
    sl = slice(1, -1)
    return max(_ratio_max(np.abs(LG.values[:, :J]), e0),
               _ratio_max(np.abs(LG.du_dr[sl, :J]), e1[sl]),
               _ratio_max(np.abs(LG.du_dt[sl, :J]), e1[sl]))


def check_duhamel_weighted_bounds(u: RadialField, F: Nonlinearity, V: Potential | None, w: WeightSpec, n: int,
                                  config: SolverConfig = SolverConfig(), r_limit: float | None = None
                                  ) -> tuple[float, float]:
    """Empirical constants of the weighted Duhamel bounds for ``F(u)`` and ``V u``.

    Duhamel images start from zero data at the window's first level.
    """
    norm = norm_X(u, w, r_limit)
    if norm == 0:
        return 0.0, 0.0
    r = u.r
    cF = 0.0
    if F.A > 0:
        LF = duhamel(F(u.values), n, u.grid, u.window, config)
        cF = _duhamel_ratio(LF, w, norm**F.p, r_limit)
    cV = 0.0
    if V is not None and V.V0 > 0:
        LV = duhamel(-V(r)[None, :] * u.values, n, u.grid, u.window, config)
        cV = _duhamel_ratio(LV, w, V.V0 * norm, r_limit)
    return cF, cV


# ---------------------------------------------------------------- kernel bound


@dataclass(frozen=True)
class SeparableSource:
    """``G(lam, tau) = amplitude * b(lam / radius) * b((tau - center) / half_width)`` with a smooth bump ``b``."""

    amplitude: float = 1.0
    radius: float = 1.0
    center: float = 0.0
    half_width: float = 1.0

    def __call__(self, lam, tau, order: int = 0):
        b = Profile("bump", 1.0)
        lam = np.asarray(lam, dtype=float)
        tau = np.asarray(tau, dtype=float)
        space = b(lam / self.radius, order) / self.radius**order
        return self.amplitude * space * b((tau - self.center) / self.half_width)

    @property
    def support(self) -> tuple[float, float]:
        return self.center - self.half_width, self.center + self.half_width

    def weighted_sum(self, lam, tau, j: int):
        """``sum_{s <= j} lam^s |d_lam^s G|``; zero for ``j < 0``."""
        lam = np.asarray(lam, dtype=float)
        out = np.zeros(np.broadcast(lam, np.asarray(tau)).shape)
        for s in range(j + 1):
            out = out + lam**s * np.abs(self(lam, tau, s))
        return out


@dataclass(frozen=True)
class KernelSample:
    r: float
    t: float
    beta: tuple[int, int]
    lhs: float
    rhs: float
    j: int

    @property
    def ratio(self) -> float:
        if self.lhs == 0:
            return 0.0
        return self.lhs / self.rhs if self.rhs > 0 else math.inf

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


def _kernel_terms(G: SeparableSource, a: float, m: float, r: float, t: float, j: int, beta_abs: int,
                  ell: int = 1) -> float:
    """Three-term right-hand side of the Duhamel kernel estimate with unit constant."""
    lev = level(ell)
    R = G.radius
    t0, t1 = G.support

    def S(lam, tau, jj):
        return G.weighted_sum(lam, tau, jj)

    def cone_rows(tau, singular):
        lm = t - tau - r
        lp = t - tau + r
        lo = np.abs(lm)
        hi = np.maximum(np.minimum(lp, R), lo)
        edges = np.stack([lo, hi], axis=1)
        lmc = lm[:, None]
        tc = tau[:, None]
        if singular:
            f = lambda x: x ** (m - j + 1) * S(x, tc, j)
            return _integrate_rows(f, edges, lev, e_first=a - 1)
        f = lambda x: x ** (m - j + 1) * (x - lmc) ** (a - 1) * S(x, tc, j)
        return _integrate_rows(f, edges, lev)

    T1 = 0.0
    for lo, hi, sing in ((t0, min(t1, t - r), True), (max(t0, t - r), min(t1, t), False)):
        if hi > lo:
            T1 += _integrate(lambda tau: cone_rows(tau, sing), [lo, hi], lev)
    T1 *= r ** (j - beta_abs - m - a)

    def inner_rows(tau):
        lm = t - tau - r
        lp = t - tau + r
        out = np.zeros_like(tau)
        near = lm <= R
        lmc = lm[:, None]
        tc = tau[:, None]
        pref = 1.0 / (lm**m * lp**a)
        if near.any():
            e = np.stack([np.zeros(near.sum()), lm[near]], axis=1)
            f = lambda x: x ** (2 * m - j + 1) * S(x, tc[near], j)
            out[near] = _integrate_rows(f, e, lev, e_last=a - 1)
        far = ~near
        if far.any():
            e = np.stack([np.zeros(far.sum()), np.full(far.sum(), R)], axis=1)
            f = lambda x: x ** (2 * m - j + 1) * (lmc[far] - x) ** (a - 1) * S(x, tc[far], j)
            out[far] = _integrate_rows(f, e, lev)
        return pref * out

    T2 = 0.0
    hi = min(t1, t - r)
    if hi > t0:
        T2 = r ** (j - beta_abs - m) * _integrate(inner_rows, [t0, hi], lev)

    T3 = 0.0
    if j >= 1:
        lo, hi = max(t0, t - 2 * r), min(t1, t)
        if hi > lo:
            def f3(tau):
                lp = np.abs(t - tau + r)
                lm = np.abs(t - tau - r)
                return (lp ** (a + m - j + 1) * S(lp, tau, j - 1)
                        + lm ** (a + m - j + 1) * S(lm, tau, j - 1))
            T3 = r ** (j - beta_abs - m - a) * _integrate(f3, [lo, t - r, hi] if lo < t - r < hi else [lo, hi], lev)
    return float(T1 + T2 + T3)


def check_kernel_bound(G: SeparableSource, n: int, points, dr: float = 1 / 32, r_max: float | None = None,
                       config: SolverConfig = SolverConfig(), betas=((0, 0), (1, 0), (0, 1)),
                       ell: int = 1) -> list[KernelSample]:
    """Forced-evolution ``|D^beta L G|`` at grid nodes against the unit-constant kernel estimate.

    ``points`` are ``(r, t)`` pairs, snapped to the nearest node and time level.
    For ``beta = 0`` the smaller of the ``j = 0`` and ``j = 1`` right-hand sides is used.
    Values below ``1e-12`` of the largest computed magnitude count as zero.
    """
    a, m = lame_parameters(n)
    points = [(float(r), float(t)) for r, t in points]
    t0, _ = G.support
    t_end = max(t for _, t in points) + 4 * dr
    if r_max is None:
        r_max = math.ceil((max(r for r, _ in points) + (t_end - t0) + G.radius + 1) / dr) * dr
    grid = make_grid(n, dr, r_max, config)
    window = make_window(t0, t0 + math.ceil((t_end - t0) / (config.resolve_cfl(n) * dr)) * config.resolve_cfl(n) * dr,
                         dr, n, config)
    r_nodes = grid.nodes
    t_levels = window.times
    Gv = G(r_nodes[None, :], t_levels[:, None])
    LG = duhamel(Gv, n, grid, window, config)
    # roundoff leaks past the discrete domain of dependence
    floor = 1e-12 * max(np.abs(LG.values).max(), np.abs(LG.du_dr).max(), np.abs(LG.du_dt).max())
    out = []
    for r, t in points:
        jr = int(np.argmin(np.abs(r_nodes - r)))
        it = int(np.clip(np.argmin(np.abs(t_levels - t)), 1, window.n_steps - 1))
        rr, tt = float(r_nodes[jr]), float(t_levels[it])
        for beta in betas:
            b = sum(beta)
            if b == 0:
                lhs = abs(LG.values[it, jr])
            elif beta == (1, 0):
                lhs = abs(LG.du_dr[it, jr])
            else:
                lhs = abs(LG.du_dt[it, jr])
            if lhs <= floor:
                lhs = 0.0
            best, best_j = math.inf, 1
            for j in range(b, 2):
                val = _kernel_terms(G, a, m, rr, tt, j, b, ell)
                if val < best:
                    best, best_j = val, j
            out.append(KernelSample(rr, tt, tuple(beta), float(lhs), best, best_j))
    return out


# ---------------------------------------------------------------- source energy


def check_source_energy_integral(u: RadialField, F: Nonlinearity, s: Scenario, w: WeightSpec | None = None,
                                 r_limit: float | None = None) -> float:
    """``sup_{tau <= 0} H(tau) <tau>^(2 theta + 2) / ||u||^2`` over the window's levels."""
    if s.theta is None:
        raise CorollaryNotApplicableError(f"source energy bound needs k > m + 1 = {s.m + 1}; got k = {s.k}")
    w = w or WeightSpec.from_scenario(s)
    norm = norm_X(u, w, r_limit)
    if norm == 0:
        return 0.0
    if norm > 1 + 1e-12:
        raise ValueError(f"source energy bound needs ||u|| <= 1; got {norm:.6g}")
    past = u.t <= 0
    if not past.any():
        raise ValueError("the window contains no level with tau <= 0")
    J = u.grid.count_within(r_limit)
    r = u.r[:J]
    H = (F(u.values[past, :J]) ** 2) @ (r ** (s.n - 1)) * u.grid.dr
    env = bracket(u.t[past]) ** (2 * s.theta + 2)
    return float(np.max(H * env) / norm**2)


def envelope_field(s: Scenario, grid: RadialGrid, window: TimeWindow) -> RadialField:
    """``r^(1-m) <r>^-1 W_k(r, |t|)^-1``, the largest profile allowed by the zeroth-order norm term."""
    w = WeightSpec.from_scenario(s)
    r = grid.nodes[None, :]
    vals = r ** (1 - s.m) / bracket(r) / weight_Wk(w, r, window.times[:, None])
    return RadialField(vals, grid, window)


def source_energy_envelope(s: Scenario, taus, ell: int = 2) -> np.ndarray:
    """Quadrature of the envelope integral at each ``tau``."""
    P = LemmaParams.from_scenario(s)
    lev = level(ell)
    return np.array([htilde(P, float(t), lev) for t in np.atleast_1d(taus)])


def source_energy_consistency(s: Scenario) -> dict:
    """Each decay exponent of the envelope decomposition against ``2 theta + 2``."""
    if s.theta is None:
        raise CorollaryNotApplicableError(f"source energy bound needs k > m + 1 = {s.m + 1}; got k = {s.k}")
    ex = hsrc_exponents(LemmaParams.from_scenario(s))
    need = ex["required"]
    ex["passed"] = all(ex[key] >= need - 1e-12 for key in ("p_weight", "cone", "interior"))
    return ex
