"""Registry of weighted integral inequalities and their left-hand sides.

Every entry evaluates a left-hand side by (nested) quadrature and the
right-hand side envelope without its unknown constant.  Double integrals
over ``(lambda, tau)`` are rewritten before quadrature:

* cone integrals use characteristic coordinates ``x = lambda - tau``,
  ``y = lambda + tau`` so the factor ``(lambda - lambda_-)^(a-1)`` depends on
  ``y`` alone;
* integrals over ``0 <= lambda <= lambda_-`` use ``sigma = lambda_-`` and
  ``lambda = sigma * s`` so the factor ``(lambda_- - lambda)^(a-1)`` becomes
  ``(1 - s)^(a-1)`` on a fixed interval.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..fields import bracket as br
from .quadrature import QuadLevel, check_tail, far_panels, map_segments, map_tail, segment_rule, tail_rule

__all__ = ["LemmaParams", "LemmaSpec", "REGISTRY", "get_lemma", "lemma_ids", "PreconditionError"]


class PreconditionError(ValueError):
    """The parameter bundle lies outside a lemma's stated hypotheses."""

    def __init__(self, lemma_id: str, reasons: list[str]):
        self.lemma_id = lemma_id
        self.reasons = list(reasons)
        super().__init__(f"{lemma_id}: hypotheses not met: " + "; ".join(reasons))


@dataclass(frozen=True)
class LemmaParams:
    """Exponent bundle shared by the inequalities."""

    a: float
    m: float
    nu: float
    kappa: float
    p: float

    @property
    def k(self) -> float:
        return self.nu + self.m + self.a

    @property
    def theta(self) -> float:
        a, m, p, k = self.a, self.m, self.p, self.k
        return min((a + m) * (p - 1) - 1, (k - m) * p - 1, k - m - 1)

    @classmethod
    def from_scenario(cls, s) -> "LemmaParams":
        return cls(a=s.a, m=s.m, nu=s.nu, kappa=s.kappa_reduced, p=s.p)

    def to_dict(self) -> dict:
        return {"a": self.a, "m": self.m, "nu": self.nu, "kappa": self.kappa, "p": self.p}


# ---------------------------------------------------------------- hypotheses


def _basic(P: LemmaParams) -> list[str]:
    out = []
    if not P.a > 0:
        out.append("a > 0")
    if not P.m >= 0:
        out.append("m >= 0")
    if not P.p > 1:
        out.append("p > 1")
    if not P.kappa > 2:
        out.append("kappa > 2")
    if not 0 < P.nu < 1 / P.p:
        out.append("0 < nu < 1/p")
    return out


def _decay(P: LemmaParams) -> list[str]:
    lo = 2 / (P.p - 1)
    hi = min((P.a + P.m) * P.p - 1, P.a + P.m + 1 / P.p)
    return [] if lo <= P.k < hi else ["2/(p-1) <= k < min((a+m)p-1, a+m+1/p)"]


def _chain(P: LemmaParams) -> list[str]:
    a, m, p = P.a, P.m, P.p
    return [] if 0 < a * (p - 1) < 2 - m * p + m < a * p else ["0 < a(p-1) < 2-mp+m < ap"]


def _pot(P: LemmaParams) -> list[str]:
    return [] if P.kappa < P.m + 2 else ["kappa < m+2"]


def _applic(P: LemmaParams) -> list[str]:
    a, m, p, nu = P.a, P.m, P.p, P.nu
    out = []
    if not a * (p - 1) < 1 < (a + m) * (p - 1):
        out.append("a(p-1) < 1 < (a+m)(p-1)")
    if not nu * p < 1 < m * (p - 1) + nu * p:
        out.append("nu p < 1 < m(p-1) + nu p")
    return out


def _j2(P: LemmaParams) -> list[str]:
    return [] if P.m >= 1 >= P.a else ["m >= 1 >= a"]


def _hsrc(P: LemmaParams) -> list[str]:
    return [] if P.k > P.m + 1 else ["k > m+1"]


def _standard(P):
    return _basic(P) + _decay(P) + _chain(P)


# ---------------------------------------------------------------- shared helpers


def _W(lam, abs_tau, a, nu):
    return br(abs_tau + lam) ** a * br(abs_tau - lam) ** nu


def _Wxy(x, y, a, nu):
    return br(np.maximum(x, y)) ** a * br(np.minimum(x, y)) ** nu


def _safe_sum(w, vals):
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        prod = np.where(w > 0, w * vals, 0.0)
    return prod.sum(axis=-1)


def _integrate(f: Callable, edges, lev: QuadLevel, e_first: float = 0.0, e_last: float = 0.0,
               tail: tuple[float, float] | None = None, what: str = "integral") -> float:
    """Scalar composite integral over consecutive ``edges``.

    ``(x - edges[0])^e_first`` and ``(edges[-1] - x)^e_last`` are singular
    factors handled by Jacobi panels on the touching segment and multiplied
    explicitly elsewhere.  ``tail=(scale, decay)`` continues the integral to
    infinity past ``edges[-1]`` (then ``e_last`` must be zero).
    """
    edges = [float(e) for e in edges]
    x0, x1 = edges[0], edges[-1]
    segs = [(edges[i], edges[i + 1]) for i in range(len(edges) - 1) if edges[i + 1] > edges[i]]
    total = 0.0

    def sing(x):
        s = 1.0
        if e_first:
            s = s * np.abs(x - x0) ** e_first
        if e_last:
            s = s * np.abs(x1 - x) ** e_last
        return s

    for i, (a, b) in enumerate(segs):
        el = e_first if (i == 0 and a == x0) else 0.0
        er = e_last if (i == len(segs) - 1 and b == x1 and tail is None) else 0.0
        x, w = map_segments(a, b, segment_rule(lev, True, True, el, er), el + er)
        x, w = x[0], w[0]
        extra = 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            if e_first and el == 0:
                extra = extra * np.abs(x - x0) ** e_first
            if e_last and er == 0:
                extra = extra * np.abs(x1 - x) ** e_last
        total += float(_safe_sum(w, f(x) * extra))
    if tail is not None:
        scale, decay = tail
        rule = tail_rule(lev, far_panels(decay), True, 0.0)
        x, w, x_end = map_tail(x1, scale, rule)
        x, w = x[0], w[0]
        total += float(_safe_sum(w, f(x) * sing(x)))
        f_end = f(np.array([x_end[0]]))[0] * sing(np.array([x_end[0]]))[0] if (e_first or e_last) else f(np.array([x_end[0]]))[0]
        check_tail([total], [f_end], [x_end[0]], decay, what=what)
    return total


def _integrate_rows(f: Callable, edges: np.ndarray, lev: QuadLevel, e_first: float = 0.0,
                    e_last: float = 0.0, tail: tuple[np.ndarray, float] | None = None,
                    what: str = "inner integral") -> np.ndarray:
    """Row-wise composite integral; ``edges`` has shape ``(P, M+1)`` and must be
    nondecreasing along each row; ``f(x)`` sees ``x`` of shape ``(P, N)``.

    Singular factors act at ``edges[:, 0]`` / ``edges[:, -1]`` through the first /
    last segment, which callers keep nondegenerate.
    """
    P, M1 = edges.shape
    x0 = edges[:, :1]
    x1 = edges[:, -1:]
    total = np.zeros(P)
    nseg = M1 - 1
    for i in range(nseg):
        el = e_first if i == 0 else 0.0
        er = e_last if (i == nseg - 1 and tail is None) else 0.0
        x, w = map_segments(edges[:, i], edges[:, i + 1], segment_rule(lev, True, True, el, er), el + er)
        extra = 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            if e_first and el == 0:
                extra = extra * np.abs(x - x0) ** e_first
            if e_last and er == 0:
                extra = extra * np.abs(x1 - x) ** e_last
        total += _safe_sum(w, f(x) * extra)
    if tail is not None:
        scale, decay = tail
        rule = tail_rule(lev, far_panels(decay), True, 0.0)
        x, w, x_end = map_tail(edges[:, -1], scale, rule)
        extra = np.abs(x - x0) ** e_first if e_first else 1.0
        total += _safe_sum(w, f(x) * extra)
        xe = x_end[:, None]
        f_end = f(xe)[:, 0] * (np.abs(xe - x0)[:, 0] ** e_first if e_first else 1.0)
        check_tail(total, f_end, x_end, decay, what=what)
    return total


def _ratio(lhs, env):
    lhs = np.asarray(lhs, dtype=float)
    env = np.asarray(env, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(lhs == 0, 0.0, lhs / env)


def _cuts(lo, hi, *points):
    inner = sorted({float(c) for c in points if lo < c < hi})
    return [lo] + inner + [hi]


# ---------------------------------------------------------------- evaluators
# Each returns (lhs, envelope) arrays over the lemma's components.


def _ev_a1(P, pt, lev):
    r, t = pt["r"], pt["t"]
    a, nu = P.a, P.nu
    env = r**a / _W(r, t, a, nu)
    lo, hi = abs(t - r), t + r
    if hi <= lo:
        return np.array([0.0]), np.array([env])
    shift = lo - (t - r)
    if shift == 0:
        val = _integrate(lambda y: br(y) ** (-a - nu), [lo, hi], lev, e_first=a - 1)
    else:
        val = _integrate(lambda y: br(y) ** (-a - nu) * (y - (t - r)) ** (a - 1), [lo, hi], lev)
    return np.array([val]), np.array([env])


def _ev_a2(P, pt, lev):
    z, b, sign = pt["z"], pt["b"], pt["sign"]
    a = P.a
    env = z**a * br(z) ** (-b)
    if z == 0:
        return np.array([0.0]), np.array([env])
    if sign > 0:
        val = _integrate(lambda y: br(y) ** (-b) * (z + y) ** (a - 1), [0.0, z], lev)
    else:
        val = _integrate(lambda y: br(y) ** (-b), [0.0, z], lev, e_last=a - 1)
    return np.array([val]), np.array([env])


def _ev_ij(P, pt, lev):
    y, z = pt["y"], pt["z"]
    a, m, p, nu, kappa = P.a, P.m, P.p, P.nu, P.kappa
    e = 1 - m * p + m
    s = max(1.0, z)
    I = _integrate(lambda x: br(x + y) ** (1 - kappa) * br(x) ** (-a), [z, z + s], lev,
                   tail=(s, kappa - 1 + a), what="I")
    if z + y == 0:
        J = _integrate(lambda x: br(x) ** (-a * p), [z, z + s], lev, e_first=e,
                       tail=(s, a * p - e), what="J")
    else:
        J = _integrate(lambda x: (x + y) ** e * br(x) ** (-a * p), [z, z + s], lev,
                       tail=(s, a * p - e), what="J")
    return np.array([I, J]), np.array([br(z) ** (-a), br(z) ** (nu * p - nu - a)])


def _ev_mg(P, pt, lev):
    r, t, b1 = pt["r"], pt["t"], pt["b1"]
    a, nu = P.a, P.nu
    b2 = a + nu - b1
    w = t - r
    bw = br(w)
    val = _integrate(lambda y: br(y) ** (-b1) * np.maximum(br(y), bw) ** (-b2),
                     _cuts(w, t + r, 0.0, abs(w), -abs(w)), lev, e_first=a - 1)
    return np.array([val]), np.array([r**a / _W(r, t, a, nu)])


def _cone_integral(P, r, t, lev, inner_f, decay):
    """``int_{t-r}^{t+r} (y-t+r)^(a-1) int_{r-t}^inf g(x, y) dx dy / 2``."""
    w = t - r
    x0 = -w

    def outer(y):
        yy = y[:, None]
        c = np.sort(np.maximum(x0, np.stack([y, np.zeros_like(y)], axis=1)), axis=1)
        edges = np.concatenate([np.full((len(y), 1), x0), c], axis=1)
        last = edges[:, -1]
        scale = np.maximum(1.0, np.abs(last))
        edges = np.concatenate([edges, (last + scale)[:, None]], axis=1)
        return _integrate_rows(lambda x: inner_f(x, yy), edges, lev, tail=(scale, decay))

    return 0.5 * _integrate(outer, _cuts(w, t + r, 0.0, x0), lev, e_first=P.a - 1)


def _ev_i1(P, pt, lev):
    r, t = pt["r"], pt["t"]
    a, nu, kappa = P.a, P.nu, P.kappa
    val = _cone_integral(P, r, t, lev,
                         lambda x, y: br((x + y) / 2) ** (1 - kappa) / _Wxy(x, y, a, nu),
                         kappa - 1 + a)
    return np.array([val]), np.array([r**a / _W(r, t, a, nu)])


def _ev_j1(P, pt, lev):
    r, t = pt["r"], pt["t"]
    a, m, p, nu = P.a, P.m, P.p, P.nu
    e = 1 - m * p + m
    val = _cone_integral(P, r, t, lev,
                         lambda x, y: ((x + y) / 2) ** e / _Wxy(x, y, a, nu) ** p,
                         a * p - e)
    return np.array([val]), np.array([r**a / _W(r, t, a, nu)])


def _ev_a34(P, pt, lev):
    y, b, which = pt["y"], pt["b"], pt["part"]
    a, m, p, kappa = P.a, P.m, P.p, P.kappa
    e = 1 - m * p + m
    s = max(1.0, abs(y))
    edges = [0.0, y, y + s] if y > 0 else [0.0, s]
    if which == 3:
        val = _integrate(lambda u: br(u) ** (1 - kappa) * br(u - y) ** (-b), edges, lev,
                         tail=(s, kappa - 1 + b), what="A3")
        env = br(y) ** (-b)
    else:
        val = _integrate(lambda u: br(u) ** -1.0 * br(u - y) ** (-b), edges, lev, e_first=e,
                         tail=(s, m * (p - 1) + b), what="A4")
        env = br(y) ** (2 - m * p + m - b)
    return np.array([val]), np.array([env])


def _pm_integrals(P, r, t, lev, expo, g):
    """``int_0^{2r} |sigma -/+ r|^expo g(|lambda|, |t - sigma|) dsigma`` for both signs."""
    plus = _integrate(lambda s: (s + r) ** expo * g(s + r, np.abs(t - s)),
                      _cuts(0.0, 2 * r, t, (t - r) / 2), lev)
    left = _integrate(lambda s: g(r - s, np.abs(t - s)), _cuts(0.0, r, t, (t + r) / 2), lev, e_last=expo)
    right = _integrate(lambda s: g(s - r, np.abs(t - s)), _cuts(r, 2 * r, t, (t + r) / 2), lev, e_first=expo)
    return plus, left + right


def _ev_ipm(P, pt, lev):
    r, t = pt["r"], pt["t"]
    a, nu, kappa = P.a, P.nu, P.kappa
    plus, minus = _pm_integrals(P, r, t, lev, a,
                                lambda lam, at: br(lam) ** (1 - kappa) / _W(lam, at, a, nu))
    env = r**a / _W(r, t, a, nu)
    return np.array([plus, minus]), np.array([env, env])


def _ev_jpm(P, pt, lev):
    r, t = pt["r"], pt["t"]
    a, m, p, nu = P.a, P.m, P.p, P.nu
    plus, minus = _pm_integrals(P, r, t, lev, a + 1 - m * p + m,
                                lambda lam, at: br(lam) ** -1.0 / _W(lam, at, a, nu) ** p)
    env = r**a / _W(r, t, a, nu)
    return np.array([plus, minus]), np.array([env, env])


def _ev_b1(P, pt, lev):
    w = pt["w"]
    a, nu = P.a, P.nu
    s = max(1.0, abs(w))
    val = _integrate(lambda u: br(w - u) ** (-a - nu), [0.0, s], lev, e_first=a - 1,
                     tail=(s, 1 + nu), what="B1")
    return np.array([val]), np.array([br(w) ** (-nu)])


def _inner_s(sigma, abs_tau, lev, a, g):
    """``int_0^1 g(s, sigma) (1-s)^(a-1) ds`` per row, split at the kink ``sigma s = |tau|``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        kink = np.where(sigma > 0, abs_tau / sigma, 2.0)
    kink = np.where((kink > 0) & (kink < 1), kink, 0.5)
    P = len(sigma)
    edges = np.stack([np.zeros(P), kink, np.ones(P)], axis=1)
    sg = sigma[:, None]
    at = abs_tau[:, None]
    return _integrate_rows(lambda s: g(s, sg, at), edges, lev, e_last=a - 1)


def _ev_b23(P, pt, lev):
    r, t = pt["r"], pt["t"]
    a, m, p, nu, kappa = P.a, P.m, P.p, P.nu, P.kappa
    w = t - r
    s0 = 2 * max(w, 0.0)
    S = max(1.0, abs(w))
    e2 = 1 - m * p + 2 * m
    eo = 1 - m * p + m + a

    def b2(sig):
        inner = _inner_s(sig, sig - w, lev, a,
                         lambda s, sg, at: s**m * br(sg * s) ** (1 - kappa) / _W(sg * s, at, a, nu))
        return sig**a * inner

    def b3(sig):
        inner = _inner_s(sig, sig - w, lev, a,
                         lambda s, sg, at: s**e2 / _W(sg * s, at, a, nu) ** p)
        return sig**eo * inner

    B2 = _integrate(b2, [s0, s0 + S], lev, tail=(S, kappa - 1 + min(a, nu)), what="B2")
    B3 = _integrate(b3, [s0, s0 + S], lev, tail=(S, a * p + min(a, nu * p) - eo), what="B3")
    env = br(w) ** (-nu)
    return np.array([B2, B3]), np.array([env, env])


def _ev_i2s(P, pt, lev):
    r, t = pt["r"], pt["t"]
    a, m, p, kappa = P.a, P.m, P.p, P.kappa
    w = t - r
    lo, hi = max(w, 0.0), w + 2 * abs(w) + 1
    e = 1 - m * p + m
    e2 = 1 - m * p + 2 * m

    def ii(sig):
        P_ = len(sig)
        edges = np.stack([np.zeros(P_), np.full(P_, 0.5), np.ones(P_)], axis=1)
        sg = sig[:, None]
        return _integrate_rows(lambda s: s**m * br(sg * s) ** (1 - kappa), edges, lev, e_last=a - 1)

    I = _integrate(ii, [lo, hi], lev)
    beta_int = _integrate(lambda s: s**e2, [0.0, 1.0], lev, e_last=a - 1)
    if lo == 0:
        J = beta_int * _integrate(lambda s: np.ones_like(s), [lo, hi], lev, e_first=e)
    else:
        J = beta_int * _integrate(lambda s: s**e, [lo, hi], lev)
    return np.array([I, J]), np.array([1.0, br(w) ** (2 - m * p + m)])


def _ev_i2j2(P, pt, lev):
    r, t = pt["r"], pt["t"]
    a, m, p, nu, kappa = P.a, P.m, P.p, P.nu, P.kappa
    w = t - r
    c = max(w, 0.0)
    S = max(1.0, abs(w), 2 * r)
    e2 = 1 - m * p + 2 * m
    eo = 1 - m * p + m + a

    def i2(sig):
        inner = _inner_s(sig, np.abs(w - sig), lev, a,
                         lambda s, sg, at: s**m * br(sg * s) ** (1 - kappa) / _W(sg * s, at, a, nu))
        return (sig + 2 * r) ** (-a) * sig**a * inner

    def j2(sig):
        inner = _inner_s(sig, np.abs(w - sig), lev, a,
                         lambda s, sg, at: s**e2 / _W(sg * s, at, a, nu) ** p)
        return (sig + 2 * r) ** (-a) * sig**eo * inner

    edges = [0.0, c, c + S] if c > 0 else [0.0, S]
    I2 = _integrate(i2, edges, lev, tail=(S, kappa - 1 + min(a, nu) + a), what="I2")
    J2 = _integrate(j2, edges, lev, tail=(S, a * p + min(a, nu * p) - eo + a), what="J2")
    env = 1.0 / _W(r, t, a, nu)
    return np.array([I2, J2]), np.array([env, env])


def htilde(P: LemmaParams, tau: float, lev: QuadLevel) -> float:
    """Source-energy envelope integral for an exact envelope field at time ``tau``."""
    a, m, p, nu = P.a, P.m, P.p, P.nu
    c0 = 2 * a + 2 * m + 2 * p * (1 - m)
    T = abs(tau)
    S = max(1.0, T)

    def f(r):
        return br(r) ** (-2 * p) * br(T + r) ** (-2 * a * p) * br(T - r) ** (-2 * nu * p)

    edges = [0.0, T, T + S] if T > 0 else [0.0, S]
    decay = 2 * p + 2 * a * p + 2 * nu * p - c0
    return _integrate(f, edges, lev, e_first=c0, tail=(S, decay), what="Htilde")


def _ev_hsrc(P, pt, lev):
    tau = pt["tau"]
    val = htilde(P, tau, lev)
    return np.array([val]), np.array([br(tau) ** (-2 * P.theta - 2)])


def hsrc_exponents(P: LemmaParams) -> dict:
    """Decay exponents of the envelope decomposition and the required rate ``2 theta + 2``."""
    a, m, p, k, nu = P.a, P.m, P.p, P.k, P.nu
    delta = 3 - 2 * a
    return {
        "p_weight": 2 * p * (k - m),
        "cone": 2 * (a + m) * (p - 1),
        "interior": 2 * nu + 3 - delta,
        "required": 2 * P.theta + 2,
    }


# ---------------------------------------------------------------- point sets


def _rt_points(L: float, t_nonneg: bool = False) -> list[dict]:
    rs = np.geomspace(1e-2, L, 20)
    if t_nonneg:
        ts = np.concatenate([[0.0], np.geomspace(1e-2, L, 19)])
    else:
        pos = np.geomspace(5e-2, L, 10)
        ts = np.concatenate([-pos[::-1], [0.0], pos])
    pts = [{"r": float(r), "t": float(t)} for r in rs for t in ts]
    pts += [{"r": float(r), "t": float(r)} for r in rs]
    if not t_nonneg:
        pts += [{"r": float(r), "t": float(-r)} for r in rs]
    return pts


def _line(L: float, n: int, negative: bool = False) -> np.ndarray:
    v = np.concatenate([[0.0], np.geomspace(1e-3, L, n - 1)])
    return -v if negative else v


def _pts_a1(P, L):
    return _rt_points(L, t_nonneg=True)


def _pts_a2(P, L):
    # exponents at which the bound is invoked, plus the trivial one
    bs = sorted({0.0, P.nu, P.nu * P.p})
    return [{"z": float(z), "b": b, "sign": s} for b in bs for s in (1, -1) for z in _line(L, 100)]


def _pts_ij(P, L):
    ys = np.concatenate([-np.geomspace(L, 1e-2, 10), [0.0], np.geomspace(1e-2, L, 10)])
    ss = _line(L, 20)
    return [{"y": float(y), "z": float(abs(y) + s)} for y in ys for s in ss]


def _pts_mg(P, L):
    return [dict(pt, b1=b1) for b1 in (P.nu, P.nu * P.p) for pt in _rt_points(L)]


def _pts_rt(P, L):
    return _rt_points(L)


def _pts_a34(P, L):
    ys = np.concatenate([-np.geomspace(L, 1e-3, 100), [0.0], np.geomspace(1e-3, L, 100)])
    pts = [{"y": float(y), "b": b, "part": 3} for b in sorted({P.nu, P.nu * P.p, P.a * (P.p - 1)}) for y in ys]
    pts += [{"y": float(y), "b": b, "part": 4} for b in sorted({P.nu * P.p, P.a * (P.p - 1)}) for y in ys]
    return pts


def _pts_b1(P, L):
    return [{"w": float(w)} for w in _line(L, 400, negative=True)]


def _pts_hsrc(P, L):
    return [{"tau": float(t)} for t in _line(L, 400, negative=True)]


def _a34_hyp(P):
    out = _basic(P)
    bs3 = [P.nu, P.nu * P.p, P.a * (P.p - 1)]
    if not all(0 <= b < 1 for b in bs3):
        out.append("0 <= b < 1 for every sampled b")
    for b in (P.nu * P.p, P.a * (P.p - 1)):
        if not b < 1 < P.m * (P.p - 1) + b:
            out.append("b < 1 < m(p-1) + b for every sampled b")
            break
    if not 2 - P.m * P.p + P.m > 0:
        out.append("2 - mp + m > 0")
    return out


def _a2_hyp(P):
    out = [] if P.a > 0 else ["a > 0"]
    if not max(P.nu, P.nu * P.p) < 1:
        out.append("b < 1 for every sampled b")
    return out


# ---------------------------------------------------------------- registry


@dataclass(frozen=True)
class LemmaSpec:
    lemma_id: str
    statement: str
    coords: tuple[str, ...]
    components: tuple[str, ...]
    evaluate: Callable = field(repr=False)
    points: Callable = field(repr=False)
    hypotheses: Callable = field(repr=False)

    def check(self, P: LemmaParams) -> list[str]:
        return self.hypotheses(P)


REGISTRY: dict[str, LemmaSpec] = {}


def _register(*args):
    spec = LemmaSpec(*args)
    REGISTRY[spec.lemma_id] = spec


_register("A1", "int_{|t-r|}^{t+r} <y>^(-a-nu) (r-t+y)^(a-1) dy <= C r^a / W(r,t), r,t > 0",
          ("r", "t"), ("A1",), _ev_a1, _pts_a1, lambda P: [] if P.a > 0 and P.nu > 0 else ["a > 0, nu > 0"])
_register("A2", "int_0^z <y>^-b (z +/- y)^(a-1) dy <= C z^a <z>^-b, a > 0, b < 1",
          ("z", "b", "sign"), ("A2",), _ev_a2, _pts_a2, _a2_hyp)
_register("I_J", "I <= C <z>^-a and J <= C <z>^(nu p - nu - a) for z >= |y|",
          ("y", "z"), ("I", "J"), _ev_ij, _pts_ij, _standard)
_register("MG", "cone integral with max(<y>, <t-r>)^-b2 <= C r^a / W(r,|t|), b1 < 1, b1 + b2 = a + nu",
          ("r", "t", "b1"), ("MG",), _ev_mg, _pts_mg, _standard)
_register("I1", "potential cone double integral <= C r^a / W(r,|t|)",
          ("r", "t"), ("I1",), _ev_i1, _pts_rt, _standard)
_register("J1", "nonlinear cone double integral <= C r^a / W(r,|t|)",
          ("r", "t"), ("J1",), _ev_j1, _pts_rt, _standard)
_register("A3_A4", "half-line integrals <= C <y>^-b and C <y>^(2-mp+m-b)",
          ("y", "b", "part"), ("A3_A4",), _ev_a34, _pts_a34, _a34_hyp)
_register("IPM", "potential boundary integrals over [t-2r, t] <= C r^a / W(r,|t|)",
          ("r", "t"), ("I+", "I-"), _ev_ipm, _pts_rt, _standard)
_register("JPM", "nonlinear boundary integrals over [t-2r, t] <= C r^a / W(r,|t|)",
          ("r", "t"), ("J+", "J-"), _ev_jpm, _pts_rt, lambda P: _standard(P) + _applic(P))
_register("B1", "int_-inf^w <y>^(-a-nu) (w-y)^(a-1) dy <= C <w>^-nu, w <= 0",
          ("w",), ("B1",), _ev_b1, _pts_b1, lambda P: [] if P.a > 0 and P.nu > 0 else ["a > 0, nu > 0"])
_register("B2_B3", "interior integrals below the cone <= C <t-r>^-nu",
          ("r", "t"), ("B2", "B3"), _ev_b23, _pts_rt, lambda P: _standard(P) + ([] if P.a <= 1 else ["a <= 1"]))
_register("I2S", "bounded-window interior integrals <= C and C <t-r>^(2-mp+m)",
          ("r", "t"), ("I2s", "J2s"), _ev_i2s, _pts_rt, lambda P: _basic(P) + _pot(P) + _chain(P))
_register("I2_J2", "interior integrals with lambda_+ weight <= C / W(r,|t|), m >= 1 >= a",
          ("r", "t"), ("I2", "J2"), _ev_i2j2, _pts_rt, lambda P: _standard(P) + _pot(P) + _j2(P))
_register("HSRC", "source energy envelope <= C <tau>^(-2 theta - 2), tau <= 0",
          ("tau",), ("HSRC",), _ev_hsrc, _pts_hsrc, lambda P: _standard(P) + _hsrc(P))


def lemma_ids() -> list[str]:
    return list(REGISTRY)


def get_lemma(lemma_id: str) -> LemmaSpec:
    try:
        return REGISTRY[lemma_id]
    except KeyError:
        raise KeyError(f"unknown lemma id {lemma_id!r}; known: {', '.join(REGISTRY)}") from None
