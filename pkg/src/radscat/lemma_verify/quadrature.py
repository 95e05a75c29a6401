"""Composite Gauss rules for integrands with algebraic endpoint singularities.

Reference rules live on ``[0, 1]`` (or ``[0, inf)``) and are mapped affinely
onto physical segments, one row per outer node when integrals are nested.
Segments are geometrically graded toward flagged ends; an end carrying an
explicit factor ``|y - end|^e`` gets a Gauss-Jacobi panel so the factor is
integrated exactly against polynomials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

__all__ = [
    "QuadLevel",
    "level",
    "segment_rule",
    "tail_rule",
    "map_segments",
    "map_tail",
    "integrate_weak_singular",
    "TailBoundError",
    "QuadratureError",
    "TAIL_RTOL",
]

GRADING_RATIO = 0.15
TAIL_GROWTH = 4.0
TAIL_RTOL = 1e-8


class QuadratureError(ValueError):
    pass


class TailBoundError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadLevel:
    order: int
    grades: int
    panels: int


def level(ell: int) -> QuadLevel:
    """Refinement levels: Gauss order, graded layers and uniform panels grow with ``ell``."""
    if ell < 0:
        raise ValueError("quadrature level must be >= 0")
    return QuadLevel(order=6 + 3 * ell, grades=6 + 4 * ell, panels=1 + ell)


@lru_cache(maxsize=None)
def _legendre(q: int):
    x, w = leggauss(q)
    return (x + 1) / 2, w / 2


@lru_cache(maxsize=None)
def _jacobi_left(q: int, e: float):
    # weight u^e on [0, 1]
    x, w = roots_jacobi(q, 0.0, e)
    return (x + 1) / 2, w * 2.0 ** (-1.0 - e)


def _panel(a, b, q, e_left=0.0, e_right=0.0, jacobi_end=None):
    """Nodes/weights on ``[a, b]`` for ``int f(u) u^e_left (1-u)^e_right du``."""
    if jacobi_end == "left" and e_left != 0.0:
        x, w = _jacobi_left(q, e_left)
        u = a + (b - a) * x
        # innermost panel touches the singular end, so a == 0
        return u, w * (b - a) ** (1 + e_left) * (1 - u) ** e_right
    if jacobi_end == "right" and e_right != 0.0:
        x, w = _jacobi_left(q, e_right)
        u = b - (b - a) * x
        # innermost panel touches the singular end, so b == 1
        return u, w * (b - a) ** (1 + e_right) * u**e_left
    x, w = _legendre(q)
    u = a + (b - a) * x
    return u, w * (b - a) * u**e_left * (1 - u) ** e_right


@lru_cache(maxsize=None)
def segment_rule(lev: QuadLevel, grade_left: bool = False, grade_right: bool = False,
                 e_left: float = 0.0, e_right: float = 0.0):
    """Reference rule for ``int_0^1 f(u) u^e_left (1-u)^e_right du``.

    Ends with a nonzero exponent are always graded.
    """
    if e_left <= -1 or e_right <= -1:
        raise QuadratureError("endpoint exponents must exceed -1")
    grade_left = grade_left or e_left != 0.0
    grade_right = grade_right or e_right != 0.0
    q, G = lev.order, lev.grades
    s = GRADING_RATIO
    parts = []
    mid = 0.5 if (grade_left and grade_right) else None
    if grade_left:
        top = mid if mid is not None else 1.0
        edges = [0.0] + [top * s**k for k in range(G, 0, -1)] + [top]
        for i in range(len(edges) - 1):
            parts.append(_panel(edges[i], edges[i + 1], q, e_left, e_right,
                                jacobi_end="left" if i == 0 else None))
    if grade_right:
        bottom = mid if mid is not None else 0.0
        width = 1.0 - bottom
        edges = [bottom] + [1.0 - width * s**k for k in range(1, G + 1)] + [1.0]
        for i in range(len(edges) - 1):
            last = i == len(edges) - 2
            parts.append(_panel(edges[i], edges[i + 1], q, e_left, e_right,
                                jacobi_end="right" if last else None))
    if not (grade_left or grade_right):
        edges = np.linspace(0.0, 1.0, lev.panels + 1)
        for i in range(lev.panels):
            parts.append(_panel(edges[i], edges[i + 1], q))
    u = np.concatenate([p[0] for p in parts])
    w = np.concatenate([p[1] for p in parts])
    u.setflags(write=False)
    w.setflags(write=False)
    return u, w


@lru_cache(maxsize=None)
def tail_rule(lev: QuadLevel, n_far: int, grade_start: bool = True, e_start: float = 0.0):
    """Reference rule on ``[0, G**n_far]`` for ``int f(u) u^e_start du`` with geometric far panels.

    Returns nodes, weights and the truncation point.
    """
    u0, w0 = segment_rule(lev, grade_start, False, e_start, 0.0)
    parts_u, parts_w = [u0], [w0]
    x, w = _legendre(lev.order)
    lo = 1.0
    for _ in range(n_far):
        hi = lo * TAIL_GROWTH
        u = lo + (hi - lo) * x
        parts_u.append(u)
        parts_w.append(w * (hi - lo) * u**e_start)
        lo = hi
    u = np.concatenate(parts_u)
    w = np.concatenate(parts_w)
    u.setflags(write=False)
    w.setflags(write=False)
    return u, w, lo


def far_panels(decay: float, rtol: float = TAIL_RTOL) -> int:
    """Far panels needed for an envelope ``u^-decay`` to leave a relative tail below ``rtol``."""
    if decay <= 1:
        raise TailBoundError(f"tail decay exponent {decay} does not exceed 1")
    return int(math.ceil(math.log(1e2 / rtol) / ((decay - 1) * math.log(TAIL_GROWTH)))) + 1


def map_segments(a, b, rule, e_total: float = 0.0):
    """Map a reference rule onto rows ``[a_i, b_i]``; zero-length rows get zero weight."""
    u, w = rule
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    L = np.maximum(b - a, 0.0)
    x = a[:, None] + L[:, None] * u[None, :]
    ww = (L ** (1.0 + e_total))[:, None] * w[None, :]
    return x, ww


def map_tail(start, scale, rule, e_start: float = 0.0):
    u, w, end = rule
    start = np.atleast_1d(np.asarray(start, dtype=float))
    scale = np.atleast_1d(np.asarray(scale, dtype=float))
    x = start[:, None] + scale[:, None] * u[None, :]
    ww = (scale ** (1.0 + e_start))[:, None] * w[None, :]
    return x, ww, start + scale * end


def check_tail(values, f_end, x_end, decay: float, rtol: float = TAIL_RTOL, what: str = "integral"):
    """Power-envelope tail ``f(X) X / (decay - 1)`` must stay below ``rtol`` of each row value."""
    values = np.asarray(values, dtype=float)
    tail = np.abs(f_end) * np.abs(x_end) / (decay - 1)
    bad = tail > rtol * np.abs(values)
    bad &= tail > 0
    if np.any(bad):
        i = int(np.argmax(np.where(bad, tail / np.maximum(np.abs(values), 1e-300), 0)))
        raise TailBoundError(f"{what}: tail bound {tail[i]:.3e} exceeds {rtol:g} x {values[i]:.3e}")
    return tail


def integrate_weak_singular(f: Callable, interval, exponent: float = 0.0, side: str = "left",
                            ell: int = 2, breakpoints=(), decay: float | None = None) -> float:
    """``int f(y) |y - y_s|^exponent dy`` with the singular end ``y_s`` on ``side``.

    ``interval`` may have ``inf`` as upper end when ``side='left'``; then
    ``decay`` is the power-law decay exponent of the full integrand.
    """
    lo, hi = map(float, interval)
    if not exponent > -1:
        raise QuadratureError(f"endpoint exponent must exceed -1, got {exponent}")
    if side not in ("left", "right"):
        raise QuadratureError("side must be 'left' or 'right'")
    if hi == lo:
        return 0.0
    if hi < lo:
        raise QuadratureError("interval must be ordered")
    lev = level(ell)
    ys = lo if side == "left" else hi
    cuts = sorted(b for b in breakpoints if lo < b < hi)
    total = 0.0
    finite_hi = hi if math.isfinite(hi) else (cuts[-1] if cuts else None)
    edges = [lo] + cuts + ([hi] if math.isfinite(hi) else [])
    for i in range(len(edges) - 1):
        a, b = edges[i], edges[i + 1]
        first, last = i == 0, i == len(edges) - 2
        el = exponent if (side == "left" and first) else 0.0
        er = exponent if (side == "right" and last and math.isfinite(hi)) else 0.0
        x, w = map_segments(a, b, segment_rule(lev, True, True, el, er), el + er)
        x, w = x[0], w[0]
        sing = np.abs(x - ys) ** exponent if (el == 0 and er == 0 and exponent != 0) else 1.0
        total += float(np.sum(w * f(x) * sing))
    if not math.isfinite(hi):
        if side != "left" or decay is None:
            raise QuadratureError("semi-infinite intervals need side='left' and a decay exponent")
        start = finite_hi if finite_hi is not None else lo
        e0 = exponent if start == lo else 0.0
        scale = max(1.0, abs(start))
        rule = tail_rule(lev, far_panels(decay), True, e0)
        x, w, x_end = map_tail(start, scale, rule, e0)
        x, w = x[0], w[0]
        sing = np.abs(x - ys) ** exponent if (e0 == 0 and exponent != 0) else 1.0
        total += float(np.sum(w * f(x) * sing))
        f_end = f(np.array([x_end[0]]))[0] * abs(x_end[0] - ys) ** exponent
        check_tail([total], [f_end], [x_end[0]], decay)
    return total
