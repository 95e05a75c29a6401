"""Second-order leapfrog solver for the radial wave operator.

The spatial operator ``d_rr + (n-1)/r d_r`` is a tridiagonal stencil with an
even reflection at the origin and a zero ghost value past ``r_max``.  Two
discretizations are provided:

``descent``
    odd ``n`` only.  The three-dimensional scheme for ``r u`` is conjugated
    ``(n-3)/2`` times by the radial descent ``u -> r^-1 d_r u``, which moves
    the nodes to ``(j + (n-1)/4) dr``.  At Courant number one the update is
    exact for the discrete data, so the strong Huygens property survives.
``flux``
    any ``n``; cell-centered finite volumes with face weights ``r^(n-1)``.

Both are symmetric with respect to a diagonal inner product, which yields a
conserved discrete energy.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .fields import InitialData, Potential, Nonlinearity, RadialField, RadialGrid, TimeWindow, bracket

__all__ = [
    "SolverConfig",
    "RadialOperator",
    "CFLError",
    "BoundaryContaminationError",
    "TailBoundError",
    "make_grid",
    "make_window",
    "radial_operator",
    "leapfrog",
    "solve_homogeneous",
    "evolve_from_levels",
    "duhamel",
    "source_l2_norms",
    "tail_bound",
    "suggest_t_min",
    "verify_free_decay",
    "residual",
    "discrete_energy",
    "check_domain",
    "convergence_study",
    "ConvergenceStudy",
]


class CFLError(ValueError):
    pass


class BoundaryContaminationError(ValueError):
    pass


class TailBoundError(RuntimeError):
    """Truncation of a source tail exceeds tolerance; carries a suggested window end."""

    def __init__(self, message: str, bound: float, suggested: float):
        super().__init__(message)
        self.bound = bound
        self.suggested = suggested


@dataclass(frozen=True)
class SolverConfig:
    """``cfl=None`` picks 1.0 for the descent scheme and 0.5 for the flux scheme."""

    cfl: float | None = None
    scheme: str = "auto"
    boundary: str = "zero_ghost"
    order: int = 2

    def __post_init__(self):
        if self.order != 2:
            raise ValueError("only the second-order stencil is available")
        if self.boundary != "zero_ghost":
            raise ValueError(f"unknown boundary treatment {self.boundary!r}")
        if self.scheme not in ("auto", "descent", "flux"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.cfl is not None and not 0 < self.cfl <= 1:
            raise CFLError(f"Courant number must lie in (0, 1], got {self.cfl}")

    def resolve_scheme(self, n: int) -> str:
        if self.scheme == "auto":
            return "descent" if n % 2 else "flux"
        if self.scheme == "descent" and n % 2 == 0:
            raise ValueError("the descent scheme needs an odd dimension")
        return self.scheme

    def resolve_cfl(self, n: int) -> float:
        if self.cfl is not None:
            return self.cfl
        return 1.0 if self.resolve_scheme(n) == "descent" else 0.5


def grid_offset(n: int, scheme: str) -> float:
    return (n - 1) / 4 if scheme == "descent" else 0.5


def make_grid(n: int, dr: float, r_max: float, config: SolverConfig = SolverConfig()) -> RadialGrid:
    return RadialGrid(dr, r_max, grid_offset(n, config.resolve_scheme(n)))


def make_window(t_min: float, t_max: float, dr: float, n: int,
                config: SolverConfig = SolverConfig()) -> TimeWindow:
    return TimeWindow(t_min, t_max, config.resolve_cfl(n) * dr)


@dataclass(frozen=True, eq=False)
class RadialOperator:
    """``(L u)_j = (lo_j u_{j-1} + di_j u_j + up_j u_{j+1}) / dr^2``."""

    lo: np.ndarray
    di: np.ndarray
    up: np.ndarray
    weights: np.ndarray
    dr: float
    scheme: str
    cfl_limit: float

    def apply(self, u: np.ndarray) -> np.ndarray:
        v = self.di * u
        v[..., 1:] += self.lo[1:] * u[..., :-1]
        v[..., :-1] += self.up[:-1] * u[..., 1:]
        return v / self.dr**2

    @cached_property
    def matrix(self):
        from scipy.sparse import diags
        return diags([self.lo[1:], self.di, self.up[:-1]], [-1, 0, 1]) / self.dr**2


def _base_three(J: int, h: float):
    x = (np.arange(J) + 0.5) * h
    lo = np.zeros(J)
    up = (x + h) / x
    lo[1:] = x[:-1] / x[1:]
    di = np.zeros(J)
    di[0] = -1.0  # odd reflection of r*u at the origin
    return x, lo, di, up


def _descend(x, lo, di, up, h):
    J = len(x)
    y = x + h / 2
    s = lo + di + up
    lo2 = np.zeros(J)
    up2 = np.zeros(J)
    lo2[1:] = y[:-1] / y[1:] * lo[1:]
    di2 = lo + di - np.append(lo[1:], 0.0)
    up2[:-1] = y[1:] / y[:-1] * (up[1:] + s[:-1] - s[1:])
    return y, lo2, di2, up2


def _symmetrizer(lo, up):
    w = np.ones(len(lo))
    w[1:] = np.cumprod(up[:-1] / lo[1:])
    return w


def radial_operator(n: int, grid: RadialGrid, config: SolverConfig = SolverConfig()) -> RadialOperator:
    scheme = config.resolve_scheme(n)
    J, h = grid.J, grid.dr
    if abs(grid.offset - grid_offset(n, scheme)) > 1e-12:
        raise ValueError(f"grid offset {grid.offset} does not match the {scheme} scheme")
    if scheme == "descent":
        if n < 3:
            raise ValueError("the descent scheme needs n >= 3")
        x, lo, di, up = _base_three(J, h)
        for _ in range((n - 3) // 2):
            x, lo, di, up = _descend(x, lo, di, up, h)
        op = RadialOperator(lo, di - 2.0, up, _symmetrizer(lo, up), h, scheme, 1.0)
    else:
        faces = (np.arange(J + 1)) * h
        f = faces ** (n - 1)
        vol = (faces[1:] ** n - faces[:-1] ** n) / (n * h)
        lo = f[:-1] / vol
        up = f[1:] / vol
        di = -(lo + up)
        lo[0] = 0.0
        di[0] = -up[0]
        op = RadialOperator(lo, di, up, vol, h, scheme, _flux_cfl_limit(lo, di, up))
    return op


def _flux_cfl_limit(lo, di, up) -> float:
    # leapfrog stability: cfl^2 * rho(-L dr^2) <= 4
    from scipy.linalg import eigvalsh_tridiagonal

    off = np.sqrt(up[:-1] * lo[1:])
    lam = eigvalsh_tridiagonal(di, off, select="i", select_range=(0, 0))[0]
    return min(1.0, 2.0 / np.sqrt(-lam))


def check_cfl(op: RadialOperator, cfl: float):
    if cfl > op.cfl_limit + 1e-12:
        raise CFLError(f"Courant number {cfl} exceeds the stability limit {op.cfl_limit:.4f} "
                       f"of the {op.scheme} scheme")


def check_domain(grid: RadialGrid, window: TimeWindow, report_radius: float | None):
    """Reflections from ``r_max`` must not reach ``r <= report_radius`` inside the window."""
    if report_radius is None:
        return
    length = window.t_max - window.t_min
    if grid.r_max < report_radius + length - 1e-9:
        raise BoundaryContaminationError(
            f"r_max = {grid.r_max} < report_radius + window length = {report_radius + length}")


def leapfrog(op: RadialOperator, prev: np.ndarray, curr: np.ndarray, n_steps: int, dt: float,
             source: np.ndarray | None = None, out: np.ndarray | None = None):
    """Advance ``n_steps`` from two levels; ``out[0] = prev``, ``out[1] = curr``.

    ``source[i]`` is the forcing at level ``i`` of ``out``.
    """
    J = prev.shape[-1]
    if out is None:
        out = np.empty((n_steps + 1, J))
    out[0] = prev
    out[1] = curr
    c2 = dt * dt
    for i in range(1, n_steps):
        nxt = 2.0 * out[i] - out[i - 1] + c2 * op.apply(out[i])
        if source is not None:
            nxt += c2 * source[i]
        out[i + 1] = nxt
    return out


def _start_level(op, phi, psi, dt, g0=None):
    # Taylor start: u(dt) = u + dt u_t + dt^2/2 (L u + g)
    acc = op.apply(phi)
    if g0 is not None:
        acc = acc + g0
    return phi + dt * psi + 0.5 * dt * dt * acc


def solve_homogeneous(d: InitialData, n: int, grid: RadialGrid, window: TimeWindow,
                      config: SolverConfig = SolverConfig(), report_radius: float | None = None) -> RadialField:
    """Free evolution of ``(phi, psi)`` given at ``t = 0`` forward and backward through the window."""
    op = radial_operator(n, grid, config)
    dt = window.dt
    check_cfl(op, dt / grid.dr)
    check_domain(grid, window, report_radius)
    i0 = window.index_of(0.0)
    N = window.n_steps
    r = grid.nodes
    phi, psi = d.phi(r), d.psi(r)
    u = np.empty((N + 1, grid.J))
    u[i0] = phi
    if i0 < N:
        leapfrog(op, phi, _start_level(op, phi, psi, dt), N - i0, dt, out=u[i0:])
    if i0 > 0:
        back = np.empty((i0 + 1, grid.J))
        leapfrog(op, phi, _start_level(op, phi, -psi, dt), i0, dt, out=back)
        u[: i0 + 1] = back[::-1]
    return RadialField(u, grid, window)


def evolve_from_levels(n: int, grid: RadialGrid, window: TimeWindow, upper: np.ndarray, lower: np.ndarray,
                       config: SolverConfig = SolverConfig()) -> RadialField:
    """Free evolution through the whole window of the state given by its last two levels.

    ``upper`` is the level at ``t_max`` and ``lower`` the level one step earlier;
    the leapfrog recursion is run backward in time.
    """
    op = radial_operator(n, grid, config)
    check_cfl(op, window.dt / grid.dr)
    N = window.n_steps
    back = leapfrog(op, upper, lower, N, window.dt)
    return RadialField(back[::-1].copy(), grid, window)


def _as_array(G, grid, window) -> np.ndarray:
    if isinstance(G, RadialField):
        return G.values
    G = np.asarray(G, dtype=float)
    if G.shape != (window.n_steps + 1, grid.J):
        raise ValueError("source shape does not match window x grid")
    return G


def source_l2_norms(G: np.ndarray, n: int, grid: RadialGrid) -> np.ndarray:
    """``(int G^2 r^(n-1) dr)^(1/2)`` at every time level."""
    r = grid.nodes
    return np.sqrt((G * G) @ (r ** (n - 1)) * grid.dr)


def tail_bound(g_edge: float, t_edge: float, rate: float) -> float:
    """Energy bound for a source tail whose ``L^2`` norm decays like ``<t>^-rate`` past ``t_edge``."""
    if g_edge == 0:
        return 0.0
    if rate <= 1:
        return float("inf")
    return g_edge * float(bracket(t_edge)) / (rate - 1)


def suggest_t_min(g_edge: float, t_edge: float, rate: float, target: float) -> float:
    """Window end at which the same envelope gives a tail bound equal to ``target``."""
    if rate <= 1 or target <= 0:
        return float("-inf")
    b = float(bracket(t_edge))
    br = (g_edge * b**rate / ((rate - 1) * target)) ** (1 / (rate - 1))
    return -(br - 1)


def duhamel(G, n: int, grid: RadialGrid, window: TimeWindow, config: SolverConfig = SolverConfig(),
            tail_rate: float | None = None, reference: float | None = None,
            tail_tol: float = 1e-3) -> RadialField:
    """Solution of the forced equation with zero data at ``t_min``.

    With ``tail_rate`` set, the neglected history before ``t_min`` is bounded by
    assuming the source ``L^2`` norm decays like ``<t>^-tail_rate``; the bound
    must stay below ``tail_tol * reference``.
    """
    op = radial_operator(n, grid, config)
    dt = window.dt
    check_cfl(op, dt / grid.dr)
    Gv = _as_array(G, grid, window)
    if tail_rate is not None:
        g0 = float(source_l2_norms(Gv[:1], n, grid)[0])
        bound = tail_bound(g0, window.t_min, tail_rate)
        ref = reference if reference is not None else 1.0
        if bound > tail_tol * ref:
            raise TailBoundError(
                f"t_min too late: source tail bound {bound:.3e} exceeds {tail_tol:g} x {ref:.3e}",
                bound, suggest_t_min(g0, window.t_min, tail_rate, tail_tol * ref))
    J = grid.J
    zero = np.zeros(J)
    u = leapfrog(op, zero, 0.5 * dt * dt * Gv[0], window.n_steps, dt, source=Gv)
    return RadialField(u, grid, window)


def verify_free_decay(u0: RadialField, w, eps: float, n: int | None = None,
                      r_limit: float | None = None) -> float:
    """Grid maximum of ``(|d_r^j u| + |d_t^j u|) / (eps r^(1-m-j) <r>^(j-1) W^-1)``, ``j = 0, 1``."""
    from .fields import weight_Wk

    if n is not None and not (n - 1) / 2 < w.k < n - 1:
        raise ValueError(f"free decay bound needs (n-1)/2 < k < n-1; got k = {w.k}")
    if eps == 0:
        return 0.0 if not np.any(u0.values) else float("inf")
    J = u0.grid.count_within(r_limit)
    r = u0.r[:J]
    W = weight_Wk(w, r[None, :], u0.t[:, None])
    e0 = eps * r ** (1 - w.m) / bracket(r) / W
    e1 = eps * r ** (-w.m) / W
    v0 = 2 * np.abs(u0.values[:, :J]) / e0
    v1 = (np.abs(u0.du_dr[:, :J]) + np.abs(u0.du_dt[:, :J])) / e1
    return float(max(v0.max(), v1.max()))


def residual(u: RadialField, n: int, F: Nonlinearity | None = None, V: Potential | None = None,
             r_limit: float | None = None) -> float:
    """Discrete ``L^2(r^(n-1) dr dt)`` norm of the defect of the forced radial wave equation.

    Centered second differences on interior nodes (first and last time level and
    the first and last radial node are excluded).
    """
    vals = u.values
    h, dt = u.grid.dr, u.window.dt
    J = min(u.grid.count_within(r_limit), u.grid.J - 1)
    r = u.r[1:J]
    c = vals[1:-1, 1:J]
    utt = (vals[2:, 1:J] - 2 * c + vals[:-2, 1:J]) / dt**2
    urr = (vals[1:-1, 2:J + 1] - 2 * c + vals[1:-1, 0:J - 1]) / h**2
    ur = (vals[1:-1, 2:J + 1] - vals[1:-1, 0:J - 1]) / (2 * h)
    d = utt - urr - (n - 1) / r * ur
    if F is not None:
        d = d - F(c)
    if V is not None:
        d = d + V(r) * c
    return float(np.sqrt(np.sum(d * d * r ** (n - 1)) * h * dt))


def discrete_energy(op: RadialOperator, lower: np.ndarray, upper: np.ndarray, dt: float) -> float:
    """Conserved leapfrog energy between two consecutive levels."""
    w = op.weights
    v = (upper - lower) / dt
    return float(np.sum(w * v * v) - np.sum(w * upper * op.apply(lower)))


@dataclass(frozen=True)
class ConvergenceStudy:
    dr: tuple[float, ...]
    errors: tuple[float, ...]
    orders: tuple[float, ...]


def convergence_study(d: InitialData, n: int, dr_list, r_max: float, t_end: float,
                      config: SolverConfig = SolverConfig(), r_eval: float | None = None) -> ConvergenceStudy:
    """Observed order of the homogeneous solver from successive refinements.

    ``errors[i]`` is the sup distance at ``t = t_end`` on ``r <= r_eval`` between the
    runs with ``dr_list[i]`` and ``dr_list[i+1]``, the finer one transferred by a
    cubic spline; ``orders[i] = log2(errors[i] / errors[i+1])`` for halving steps.
    """
    from scipy.interpolate import CubicSpline

    dr_list = sorted(dr_list, reverse=True)
    if len(dr_list) < 3:
        raise ValueError("need at least three step sizes")
    r_eval = r_eval if r_eval is not None else r_max - 2 * t_end
    finals = []
    for h in dr_list:
        grid = make_grid(n, h, r_max, config)
        window = make_window(0.0, t_end, h, n, config)
        u = solve_homogeneous(d, n, grid, window, config)
        finals.append((grid.nodes, u.values[-1]))
    errors = []
    for (r, v), (rf, vf) in zip(finals[:-1], finals[1:]):
        keep = r <= r_eval
        errors.append(float(np.max(np.abs(v[keep] - CubicSpline(rf, vf)(r[keep])))))
    orders = tuple(float(np.log2(errors[i] / errors[i + 1]) / np.log2(dr_list[i] / dr_list[i + 1]))
                   for i in range(len(errors) - 1))
    return ConvergenceStudy(tuple(dr_list[:-1]), tuple(errors), orders)
