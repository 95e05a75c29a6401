"""Fixed point of the integral equation, the future free wave and energy decay fits.

The nonlinear solution is the limit of

    u_{i+1} = u0_minus + Duhamel(F(u_i) - V u_i),    u_0 = u0_minus,

on a finite window ``[t_min, t_max]``; Duhamel images start from zero data at
``t_min`` and the neglected history is bounded a posteriori.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .fields import (InitialData, Nonlinearity, Potential, RadialField, WeightSpec, bracket, energy_norm,
                     energy_series, norm_X, weight_Wk)
from .radial_wave import (SolverConfig, TailBoundError, duhamel, evolve_from_levels, make_grid, make_window,
                          solve_homogeneous, source_l2_norms, suggest_t_min, tail_bound)
from .scenario import Scenario

__all__ = [
    "ScatterPlan",
    "ScatterResult",
    "DecayFit",
    "SmallnessViolatedError",
    "ConvergenceError",
    "picard_solve",
    "extract_future_free_wave",
    "check_theorem_bounds",
    "energy_difference_series",
    "fit_decay",
    "scatter",
    "ScatteringSolver",
    "PowerLawDecayRegressor",
]

TAIL_TOL = 1e-3
FREE_CASE_FLOOR = 1e-300


class SmallnessViolatedError(RuntimeError):
    """The iteration does not contract: data or potential too large."""

    def __init__(self, message: str, increments: list[float]):
        super().__init__(message)
        self.increments = list(increments)


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, increments: list[float]):
        super().__init__(message)
        self.increments = list(increments)


@dataclass(frozen=True)
class ScatterPlan:
    """Discretization of a scattering run.

    ``r_max`` defaults to ``report_radius + (t_max - t_min)`` so that nothing
    reflected at the outer boundary reaches ``r <= report_radius``.
    """

    dr: float = 1 / 8
    t_min: float = -80.0
    t_max: float = 80.0
    report_radius: float = 60.0
    r_max: float | None = None
    fit_range: tuple[float, float] = (2.0, 40.0)

    def __post_init__(self):
        if not self.t_min < 0 < self.t_max:
            raise ValueError("the window must contain t = 0 in its interior")
        lo, hi = self.fit_range
        if not 0 < lo < hi:
            raise ValueError("fit range must satisfy 0 < lo < hi")

    @property
    def resolved_r_max(self) -> float:
        if self.r_max is not None:
            return self.r_max
        return self.report_radius + (self.t_max - self.t_min)


@dataclass(frozen=True)
class DecayFit:
    theta_hat: float
    stderr: float
    slope: float
    intercept: float
    n_points: int
    t_range: tuple[float, float]


@dataclass
class ScatterResult:
    scenario: Scenario
    plan: ScatterPlan
    u0_minus: RadialField
    u: RadialField
    u0_plus: RadialField | None = None
    increments: list[float] = field(default_factory=list)
    contraction: float = 0.0
    defect: float = 0.0
    norm: float = 0.0
    reference_energy: float = 0.0
    tail_bound_past: float = 0.0
    tail_bound_future: float = 0.0
    t_series: np.ndarray | None = None
    e_minus: np.ndarray | None = None
    e_plus: np.ndarray | None = None
    fit_minus: DecayFit | None = None
    fit_plus: DecayFit | None = None
    flags: list[str] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.increments)

    @property
    def theta_hat_minus(self) -> float | None:
        return None if self.fit_minus is None else self.fit_minus.theta_hat

    @property
    def theta_hat_plus(self) -> float | None:
        return None if self.fit_plus is None else self.fit_plus.theta_hat

    def summary(self) -> dict:
        s = self.scenario
        return {
            "iterations": self.iterations,
            "increments": list(self.increments),
            "contraction": self.contraction,
            "defect": self.defect,
            "norm": self.norm,
            "reference_energy": self.reference_energy,
            "tail_bound_past": self.tail_bound_past,
            "tail_bound_future": self.tail_bound_future,
            "theta": s.theta,
            "theta_hat_minus": self.theta_hat_minus,
            "theta_hat_minus_stderr": None if self.fit_minus is None else self.fit_minus.stderr,
            "theta_hat_plus": self.theta_hat_plus,
            "theta_hat_plus_stderr": None if self.fit_plus is None else self.fit_plus.stderr,
            "flags": list(self.flags),
        }


def _source(u: np.ndarray, r: np.ndarray, F: Nonlinearity, V: Potential | None) -> np.ndarray:
    G = F(u)
    if V is not None and V.V0 > 0:
        G = G - V(r)[None, :] * u
    return G


def _tail_rate(s: Scenario) -> float | None:
    # source L2 norm decays like <t>^-(theta + 1)
    return None if s.theta is None else s.theta + 1.0


def picard_solve(s: Scenario, d: InitialData, V: Potential | None, F: Nonlinearity, tol: float = 1e-8,
                 max_iter: int = 30, plan: ScatterPlan = ScatterPlan(), config: SolverConfig = SolverConfig(),
                 tail_tol: float = TAIL_TOL) -> ScatterResult:
    """Fixed point of the integral equation on the plan's window.

    Increments are measured in the weighted norm over ``r <= report_radius``.
    Three consecutive increment ratios ``>= 1`` raise
    :class:`SmallnessViolatedError`.
    """
    n = s.n
    grid = make_grid(n, plan.dr, plan.resolved_r_max, config)
    window = make_window(plan.t_min, plan.t_max, plan.dr, n, config)
    R = plan.report_radius
    w = WeightSpec.from_scenario(s)
    u0m = solve_homogeneous(d, n, grid, window, config, report_radius=R)
    r = grid.nodes
    i0 = window.index_of(0.0)
    ref = energy_norm(u0m, n, i0, r_limit=R)

    u = u0m.values
    increments: list[float] = []
    growing = 0
    converged = False
    for it in range(max_iter):
        G = _source(u, r, F, V)
        with np.errstate(over="raise", invalid="raise"):
            try:
                nxt = u0m.values + duhamel(G, n, grid, window, config).values
            except FloatingPointError:
                raise SmallnessViolatedError("iterates overflow", increments) from None
        inc = norm_X(RadialField(nxt - u, grid, window), w, r_limit=R)
        if not math.isfinite(inc):
            raise SmallnessViolatedError("iterates are no longer finite", increments)
        increments.append(inc)
        u = nxt
        if inc < tol:
            converged = True
            break
        if len(increments) >= 2 and increments[-2] > 0 and inc / increments[-2] >= 1:
            growing += 1
            if growing >= 3:
                raise SmallnessViolatedError(
                    f"increment ratio >= 1 for 3 consecutive iterations; increments {increments}", increments)
        else:
            growing = 0
    if not converged:
        raise ConvergenceError(f"no convergence to tol {tol:g} in {max_iter} iterations", increments)

    uf = RadialField(u, grid, window)
    norm = norm_X(uf, w, r_limit=R)
    if norm > 1:
        raise SmallnessViolatedError(f"fixed point has norm {norm:.4g} > 1", increments)

    G = _source(u, r, F, V)
    image = u0m.values + duhamel(G, n, grid, window, config).values
    defect = norm_X(RadialField(u - image, grid, window), w, r_limit=R)

    ratios = [increments[i] / increments[i - 1] for i in range(1, len(increments)) if increments[i - 1] > 0]
    contraction = max(ratios[1:] if len(ratios) > 1 else ratios, default=0.0)

    flags = []
    rate = _tail_rate(s)
    past_bound = 0.0
    if rate is None:
        flags.append("tail_unchecked")
    else:
        g0 = float(source_l2_norms(G[:1], n, grid)[0])
        past_bound = tail_bound(g0, plan.t_min, rate)
        if past_bound > tail_tol * ref and past_bound > 0:
            raise TailBoundError(
                f"t_min too late: source tail bound {past_bound:.3e} exceeds {tail_tol:g} x {ref:.3e}",
                past_bound, suggest_t_min(g0, plan.t_min, rate, tail_tol * ref))
    if F.A == 0 and (V is None or V.V0 == 0):
        flags.append("free_case")
    return ScatterResult(scenario=s, plan=plan, u0_minus=u0m, u=uf, increments=increments,
                         contraction=float(contraction), defect=defect, norm=norm, reference_energy=ref,
                         tail_bound_past=past_bound, flags=flags)


def extract_future_free_wave(u: RadialField, n: int, config: SolverConfig = SolverConfig(),
                             source: np.ndarray | None = None, tail_rate: float | None = None,
                             reference: float = 1.0, tail_tol: float = TAIL_TOL) -> tuple[RadialField, float]:
    """Free evolution, over the whole window, of the state of ``u`` at ``t_max``.

    With ``source`` and ``tail_rate`` the forcing neglected after ``t_max`` is
    bounded like the past tail; returns the free wave and that bound.
    """
    bound = 0.0
    if source is not None and tail_rate is not None:
        g_end = float(source_l2_norms(np.asarray(source)[-1:], n, u.grid)[0])
        bound = tail_bound(g_end, u.window.t_max, tail_rate)
        if bound > tail_tol * reference and bound > 0:
            raise TailBoundError(
                f"t_max too early: source tail bound {bound:.3e} exceeds {tail_tol:g} x {reference:.3e}",
                bound, -suggest_t_min(g_end, u.window.t_max, tail_rate, tail_tol * reference))
    v = u.values
    return evolve_from_levels(n, u.grid, u.window, v[-1], v[-2], config), bound


def check_theorem_bounds(u: RadialField, u0: RadialField, w: WeightSpec, side: str = "all",
                         r_limit: float | None = None) -> float:
    """Grid sup of ``|D^beta (u - u0)| / (r^(1-|beta|-m) <r>^(|beta|-1) W^-1)`` over ``|beta| <= 1``.

    ``side`` restricts to ``t <= 0`` (``past``), ``t >= 0`` (``future``) or keeps all
    levels; the window's first and last level are skipped for time derivatives.
    """
    if side not in ("past", "future", "all"):
        raise ValueError("side must be past, future or all")
    diff = u - u0
    if not np.any(diff.values):
        return 0.0
    t = u.t
    keep = np.ones_like(t, dtype=bool)
    if side == "past":
        keep = t <= 0
    elif side == "future":
        keep = t >= 0
    inner = keep.copy()
    inner[0] = inner[-1] = False
    J = u.grid.count_within(r_limit)
    r = u.r[None, :J]
    Winv = 1.0 / weight_Wk(w, r, t[:, None])
    e0 = r ** (1 - w.m) / bracket(r) * Winv
    e1 = r ** (-w.m) * Winv
    q0 = np.abs(diff.values[keep, :J]) / e0[keep]
    q1 = np.abs(diff.du_dr[inner, :J]) / e1[inner]
    q2 = np.abs(diff.du_dt[inner, :J]) / e1[inner]
    return float(max(q0.max(initial=0.0), q1.max(initial=0.0), q2.max(initial=0.0)))


def energy_difference_series(u: RadialField, u0: RadialField, n: int, r_limit: float | None = None):
    """Interior levels and ``||u - u0||_e`` at each of them."""
    return energy_series(u - u0, n, r_limit)


def fit_decay(t, e, t_range: tuple[float, float] | None = None, sign: str = "any") -> DecayFit:
    """Least-squares ``log e = c - theta log <t>`` over ``t_range[0] <= |t| <= t_range[1]``.

    ``sign`` selects ``t <= 0`` (``past``), ``t >= 0`` (``future``) or both.
    """
    t = np.asarray(t, dtype=float)
    e = np.asarray(e, dtype=float)
    if t.shape != e.shape or t.ndim != 1:
        raise ValueError("t and e must be 1-D arrays of equal length")
    keep = np.ones_like(t, dtype=bool)
    if sign == "past":
        keep &= t <= 0
    elif sign == "future":
        keep &= t >= 0
    elif sign != "any":
        raise ValueError("sign must be past, future or any")
    if t_range is not None:
        lo, hi = t_range
        keep &= (np.abs(t) >= lo) & (np.abs(t) <= hi)
    t, e = t[keep], e[keep]
    if t.size < 3:
        raise ValueError("fewer than three samples in the fit range")
    if np.any(e <= 0) or not np.all(np.isfinite(e)):
        raise ValueError("energy values must be positive and finite on the fit range")
    at = np.abs(t)
    if at.min() <= 0 or at.max() / at.min() < 10:
        raise ValueError("fit range must span at least one decade in |t|")
    x = np.log(bracket(t))
    y = np.log(e)
    if np.ptp(y) == 0:
        slope, intercept, stderr = 0.0, float(y[0]), 0.0
    else:
        res = stats.linregress(x, y)
        slope, intercept, stderr = float(res.slope), float(res.intercept), float(res.stderr)
    return DecayFit(theta_hat=-slope if slope else 0.0, stderr=stderr, slope=slope, intercept=intercept,
                    n_points=int(t.size), t_range=(float(at.min()), float(at.max())))


def scatter(s: Scenario, d: InitialData, V: Potential | None, F: Nonlinearity, tol: float = 1e-8,
            max_iter: int = 30, plan: ScatterPlan = ScatterPlan(), config: SolverConfig = SolverConfig(),
            tail_tol: float = TAIL_TOL) -> ScatterResult:
    """Fixed point, future free wave, energy-difference series and both decay fits."""
    res = picard_solve(s, d, V, F, tol, max_iter, plan, config, tail_tol)
    n = s.n
    R = plan.report_radius
    rate = _tail_rate(s)
    G = _source(res.u.values, res.u.r, F, V)
    res.u0_plus, res.tail_bound_future = extract_future_free_wave(
        res.u, n, config, source=G, tail_rate=rate, reference=res.reference_energy, tail_tol=tail_tol)
    t, e_minus = energy_difference_series(res.u, res.u0_minus, n, R)
    _, e_plus = energy_difference_series(res.u, res.u0_plus, n, R)
    res.t_series, res.e_minus, res.e_plus = t, e_minus, e_plus

    if "free_case" in res.flags or s.eps == 0:
        return res
    lo, hi = plan.fit_range
    for side, e, attr in (("past", e_minus, "fit_minus"), ("future", e_plus, "fit_plus")):
        try:
            setattr(res, attr, fit_decay(t, e, (lo, hi), side))
        except ValueError as exc:
            res.flags.append(f"fit_{side}_failed: {exc}")
    return res


# ---------------------------------------------------------------- estimator wrappers


class ScatteringSolver(BaseEstimator):
    """Estimator-style wrapper: configuration in ``__init__``, the run in :meth:`fit`.

    ``fit(X)`` accepts optional :class:`InitialData`; by default the data are
    generated from ``profile``.  Fitted attributes end with an underscore.
    """

    def __init__(self, n=5, p=1.9, k=2.3, kappa=2.5, eps=1e-3, V0=1e-3, A=1.0, profile="power",
                 potential_shape="power", dr=1 / 8, t_min=-80.0, t_max=80.0, report_radius=60.0,
                 fit_lo=2.0, fit_hi=40.0, tol=1e-8, max_iter=30, cfl=None):
        self.n = n
        self.p = p
        self.k = k
        self.kappa = kappa
        self.eps = eps
        self.V0 = V0
        self.A = A
        self.profile = profile
        self.potential_shape = potential_shape
        self.dr = dr
        self.t_min = t_min
        self.t_max = t_max
        self.report_radius = report_radius
        self.fit_lo = fit_lo
        self.fit_hi = fit_hi
        self.tol = tol
        self.max_iter = max_iter
        self.cfl = cfl

    def fit(self, X=None, y=None):
        from .fields import make_initial_data, make_nonlinearity, make_potential
        from .scenario import RawScenario, validate_scenario

        s = validate_scenario(RawScenario(self.n, self.p, self.k, self.kappa, self.eps, self.V0))
        if X is None:
            X = make_initial_data(self.profile, s.eps, s.k_reduced)
        elif not isinstance(X, InitialData):
            raise TypeError("X must be InitialData or None")
        V = make_potential(s.V0, s.kappa, self.potential_shape)
        F = make_nonlinearity(self.A, s.p)
        plan = ScatterPlan(dr=self.dr, t_min=self.t_min, t_max=self.t_max, report_radius=self.report_radius,
                           fit_range=(self.fit_lo, self.fit_hi))
        res = scatter(s, X, V, F, self.tol, self.max_iter, plan, SolverConfig(cfl=self.cfl))
        self.scenario_ = s
        self.result_ = res
        self.theta_hat_minus_ = res.theta_hat_minus
        self.theta_hat_plus_ = res.theta_hat_plus
        self.n_iter_ = res.iterations
        return self

    def score(self, X=None, y=None):
        """Smaller of the two fitted rates minus the predicted rate."""
        check_is_fitted(self, "result_")
        if self.scenario_.theta is None or self.theta_hat_plus_ is None or self.theta_hat_minus_ is None:
            return float("nan")
        return min(self.theta_hat_plus_, self.theta_hat_minus_) - self.scenario_.theta


class PowerLawDecayRegressor(RegressorMixin, BaseEstimator):
    """``e(t) = C <t>^-theta`` fitted by least squares in log-log coordinates."""

    def __init__(self, t_lo=2.0, t_hi=None, sign="any"):
        self.t_lo = t_lo
        self.t_hi = t_hi
        self.sign = sign

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_2d=False)
        t = np.ravel(X)
        hi = self.t_hi if self.t_hi is not None else float(np.max(np.abs(t)))
        fit = fit_decay(t, y, (self.t_lo, hi), self.sign)
        self.theta_ = fit.theta_hat
        self.stderr_ = fit.stderr
        self.intercept_ = fit.intercept
        self.fit_ = fit
        return self

    def predict(self, X):
        check_is_fitted(self, "theta_")
        t = np.ravel(check_array(X, ensure_2d=False))
        return np.exp(self.intercept_) * bracket(t) ** (-self.theta_)
