"""Radial space-time fields, admissible data generators and the two norms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "RadialGrid",
    "TimeWindow",
    "RadialField",
    "WeightSpec",
    "Profile",
    "InitialData",
    "Potential",
    "Nonlinearity",
    "AuditResult",
    "EdgeSliceError",
    "bracket",
    "make_initial_data",
    "validate_data",
    "make_potential",
    "audit_potential",
    "make_nonlinearity",
    "weight_Wk",
    "norm_X",
    "energy_norm",
    "energy_series",
    "default_audit_grid",
]

AUDIT_TOL = 1e-9


class EdgeSliceError(ValueError):
    """Raised when an energy is requested at a slice without a centered time derivative."""


def bracket(s):
    """Japanese bracket ``1 + |s|``."""
    return 1.0 + np.abs(s)


# ---------------------------------------------------------------- grid / time


@dataclass(frozen=True)
class RadialGrid:
    """Uniform radial grid with nodes ``(j + offset) * dr``, ``j = 0..J-1``."""

    dr: float
    r_max: float
    offset: float = 0.5

    def __post_init__(self):
        if not (self.dr > 0 and self.r_max > 0):
            raise ValueError("dr and r_max must be positive")
        if self.offset <= 0:
            raise ValueError("grid offset must be positive so that r = 0 is never a node")
        J = round(self.r_max / self.dr)
        if J < 4 or abs(J * self.dr - self.r_max) > 1e-9 * self.r_max:
            raise ValueError(f"r_max = {self.r_max} is not a whole number of steps dr = {self.dr}")

    @property
    def J(self) -> int:
        return round(self.r_max / self.dr)

    @cached_property
    def nodes(self) -> np.ndarray:
        r = (np.arange(self.J) + self.offset) * self.dr
        r.setflags(write=False)
        return r

    def count_within(self, radius: float | None) -> int:
        """Number of leading nodes with ``r <= radius``."""
        if radius is None:
            return self.J
        return int(np.searchsorted(self.nodes, radius * (1 + 1e-12), side="right"))


@dataclass(frozen=True)
class TimeWindow:
    """Time levels ``t_min + i*dt``, ``i = 0..N``, with ``t_max = t_min + N*dt``."""

    t_min: float
    t_max: float
    dt: float

    def __post_init__(self):
        if not (self.dt > 0 and self.t_max > self.t_min):
            raise ValueError("need dt > 0 and t_max > t_min")
        N = round((self.t_max - self.t_min) / self.dt)
        if abs(N * self.dt - (self.t_max - self.t_min)) > 1e-9 * max(1.0, self.t_max - self.t_min):
            raise ValueError("window length is not a whole number of time steps")

    @property
    def n_steps(self) -> int:
        return round((self.t_max - self.t_min) / self.dt)

    @cached_property
    def times(self) -> np.ndarray:
        t = self.t_min + np.arange(self.n_steps + 1) * self.dt
        t.setflags(write=False)
        return t

    def index_of(self, t: float) -> int:
        i = round((t - self.t_min) / self.dt)
        if not 0 <= i <= self.n_steps or abs(self.t_min + i * self.dt - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"t = {t} is not a time level of the window")
        return i


@dataclass(frozen=True, eq=False)
class RadialField:
    """Samples ``u(r_j, t_i)`` as an array of shape ``(len(times), J)``.

    Radial and time derivatives are second-order finite differences, one-sided at
    the edges; a time derivative at the first or last level is flagged by
    :func:`energy_norm`.
    """

    values: np.ndarray
    grid: RadialGrid
    window: TimeWindow

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.window.n_steps + 1, self.grid.J):
            raise ValueError(f"values shape {v.shape} does not match window x grid "
                             f"{(self.window.n_steps + 1, self.grid.J)}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def t(self) -> np.ndarray:
        return self.window.times

    @cached_property
    def du_dr(self) -> np.ndarray:
        d = np.gradient(self.values, self.grid.dr, axis=1, edge_order=2)
        d.setflags(write=False)
        return d

    @cached_property
    def du_dt(self) -> np.ndarray:
        d = np.gradient(self.values, self.window.dt, axis=0, edge_order=2)
        d.setflags(write=False)
        return d

    def with_values(self, values) -> "RadialField":
        return RadialField(values, self.grid, self.window)

    def __sub__(self, other: "RadialField") -> "RadialField":
        _check_compatible(self, other)
        return self.with_values(self.values - other.values)

    def __add__(self, other: "RadialField") -> "RadialField":
        _check_compatible(self, other)
        return self.with_values(self.values + other.values)

    def __mul__(self, c: float) -> "RadialField":
        return self.with_values(c * self.values)

    __rmul__ = __mul__


def _check_compatible(f: RadialField, g: RadialField):
    if f.grid != g.grid or f.window != g.window:
        raise ValueError("fields live on different grids or windows")


# ---------------------------------------------------------------- weights / norms


@dataclass(frozen=True)
class WeightSpec:
    k: float
    a: float
    m: float

    @property
    def nu(self) -> float:
        return self.k - self.m - self.a

    @classmethod
    def from_scenario(cls, s) -> "WeightSpec":
        return cls(k=s.k_reduced, a=s.a, m=s.m)


def weight_Wk(w: WeightSpec, r, abs_t):
    """``<|t| + r>^a <|t| - r>^nu``."""
    r = np.asarray(r, dtype=float)
    abs_t = np.abs(np.asarray(abs_t, dtype=float))
    return bracket(abs_t + r) ** w.a * bracket(abs_t - r) ** w.nu


def _radial_weights(w: WeightSpec, r):
    # sup-norm multipliers for j = 0 and j = 1
    return r ** (w.m - 1) * bracket(r), r ** w.m


def norm_X(u: RadialField, w: WeightSpec, r_limit: float | None = None,
           t_slice: slice | None = None) -> float:
    """Grid supremum of the weighted ``C^1`` norm, optionally restricted to ``r <= r_limit``."""
    J = u.grid.count_within(r_limit)
    ts = t_slice if t_slice is not None else slice(None)
    r = u.r[:J]
    t = u.t[ts]
    W = weight_Wk(w, r[None, :], t[:, None])
    w0, w1 = _radial_weights(w, r)
    v0 = np.abs(u.values[ts, :J]) * (w0 * W)
    v1 = np.abs(u.du_dr[ts, :J]) * (w1 * W)
    if v0.size == 0:
        return 0.0
    return float(max(v0.max(), v1.max()))


def energy_norm(u: RadialField, n: int, index: int, r_limit: float | None = None,
                allow_edge: bool = False) -> float:
    """Energy norm of the slice ``t = times[index]`` by the midpoint rule on the grid."""
    N = u.window.n_steps
    if index < 0:
        index += N + 1
    if not allow_edge and index in (0, N):
        raise EdgeSliceError(f"slice {index} lies on the window edge; no centered time derivative")
    J = u.grid.count_within(r_limit)
    r = u.r[:J]
    dens = (u.du_dr[index, :J] ** 2 + u.du_dt[index, :J] ** 2) * r ** (n - 1)
    return float(math.sqrt(dens.sum() * u.grid.dr))


def energy_series(u: RadialField, n: int, r_limit: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Energy norms at all interior time levels."""
    J = u.grid.count_within(r_limit)
    r = u.r[:J]
    dens = (u.du_dr[1:-1, :J] ** 2 + u.du_dt[1:-1, :J] ** 2) * r ** (n - 1)
    return u.t[1:-1].copy(), np.sqrt(dens.sum(axis=1) * u.grid.dr)


# ---------------------------------------------------------------- profiles


@dataclass(frozen=True)
class Profile:
    """Even radial profile with analytic derivatives up to order two.

    kind ``power``: ``scale * (1 + r^2)^(-rate/2)``; kind ``bump``:
    ``scale * exp(1 - 1/(1 - r^2))`` on ``r < 1``; kind ``constant``: ``scale``.
    """

    kind: str
    scale: float = 0.0
    rate: float = 0.0

    def __call__(self, r, order: int = 0):
        r = np.asarray(r, dtype=float)
        if self.scale == 0.0:
            return np.zeros_like(r)
        if self.kind == "power":
            return self.scale * _power_bracket(r, self.rate, order)
        if self.kind == "bump":
            return self.scale * _bump(r, order)
        if self.kind == "constant":
            return np.full_like(r, self.scale) if order == 0 else np.zeros_like(r)
        raise ValueError(f"unknown profile kind {self.kind!r}")

    def support_radius(self) -> float:
        return 1.0 if self.kind == "bump" else math.inf


def _power_bracket(r, rate, order):
    q = rate / 2
    s = 1.0 + r * r
    if order == 0:
        return s ** -q
    if order == 1:
        return -2 * q * r * s ** (-q - 1)
    if order == 2:
        return -2 * q * s ** (-q - 1) + 4 * q * (q + 1) * r * r * s ** (-q - 2)
    raise ValueError("only derivatives up to order 2 are available")


def _bump(r, order):
    r = np.abs(r)
    out = np.zeros_like(r)
    inside = r < 1
    x = r[inside]
    s = 1 - x * x
    b = np.exp(1 - 1 / s)
    if order == 0:
        out[inside] = b
    elif order == 1:
        out[inside] = -2 * x * b / s**2
    elif order == 2:
        out[inside] = b * (-2 / s**2 + 4 * x * x / s**4 - 8 * x * x / s**3)
    else:
        raise ValueError("only derivatives up to order 2 are available")
    return out


ZERO = Profile("constant", 0.0)


def default_audit_grid() -> np.ndarray:
    """Dense audit radii on ``(0, 1e8]``, fine near the origin and logarithmic beyond."""
    return np.unique(np.concatenate([np.linspace(1e-6, 4.0, 4001), np.geomspace(4.0, 1e8, 4001)]))


@dataclass(frozen=True)
class AuditResult:
    ratio: float
    r_worst: float
    passed: bool


def _audit(lhs: np.ndarray, rhs: np.ndarray, r: np.ndarray) -> AuditResult:
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(lhs == 0, 0.0, lhs / rhs)
    i = int(np.argmax(ratio))
    worst = float(ratio[i])
    return AuditResult(worst, float(r[i]), bool(worst <= 1 + AUDIT_TOL))


@dataclass(frozen=True)
class InitialData:
    phi: Profile
    psi: Profile
    eps: float
    k: float
    profile: str = "custom"

    def data_sum(self, r):
        r = np.asarray(r, dtype=float)
        br = bracket(r)
        return (np.abs(self.phi(r)) + br * np.abs(self.phi(r, 1)) + br**2 * np.abs(self.phi(r, 2))
                + br * np.abs(self.psi(r)) + br**2 * np.abs(self.psi(r, 1)))


def validate_data(d: InitialData, audit_grid=None) -> AuditResult:
    """Worst ratio of the data sum to ``eps <r>^-k``; passes iff ``<= 1 + 1e-9``."""
    r = default_audit_grid() if audit_grid is None else np.asarray(audit_grid, dtype=float)
    if np.any(r <= 0):
        raise ValueError("audit radii must be positive")
    return _audit(d.data_sum(r), d.eps * bracket(r) ** -d.k, r)


def _limit_ratio(profile_name: str, k: float) -> float:
    # large-r limit of the unit-scale audit ratio
    if profile_name == "power":
        return (1 + k) ** 2
    if profile_name == "power_pair":
        return (1 + k) ** 2 + k + 2
    return 0.0


def _raw_initial_data(profile_name, eps, k, c) -> InitialData:
    if profile_name == "power":
        return InitialData(Profile("power", c * eps, k), ZERO, eps, k, profile_name)
    if profile_name == "power_pair":
        return InitialData(Profile("power", c * eps, k), Profile("power", c * eps, k + 1), eps, k, profile_name)
    if profile_name == "bump":
        return InitialData(Profile("bump", c * eps), ZERO, eps, k, profile_name)
    raise ValueError(f"unknown data profile {profile_name!r}; expected power, power_pair or bump")


def make_initial_data(profile_name: str, eps: float, k: float) -> InitialData:
    """Data whose decay sum is at most ``eps <r>^-k``, normalized by a dense audit."""
    if eps < 0 or k <= 0:
        raise ValueError("need eps >= 0 and k > 0")
    unit = _raw_initial_data(profile_name, 1.0, k, 1.0)
    r = default_audit_grid()
    ratio = unit.data_sum(r) / bracket(r) ** -k
    worst = max(float(ratio.max()), _limit_ratio(profile_name, k))
    c = (1 - 1e-12) / worst
    d = _raw_initial_data(profile_name, eps, k, c)
    if eps > 0 and not validate_data(d, r).passed:
        raise RuntimeError(f"normalization failed for profile {profile_name!r}")
    return d


@dataclass(frozen=True)
class Potential:
    V: Profile
    V0: float
    kappa: float
    shape: str = "custom"

    def __call__(self, r, order: int = 0):
        return self.V(r, order)

    def potential_sum(self, r):
        r = np.asarray(r, dtype=float)
        return np.abs(self.V(r)) + bracket(r) * np.abs(self.V(r, 1))


def audit_potential(V: Potential, audit_grid=None) -> AuditResult:
    r = default_audit_grid() if audit_grid is None else np.asarray(audit_grid, dtype=float)
    return _audit(V.potential_sum(r), V.V0 * bracket(r) ** -V.kappa, r)


def make_potential(V0: float, kappa: float, shape: str = "power") -> Potential:
    """Potential with ``|V| + <r>|V'| <= V0 <r>^-kappa``."""
    if V0 < 0 or kappa <= 2:
        raise ValueError("need V0 >= 0 and kappa > 2")
    if shape not in ("power", "bump"):
        raise ValueError(f"unknown potential shape {shape!r}; expected power or bump")
    unit = Potential(Profile(shape, 1.0, kappa), 1.0, kappa, shape)
    r = default_audit_grid()
    ratio = unit.potential_sum(r) / bracket(r) ** -kappa
    worst = max(float(ratio.max()), 1 + kappa if shape == "power" else 0.0)
    V = Potential(Profile(shape, V0 * (1 - 1e-12) / worst, kappa), V0, kappa, shape)
    if V0 > 0 and not audit_potential(V, r).passed:
        raise RuntimeError("potential normalization failed")
    return V


@dataclass(frozen=True)
class Nonlinearity:
    """Odd power ``F(u) = A |u|^(p-1) u``; ``A = 0`` switches the nonlinearity off."""

    A: float
    p: float

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.A == 0:
            return np.zeros_like(u)
        return self.A * np.abs(u) ** (self.p - 1) * u

    def derivative(self, u):
        u = np.asarray(u, dtype=float)
        if self.A == 0:
            return np.zeros_like(u)
        return self.A * self.p * np.abs(u) ** (self.p - 1)


def make_nonlinearity(A: float, p: float) -> Nonlinearity:
    if A < 0 or p <= 1:
        raise ValueError("need A >= 0 and p > 1")
    return Nonlinearity(float(A), float(p))
