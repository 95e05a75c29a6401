"""Scalar parameters of the radial scattering problem.

A raw parameter bundle ``(n, p, k, kappa, eps, V0)`` is turned into a
validated :class:`Scenario` carrying the parity exponents, the Strauss
exponent, the working decay rates and the energy decay rate.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

__all__ = [
    "RawScenario",
    "Scenario",
    "Violation",
    "InvalidScenarioError",
    "CorollaryNotApplicableError",
    "lame_parameters",
    "critical_power",
    "reduce_decay_rates",
    "theta",
    "theta_exact",
    "check_scenario",
    "validate_scenario",
]


class InvalidScenarioError(ValueError):
    """Raised when a parameter bundle violates one or more standing inequalities."""

    def __init__(self, violations: list["Violation"]):
        self.violations = list(violations)
        lines = "; ".join(f"[{v.tag}] {v.message}" for v in self.violations)
        super().__init__(f"invalid scenario: {lines}")


class CorollaryNotApplicableError(ValueError):
    """Raised when the energy decay rate is requested with k <= m + 1."""


@dataclass(frozen=True)
class Violation:
    tag: str
    message: str

    def to_dict(self) -> dict:
        return {"tag": self.tag, "message": self.message}


@dataclass(frozen=True)
class RawScenario:
    n: int
    p: float
    k: float
    kappa: float
    eps: float = 0.0
    V0: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Scenario:
    n: int
    p: float
    k: float
    kappa: float
    eps: float
    V0: float
    a: float
    m: float
    nu: float
    p_n: float
    k_reduced: float
    kappa_reduced: float
    theta: float | None = None
    flags: tuple[str, ...] = field(default=())

    @property
    def raw(self) -> RawScenario:
        return RawScenario(self.n, self.p, self.k, self.kappa, self.eps, self.V0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["flags"] = list(self.flags)
        return d


def lame_parameters(n: int) -> tuple[float, float]:
    """Parity pair ``(a, m)`` with ``a + m = (n-1)/2``."""
    if int(n) != n or n < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {n!r}")
    n = int(n)
    if n % 2:
        return 1.0, (n - 3) / 2
    return 0.5, (n - 2) / 2


def critical_power(n: int) -> float:
    """Positive root of ``(n-1) p^2 = (n+1) p + 2``; ``inf`` for ``n = 1``."""
    if int(n) != n or n < 1:
        raise ValueError(f"dimension must be a positive integer, got {n!r}")
    if n == 1:
        return math.inf
    a, b, c = n - 1.0, -(n + 1.0), -2.0
    disc = math.sqrt(b * b - 4 * a * c)
    # the product of the roots is c/a, so the stable form avoids cancellation
    return (-b + disc) / (2 * a)


def _decay_interval(p: float, a: float, m: float) -> tuple[float, float]:
    return 2.0 / (p - 1.0), min((a + m) * p - 1.0, a + m + 1.0 / p)


def reduce_decay_rates(raw: RawScenario) -> tuple[float, float]:
    """Working decay rates ``(k_reduced, kappa_reduced)``.

    ``k`` is replaced by the midpoint of the admissible interval when it sits
    at or above the upper end; ``kappa`` is replaced by ``(m + 4) / 2`` when
    ``kappa >= m + 2``.
    """
    a, m = lame_parameters(raw.n)
    lo, hi = _decay_interval(raw.p, a, m)
    if not lo < hi:
        raise RuntimeError(f"empty admissible decay interval [{lo}, {hi})")
    k = raw.k
    if k >= hi:
        k = min(k, 0.5 * (lo + hi))
    kappa = raw.kappa
    if kappa >= m + 2:
        kappa = min(kappa, (m + 4) / 2)
    return k, kappa


def _frac(x: float) -> Fraction:
    # decimal reading keeps user-facing values such as 1.9 exact
    return Fraction(repr(float(x)))


def theta_exact(n: int, p: float, k: float) -> Fraction:
    """Energy decay rate in rational arithmetic; requires ``k > m + 1``."""
    a, m = lame_parameters(n)
    fa, fm, fp, fk = _frac(a), _frac(m), _frac(p), _frac(k)
    if fk <= fm + 1:
        raise CorollaryNotApplicableError(
            f"energy decay rate needs k > m + 1 = {float(fm + 1)}, got k = {k}"
        )
    return min((fa + fm) * (fp - 1) - 1, (fk - fm) * fp - 1, fk - fm - 1)


def theta(s: Scenario | RawScenario) -> float:
    """Energy decay rate computed from the original (unreduced) ``k``."""
    return float(theta_exact(s.n, s.p, s.k))


def _reduced_checks(n, p, k, kappa, a, m) -> list[Violation]:
    out: list[Violation] = []
    nu = k - m - a
    lo, hi = _decay_interval(p, a, m)
    if not (lo <= k < hi):
        out.append(Violation("decay_window", f"need 2/(p-1) <= k < min((a+m)p-1, a+m+1/p); got {lo:.6g} <= {k:.6g} < {hi:.6g}"))
    if not k < (n + 1) / 2:
        out.append(Violation("decay_below_half_dim", f"need k < (n+1)/2 = {(n + 1) / 2}; got k = {k:.6g}"))
    if not 2 < kappa < m + 2:
        out.append(Violation("potential_window", f"need 2 < kappa < m+2 = {m + 2}; got kappa = {kappa:.6g}"))
    c1, c2, c3 = a * (p - 1), 2 - m * p + m, a * p
    if not 0 < c1 < c2 < c3:
        out.append(Violation("exponent_chain", f"need 0 < a(p-1) < 2-mp+m < ap; got {c1:.6g}, {c2:.6g}, {c3:.6g}"))
    if not 0 < nu < 1 / p:
        out.append(Violation("nu_range", f"need 0 < nu < 1/p = {1 / p:.6g}; got nu = {nu:.6g}"))
    if not (a * (p - 1) < 1 < (a + m) * (p - 1)):
        out.append(Violation("lemma_applicability", f"need a(p-1) < 1 < (a+m)(p-1); got {a * (p - 1):.6g}, {(a + m) * (p - 1):.6g}"))
    if not (nu * p < 1 < m * (p - 1) + nu * p):
        out.append(Violation("lemma_applicability", f"need nu*p < 1 < m(p-1)+nu*p; got {nu * p:.6g}, {m * (p - 1) + nu * p:.6g}"))
    return out


def check_scenario(raw: RawScenario) -> list[Violation]:
    """Every violated standing inequality, in a fixed order; empty when valid."""
    out: list[Violation] = []
    n, p, k, kappa = raw.n, raw.p, raw.k, raw.kappa
    if int(n) != n or n < 4:
        out.append(Violation("dimension", f"need an integer n >= 4; got n = {n}"))
        return out
    if not all(math.isfinite(x) for x in (p, k, kappa, raw.eps, raw.V0)):
        out.append(Violation("finite", "all parameters must be finite"))
        return out
    if raw.eps < 0:
        out.append(Violation("amplitude_sign", f"need eps >= 0; got {raw.eps}"))
    if raw.V0 < 0:
        out.append(Violation("amplitude_sign", f"need V0 >= 0; got {raw.V0}"))
    if not p > 1:
        out.append(Violation("power_window", f"need p > 1; got p = {p}"))
        return out
    p_n = critical_power(n)
    if not p_n < p < 1 + 4 / (n - 1):
        out.append(Violation("power_window", f"need p_n < p < 1+4/(n-1), p_n = {p_n:.6g}, upper {1 + 4 / (n - 1):.6g}; got p = {p}"))
    if not k > 0:
        out.append(Violation("decay_positive", f"need k > 0; got k = {k}"))
    if not k >= 2 / (p - 1):
        out.append(Violation("critical_decay", f"need k >= 2/(p-1) = {2 / (p - 1):.6g}; got k = {k}"))
    if not kappa > 2:
        out.append(Violation("potential_decay", f"need kappa > 2; got kappa = {kappa}"))
    if out:
        return out
    a, m = lame_parameters(n)
    k_r, kappa_r = reduce_decay_rates(raw)
    return _reduced_checks(n, p, k_r, kappa_r, a, m)


def validate_scenario(raw: RawScenario) -> Scenario:
    """Validated scenario with derived quantities, or :class:`InvalidScenarioError`."""
    violations = check_scenario(raw)
    if violations:
        raise InvalidScenarioError(violations)
    a, m = lame_parameters(raw.n)
    k_r, kappa_r = reduce_decay_rates(raw)
    flags = []
    if k_r != raw.k:
        flags.append("k_reduced")
    if kappa_r != raw.kappa:
        flags.append("kappa_reduced")
    th = None
    if raw.k > m + 1:
        th = theta(raw)
        if k_r <= m + 1:
            # the norm rate and the energy rate no longer share a k
            flags.append("theta_k_diverges")
    else:
        flags.append("theta_undefined")
    return Scenario(
        n=int(raw.n), p=float(raw.p), k=float(raw.k), kappa=float(raw.kappa),
        eps=float(raw.eps), V0=float(raw.V0), a=a, m=m, nu=k_r - m - a,
        p_n=critical_power(raw.n), k_reduced=k_r, kappa_reduced=kappa_r,
        theta=th, flags=tuple(flags),
    )
