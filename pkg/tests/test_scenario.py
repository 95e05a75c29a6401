import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from radscat.scenario import (CorollaryNotApplicableError, InvalidScenarioError, RawScenario, check_scenario,
                              critical_power, lame_parameters, reduce_decay_rates, theta, theta_exact,
                              validate_scenario)


def tags(raw):
    return [v.tag for v in check_scenario(raw)]


@pytest.mark.parametrize("n", range(2, 13))
def test_critical_power_root(n):
    p = critical_power(n)
    assert p > 1
    assert abs((n - 1) * p * p - (n + 1) * p - 2) < 1e-12


def test_critical_power_known_values():
    # closed forms: n=3 gives 1+sqrt(2), n=4 gives 2
    assert critical_power(3) == pytest.approx(1 + math.sqrt(2), abs=1e-15)
    assert critical_power(4) == pytest.approx(2.0, abs=1e-15)
    assert critical_power(1) == math.inf


@given(st.integers(min_value=2, max_value=200))
def test_lame_sum(n):
    a, m = lame_parameters(n)
    assert Fraction(a) + Fraction(m) == Fraction(n - 1, 2)
    assert a == (1.0 if n % 2 else 0.5)


def test_lame_rejects_non_integer():
    with pytest.raises(ValueError):
        lame_parameters(4.5)


def test_theta_canonical_exact():
    assert theta_exact(5, 1.9, 2.3) == Fraction(3, 10)
    assert theta(RawScenario(5, 1.9, 2.3, 2.5)) == 0.3


def test_theta_needs_k_above_m_plus_one():
    with pytest.raises(CorollaryNotApplicableError):
        theta_exact(5, 1.9, 2.0)


def test_canonical_derived_quantities(canonical):
    s = canonical
    assert (s.a, s.m) == (1.0, 1.0)
    assert s.nu == pytest.approx(0.3, abs=1e-15)
    assert s.theta == 0.3
    assert s.kappa_reduced == 2.5
    assert s.k_reduced == 2.3
    assert s.flags == ()


def test_strauss_power_rejected():
    assert "power_window" in tags(RawScenario(5, critical_power(5), 2.3, 2.5))


def test_subcritical_decay_rejected():
    p = 1.9
    assert "critical_decay" in tags(RawScenario(5, p, 2 / (p - 1) - 0.01, 2.5))


def test_low_dimension_rejected():
    assert tags(RawScenario(3, 2.5, 2.0, 2.5)) == ["dimension"]


def test_potential_decay_rejected():
    assert "potential_decay" in tags(RawScenario(5, 1.9, 2.3, 2.0))


def test_validate_raises_with_all_violations():
    with pytest.raises(InvalidScenarioError) as exc:
        validate_scenario(RawScenario(5, 1.9, 2.0, 1.5))
    found = [v.tag for v in exc.value.violations]
    assert "critical_decay" in found and "potential_decay" in found


def test_kappa_reduction_flag():
    s = validate_scenario(RawScenario(5, 1.9, 2.3, 4.0))
    # m + 2 = 3 <= 4, so kappa drops to (m + 4) / 2
    assert s.kappa_reduced == 2.5
    assert "kappa_reduced" in s.flags


def test_k_reduction_to_midpoint():
    raw = RawScenario(5, 1.9, 2.8, 2.5)
    k, _ = reduce_decay_rates(raw)
    lo, hi = 2 / 0.9, min(2 * 1.9 - 1, 2 + 1 / 1.9)
    assert k == pytest.approx(0.5 * (lo + hi), abs=1e-15)


def test_even_dimension_scenario():
    s = validate_scenario(RawScenario(4, 2.2, 1.8, 2.5, 1e-3, 1e-3))
    assert (s.a, s.m) == (0.5, 1.0)
    assert s.p_n == pytest.approx(2.0)


@given(p=st.floats(1.75, 1.99), k=st.floats(2.0, 2.6), kappa=st.floats(2.05, 2.95))
def test_validation_total_and_deterministic(p, k, kappa):
    raw = RawScenario(5, p, k, kappa, 1e-3, 1e-3)
    first = check_scenario(raw)
    assert first == check_scenario(raw)
    if not first:
        s = validate_scenario(raw)
        assert 0 < s.nu < 1 / s.p
        assert s.a + s.m == 2.0
