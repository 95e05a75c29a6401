import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone

from radscat.fields import WeightSpec, make_initial_data, make_nonlinearity, make_potential
from radscat.lemma_verify import (SeparableSource, check_duhamel_weighted_bounds, check_kernel_bound,
                                  check_pointwise_source_bounds, check_source_energy_integral,
                                  source_energy_consistency)
from radscat.radial_wave import SolverConfig, TailBoundError
from radscat.scattering import (ConvergenceError, PowerLawDecayRegressor, ScatterPlan, ScatteringSolver,
                                SmallnessViolatedError, check_theorem_bounds, fit_decay, picard_solve)
from radscat.scenario import CorollaryNotApplicableError, RawScenario, validate_scenario

SMALL = ScatterPlan(dr=0.25, t_min=-20.0, t_max=20.0, report_radius=20.0, fit_range=(2.0, 20.0))


def _inputs(eps=1e-3, V0=1e-3, A=1.0, k=2.3):
    s = validate_scenario(RawScenario(5, 1.9, k, 2.5, eps, V0))
    return s, make_initial_data("power", s.eps, s.k_reduced), make_potential(s.V0, s.kappa), make_nonlinearity(A, s.p)


def test_canonical_fixed_point(canonical_run):
    res = canonical_run
    assert res.iterations <= 8
    assert res.norm <= 1
    assert res.defect < 2e-8
    assert res.tail_bound_past <= 1e-3 * res.reference_energy
    assert res.tail_bound_future <= 1e-3 * res.reference_energy
    assert res.flags == []


def test_tight_tolerance_contracts(canonical, canonical_inputs):
    d, V, F, _ = canonical_inputs
    res = picard_solve(canonical, d, V, F, tol=1e-13, plan=ScatterPlan(dr=1 / 8))
    assert len(res.increments) >= 3
    assert res.contraction <= 0.5
    assert all(b < a for a, b in zip(res.increments, res.increments[1:]))


def test_free_case_reproduces_free_wave():
    s, d, _, F = _inputs(V0=0.0, A=0.0)
    res = picard_solve(s, d, None, F, plan=SMALL)
    assert res.increments == [0.0]
    assert "free_case" in res.flags
    assert np.array_equal(res.u.values, res.u0_minus.values)


def test_zero_data_gives_zero_solution():
    s, d, V, F = _inputs(eps=0.0)
    res = picard_solve(s, d, V, F, plan=SMALL)
    assert res.norm == 0.0 and res.iterations == 1


def test_large_amplitude_triggers_non_contraction():
    s, d, V, F = _inputs(eps=100.0)
    with pytest.raises(SmallnessViolatedError) as exc:
        picard_solve(s, d, V, F, plan=SMALL)
    inc = exc.value.increments
    assert len(inc) >= 4 and inc[-1] > inc[0]


def test_iteration_budget_exhausted():
    s, d, V, F = _inputs()
    with pytest.raises(ConvergenceError):
        picard_solve(s, d, V, F, tol=1e-30, max_iter=2, plan=SMALL)


def test_short_window_fails_tail_check():
    s, d, V, F = _inputs(eps=10.0)
    with pytest.raises(TailBoundError) as exc:
        picard_solve(s, d, V, F, plan=SMALL)
    assert exc.value.suggested < SMALL.t_min


def test_scattering_time_symmetry(canonical_run):
    # data with zero velocity: the problem is time-reversible, so both differences mirror each other
    res = canonical_run
    t, em, ep = res.t_series, res.e_minus, res.e_plus
    i0 = int(np.argmin(np.abs(t)))
    span = 300
    assert np.allclose(em[i0 - span:i0][::-1], ep[i0 + 1:i0 + span + 1], rtol=1e-3, atol=1e-14)


def test_scattering_difference_bounds_finite(canonical_run, canonical_inputs):
    _, _, _, w = canonical_inputs
    res = canonical_run
    past = check_theorem_bounds(res.u, res.u0_minus, w, "past", r_limit=60)
    future = check_theorem_bounds(res.u, res.u0_plus, w, "future", r_limit=60)
    assert 0 < past < 1 and 0 < future < 1
    assert check_theorem_bounds(res.u, res.u, w) == 0.0
    with pytest.raises(ValueError):
        check_theorem_bounds(res.u, res.u, w, "sideways")


def test_pointwise_source_bounds(canonical_run, canonical_inputs):
    _, V, F, w = canonical_inputs
    ma1, ma2 = check_pointwise_source_bounds(canonical_run.u, F, V, w, r_limit=60)
    assert 0 < ma1 <= 1.05 and 0 < ma2 <= 1.05


def test_duhamel_constants_refinement_stable(canonical, canonical_inputs, canonical_run):
    d, V, F, w = canonical_inputs
    coarse = check_duhamel_weighted_bounds(canonical_run.u, F, V, w, 5, SolverConfig(), r_limit=60)
    fine_run = picard_solve(canonical, d, V, F, plan=ScatterPlan(dr=1 / 16))
    fine = check_duhamel_weighted_bounds(fine_run.u, F, V, w, 5, SolverConfig(), r_limit=60)
    for c, f in zip(coarse, fine):
        assert np.isfinite(c) and c > 0
        assert abs(f - c) / c < 0.1


def test_source_energy_audit(canonical, canonical_run, canonical_inputs):
    _, _, F, w = canonical_inputs
    val = check_source_energy_integral(canonical_run.u, F, canonical, w, r_limit=60)
    assert 0 < val < 1
    assert source_energy_consistency(canonical)["passed"]


def test_source_energy_needs_theta():
    # n = 6 has m = 2, so k = 2.7 sits below m + 1
    s = validate_scenario(RawScenario(6, 1.75, 2.7, 2.5, 1e-3, 1e-3))
    assert s.theta is None and "theta_undefined" in s.flags
    with pytest.raises(CorollaryNotApplicableError):
        source_energy_consistency(s)


@pytest.mark.parametrize("n", [4, 5])
def test_kernel_bound_unit_constant(n):
    G = SeparableSource(amplitude=1.0, radius=1.0, center=0.0, half_width=1.0)
    samples = check_kernel_bound(G, n, [(1.0, 2.0), (3.0, 4.0), (0.5, 6.0)], dr=1 / 32)
    assert len(samples) == 9
    assert all(s.holds for s in samples)
    assert any(s.lhs > 0 for s in samples)


def test_decay_rates_canonical(canonical_run):
    res = canonical_run
    assert res.theta_hat_minus >= 0.3 - 0.15
    assert res.theta_hat_plus >= 0.3 - 0.15
    assert res.fit_minus.t_range[1] >= 39


def test_fit_recovers_planted_exponent():
    rng = np.random.default_rng(7)
    t = np.linspace(2, 40, 400)
    e = 3e-6 * (1 + t) ** -0.3 * np.exp(1e-3 * rng.standard_normal(t.size))
    fit = fit_decay(t, e, (2, 40))
    assert fit.theta_hat == pytest.approx(0.3, abs=0.005)


@settings(deadline=None, max_examples=40)
@given(theta=st.floats(0.01, 3.0), c=st.floats(1e-8, 1e3))
def test_fit_exact_power_law(theta, c):
    t = np.linspace(-40, -2, 100)
    fit = fit_decay(t, c * (1 + np.abs(t)) ** -theta, (2, 40), "past")
    assert fit.theta_hat == pytest.approx(theta, rel=1e-9, abs=1e-12)


def test_fit_input_validation():
    t = np.linspace(2, 40, 50)
    with pytest.raises(ValueError):
        fit_decay(t, -np.ones_like(t), (2, 40))
    with pytest.raises(ValueError):
        fit_decay(t, np.ones_like(t), (2, 10))
    with pytest.raises(ValueError):
        fit_decay(t[:2], np.ones(2))
    assert fit_decay(t, np.ones_like(t), (2, 40)).theta_hat == 0.0


def test_power_law_regressor():
    t = np.linspace(2, 40, 200)
    y = 2.0 * (1 + t) ** -0.3
    reg = PowerLawDecayRegressor().fit(t, y)
    assert reg.theta_ == pytest.approx(0.3, rel=1e-10)
    assert np.allclose(reg.predict(t), y)
    assert reg.score(t, y) == pytest.approx(1.0)
    assert clone(reg).get_params() == reg.get_params()


def test_scattering_solver_estimator():
    est = ScatteringSolver(dr=0.25, t_min=-40.0, t_max=40.0, report_radius=30.0, fit_hi=30.0)
    assert clone(est).get_params()["dr"] == 0.25
    est.fit()
    assert est.n_iter_ >= 1
    assert est.theta_hat_plus_ is not None
    assert np.isfinite(est.score())
