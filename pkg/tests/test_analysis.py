import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dampedwave.analysis import (
    Scenario,
    default_window,
    envelope_constant,
    fit_decay,
    holder_check,
    interp_consistency,
    predicted_rate,
    riesz_thorin_prefactor,
    semi_global_sweep,
    sweep_to_csv,
    thm_infty_scenario,
)
from dampedwave.characteristics import solve
from dampedwave.damping import linear, make_damping, saturation
from dampedwave.errors import DomainError, HypothesisError
from dampedwave.grid import Grid, GridFn
from dampedwave.profiles import DampingProfile, bump_profile, flat, standing


def test_fit_exact_exponentials():
    t = np.linspace(0, 10, 41)
    f = fit_decay(list(zip(t, np.exp(-t))), (0, 10))
    assert f.K == pytest.approx(1.0, rel=1e-10) and f.beta == pytest.approx(1.0, rel=1e-10)
    assert f.r_squared == pytest.approx(1.0)
    f = fit_decay(list(zip(t, 5 * np.exp(-0.3 * t))), (0, 10))
    assert f.K == pytest.approx(5.0, rel=1e-10) and f.beta == pytest.approx(0.3, rel=1e-10)
    assert f(2.0) == pytest.approx(5 * math.exp(-0.6))


def test_fit_errors_and_window():
    t = np.linspace(0, 10, 41)
    with pytest.raises(DomainError):
        fit_decay(list(zip(t, np.zeros_like(t))))
    with pytest.raises(DomainError):
        fit_decay(list(zip(t, np.exp(-t))), (9.9, 10))
    assert default_window([0, 20]) == (5.0, 20.0)
    assert fit_decay(list(zip(t, np.exp(-t)))).window == (2.5, 10.0)


def test_envelope_constant():
    t = np.linspace(0, 5, 11)
    y = 2.0 * np.exp(-t) * (1 + 0.5 * np.sin(3 * t) ** 2)
    K = envelope_constant(list(zip(t, y)), 1.0)
    assert np.all(y <= K * np.exp(-t) * y[0] * (1 + 1e-12))
    assert np.any(np.isclose(y, K * np.exp(-t) * y[0]))


def test_predicted_rate_examples():
    assert predicted_rate(0.7, 2) == pytest.approx(0.7)
    assert predicted_rate(0.7, 6, 2) == pytest.approx(0.7)
    assert predicted_rate(0.6, 4, 3) == pytest.approx(0.2)
    assert predicted_rate(0.7, math.inf) == 0.0
    for bad in ((0.0, 4), (1.0, 1.5), (1.0, 4, 4), (1.0, 4, 1), (1.0, 2, 2)):
        with pytest.raises(DomainError):
            predicted_rate(*bad)


@given(beta=st.floats(0.01, 10), p=st.floats(2, 100), dp=st.floats(0.01, 10))
def test_predicted_rate_decreasing_in_p(beta, p, dp):
    assert predicted_rate(beta, p + dp) < predicted_rate(beta, p)
    assert predicted_rate(beta, 1e12) < 1e-10 * beta


@given(beta=st.floats(0.01, 10), p=st.floats(2.5, 50))
def test_predicted_rate_in_q_continuous_and_vanishing(beta, p):
    qs = np.linspace(2, p, 200, endpoint=False)
    r = np.array([predicted_rate(beta, p, q) for q in qs])
    assert np.all(np.diff(r) < 0)
    assert predicted_rate(beta, p, p * (1 - 1e-9)) < 1e-6 * beta


def test_riesz_thorin_prefactor():
    assert riesz_thorin_prefactor(1.0, 3.0, 2) == pytest.approx(3.0)
    assert riesz_thorin_prefactor(2.0, 1.0, 4) == pytest.approx(2.0)


def test_holder_equality_for_constants_and_p2():
    g = Grid(16)
    c = GridFn(g, np.full(17, 3.0))
    ok, lhs, rhs = holder_check(c, 5.0)
    assert ok and lhs == pytest.approx(rhs, rel=1e-14)
    f = g.sample(lambda x: np.sin(7 * x))
    ok, lhs, rhs = holder_check(f, 2.0)
    assert ok and lhs == pytest.approx(rhs, rel=1e-14)


def test_interp_consistency_on_damped_run():
    g = Grid(128)
    z0, z1 = standing(g)
    tr = solve(z0, z1, saturation(), bump_profile(g), 20.0, 0.125)
    rep = interp_consistency(tr, 4.0, (5, 20))
    assert rep.holder_violations == [] and rep.max_holder_ratio <= 1 + 1e-8
    assert rep.beta2 > 0 and rep.fit2.r_squared >= 0.95
    assert rep.predicted == pytest.approx(rep.beta2 / 2)
    assert rep.rate_ok and rep.passed
    with pytest.raises(DomainError):
        interp_consistency(tr, 2.0)


def _scenario(damping, n=64):
    g = Grid(n)
    z0, z1 = standing(g)
    return Scenario(z0, z1, damping, bump_profile(g), 12.0, 0.25, fit_window=(3, 12))


def test_sweep_linear_is_global():
    rows = semi_global_sweep(_scenario(linear()), [0.5, 1, 2])
    betas = [r.beta for r in rows]
    assert max(betas) - min(betas) <= 1e-8 * max(betas)
    assert all(r.d0 == pytest.approx(1.0) and r.d1 == pytest.approx(1.0) for r in rows)


def test_sweep_saturation_is_semi_global():
    rows = semi_global_sweep(_scenario(saturation()), [0.5, 1, 2, 4])
    for r in rows:
        assert r.d0 == pytest.approx(min(1.0, 1 / (2 * r.R)), abs=1e-6)
    assert all(b.d0 <= a.d0 for a, b in zip(rows, rows[1:]))
    assert all(b.d1 >= a.d1 for a, b in zip(rows, rows[1:]))
    assert rows[-1].beta <= rows[0].beta
    text = sweep_to_csv(rows)
    assert text.splitlines()[0] == "R,d0,d1,K,beta,r2" and len(text.splitlines()) == 5


def test_sweep_validation():
    sc = _scenario(linear(), 16)
    with pytest.raises(DomainError):
        semi_global_sweep(sc, [2, 1])
    with pytest.raises(DomainError):
        semi_global_sweep(sc, [])
    g = Grid(16)
    zero = Scenario(g.zeros(), g.zeros(), linear(), bump_profile(g), 1.0, 0.25)
    with pytest.raises(DomainError):
        zero.scaled_to(1.0)
    assert sc.scaled_to(2.5).hinf0() == pytest.approx(2.5)


def test_thm_infty_zero_data():
    g = Grid(64)
    rep = thm_infty_scenario(g.zeros(), g.zeros(), linear(), bump_profile(g), 4.0)
    assert rep.envelope_ok and np.all(rep.hinf == 0) and np.all(rep.u_series == 0)


def test_thm_infty_linear_envelope():
    g = Grid(128)
    z0, z1 = flat(g)
    rep = thm_infty_scenario(z0, z1, linear(), bump_profile(g), 20.0, 0.25)
    assert rep.envelope_ok
    assert rep.hinf_rate > 0
    assert 0 < rep.beta1 < rep.beta2


def test_thm_infty_hypotheses():
    g = Grid(64)
    z0, z1 = flat(g)
    with pytest.raises(HypothesisError, match="monotone"):
        thm_infty_scenario(z0, z1, make_damping("saturation_nonmonotone_valid"), bump_profile(g), 4.0)
    with pytest.raises(HypothesisError, match="a1"):
        thm_infty_scenario(z0, z1, linear(), DampingProfile(bump_profile(g).a, a_inf=1.0), 4.0)
    s0, s1 = standing(g)
    with pytest.raises(HypothesisError, match="derivatives"):
        thm_infty_scenario(s0, s1, linear(), bump_profile(g), 4.0)
