import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_sector_quotient
from dampedwave.damping import (
    CATALOG,
    eval_quotient,
    linear,
    log_sublinear,
    make_damping,
    power_growth,
    saturation,
    saturation_composite,
    sector_bounds,
    smooth_saturation,
    validate_damping,
)
from dampedwave.errors import DomainError, EvaluationError, UnknownNameError


def test_quotient_examples():
    assert eval_quotient(saturation(), 0.0) == 1.0
    assert eval_quotient(saturation(), 2.0) == 0.5
    assert eval_quotient(linear(3.0), 7.2) == pytest.approx(3.0, rel=1e-15)


def test_quotient_at_zero_is_c1_not_nan():
    for name in CATALOG:
        spec = make_damping(name)
        with np.errstate(all="raise"):
            assert eval_quotient(spec, 0.0) == spec.c1


def test_quotient_array_and_continuity():
    spec = smooth_saturation()
    s = np.array([-1e-7, 0.0, 1e-7])
    q = eval_quotient(spec, s)
    assert q.shape == (3,)
    assert np.allclose(q, 1.0, atol=1e-12)


def test_quotient_rejects_non_finite():
    spec = power_growth(r=2)
    with pytest.raises(EvaluationError):
        with np.errstate(over="ignore"):
            eval_quotient(spec, 1e200)


@pytest.mark.parametrize("spec", [saturation(), linear(1.0), linear(2.5), smooth_saturation(), log_sublinear()])
def test_catalog_entries_validate(spec):
    rep = validate_damping(spec, 5.0, 2001)
    assert rep.passed, rep.violations
    assert rep.violations == ()


def test_nonmonotone_example_as_written_fails_sign_condition():
    spec = make_damping("saturation_nonmonotone")
    assert spec.c1 == pytest.approx(0.25 - 1.0 / 3.0)
    rep = validate_damping(spec, 1.0, 2001)
    assert not rep.passed
    assert "sign" in rep.failed_properties()
    s_bad = [v[1] for v in rep.violations if v[0] == "sign"]
    assert min(abs(s) for s in s_bad) < 0.01


def test_nonmonotone_variant_is_valid_and_nonmonotone():
    spec = make_damping("saturation_nonmonotone_valid")
    assert spec.c1 == pytest.approx(0.25 + 1.0 / 3.0)
    assert validate_damping(spec, 5.0, 4001).passed
    s = np.linspace(0, 3, 3001)
    assert np.any(np.diff(spec.sigma(s)) < 0)


def test_power_family_flags_zero_slope():
    rep = validate_damping(power_growth(r=2, k=1), 2.0, 401)
    assert rep.failed_properties() == ["c1_positive"]


def test_validation_detects_broken_oddness_and_flags():
    base = saturation()
    from dataclasses import replace

    shifted = replace(base, sigma=lambda s: np.clip(s, -1, 1) + 1e-6 * (s > 0))
    assert "odd" in validate_damping(shifted, 2.0, 101).failed_properties()
    lying_m = replace(base, linear_bound_m=0.5)
    assert "linear_bound" in validate_damping(lying_m, 2.0, 101).failed_properties()
    lying_mono = replace(make_damping("saturation_nonmonotone_valid"), monotone=True)
    assert "monotone" in validate_damping(lying_mono, 3.0, 1001).failed_properties()


def test_validation_preconditions():
    with pytest.raises(DomainError):
        validate_damping(saturation(), 0.0, 10)
    with pytest.raises(DomainError):
        validate_damping(saturation(), 1.0, 2)


def test_sector_examples():
    sb = sector_bounds(saturation(), 1.0, "quotient")
    assert sb.d0 == pytest.approx(0.5, abs=1e-12)
    assert sb.d1 == 1.0
    for k in (0.3, 1.0, 4.0):
        sb = sector_bounds(linear(k), 2.7, "quotient")
        assert sb.d0 == pytest.approx(k, rel=1e-14) and sb.d1 == pytest.approx(k, rel=1e-14)
    sb = sector_bounds(saturation(), 0.4, "derivative")
    assert (sb.d0, sb.d1) == (1.0, 1.0)


def test_sector_matches_brute_force_oracle():
    spec = make_damping("saturation_nonmonotone_valid")
    for R in (0.3, 1.0, 2.5):
        sb = sector_bounds(spec, R, "quotient")
        lo, hi = brute_sector_quotient(spec.sigma, R, c1=spec.c1)
        assert sb.d0 == pytest.approx(lo, rel=1e-6)
        assert sb.d1 == pytest.approx(hi, rel=1e-6)


def test_sector_warns_when_d0_not_positive():
    with pytest.warns(UserWarning):
        sb = sector_bounds(make_damping("saturation_nonmonotone"), 1.0)
    assert not sb.hypothesis_ok and sb.d0 < 0
    with pytest.raises(DomainError):
        sector_bounds(saturation(), -1.0)


def test_registry_miss_and_bad_params():
    with pytest.raises(UnknownNameError) as ei:
        make_damping("does_not_exist")
    assert "does_not_exist" in str(ei.value)
    with pytest.raises(DomainError):
        make_damping("saturation", slope=2)
    assert make_damping("linear", k=2.0).c1 == 2.0


def test_log_sublinear_constants():
    spec = log_sublinear()
    assert spec.c1 == pytest.approx(1 / math.log(2))
    s = np.linspace(-50, 50, 10001)
    assert np.all(np.abs(spec.sigma(s)) <= spec.linear_bound_m * np.abs(s) + 1e-15)


def test_lipschitz_estimate_bounds_difference_quotients():
    spec = make_damping("saturation_nonmonotone_valid")
    L = spec.lipschitz_on(3.0)
    s = np.linspace(-3, 3, 20001)
    q = np.abs(np.diff(spec.sigma(s)) / np.diff(s))
    assert q.max() <= L


# properties ---------------------------------------------------------------

VALID = ["saturation", "linear", "tanh", "log_sublinear", "saturation_nonmonotone_valid"]


@given(name=st.sampled_from(VALID), s=st.floats(-50, 50, allow_nan=False).filter(lambda v: v != 0))
def test_quotient_positive_and_even(name, s):
    spec = make_damping(name)
    q = eval_quotient(spec, s)
    assert q > 0
    assert q == pytest.approx(eval_quotient(spec, -s), rel=1e-12, abs=1e-15)


@given(name=st.sampled_from(VALID), r1=st.floats(0.05, 5), r2=st.floats(0.05, 5))
def test_sector_monotone_in_R(name, r1, r2):
    spec = make_damping(name)
    r1, r2 = sorted((r1, r2))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a, b = sector_bounds(spec, r1, start_points=2**10), sector_bounds(spec, r2, start_points=2**10)
    slack = 1e-6
    assert a.d0 >= b.d0 - slack * abs(b.d0)
    assert a.d1 <= b.d1 + slack * abs(b.d1)


@given(R=st.floats(0.05, 20))
def test_saturation_d0_closed_form(R):
    assert sector_bounds(saturation(), R).d0 == pytest.approx(min(1.0, 1.0 / (2 * R)), rel=1e-6)


@given(c=st.floats(-0.2, 0.2))
def test_composite_slope_at_zero(c):
    spec = saturation_composite(wiggle=c)
    assert spec.c1 == pytest.approx(0.25 + 10 * c)
