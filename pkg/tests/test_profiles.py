import math

import numpy as np
import pytest

from dampedwave.errors import DomainError, UnknownNameError
from dampedwave.grid import Grid, GridFn
from dampedwave.profiles import (
    DampingProfile,
    bump_profile,
    constant_profile,
    flat,
    make_initial_data,
    make_profile,
    pulse,
    standing,
    table_profile,
)


def test_bump_support_and_bounds():
    g = Grid(200)
    p = bump_profile(g, 0.5, 0.4)
    assert p.support == (pytest.approx(0.3), pytest.approx(0.7))
    a = p.a.values
    assert a.max() == pytest.approx(1.0)
    assert np.abs(a[(g.x <= 0.3) | (g.x >= 0.7)]).max() < 1e-20
    assert p.a1 == pytest.approx(math.pi / 0.4)
    assert np.abs(np.diff(a)).max() / g.dx <= p.a1


def test_profile_invariants_enforced():
    g = Grid(4)
    with pytest.raises(DomainError):
        DampingProfile(GridFn(g, [0, -1, 0, 0, 0]), a_inf=1)
    with pytest.raises(DomainError):
        DampingProfile(GridFn(g, [0, 2, 0, 0, 0]), a_inf=1)
    with pytest.raises(DomainError):
        DampingProfile(GridFn(g, [0, 1, 0, 0, 0]), a_inf=1, a1=1.0)
    with pytest.raises(DomainError):
        constant_profile(g, -1)


def test_constant_and_table():
    g = Grid(10)
    assert constant_profile(g, 0).is_zero
    assert not constant_profile(g, 2).is_zero
    t = table_profile(g, [0, 0.5, 1], [0, 2, 0])
    assert t.a_inf == pytest.approx(2.0)
    assert t.a1 == pytest.approx(4.0)


def test_registries():
    g = Grid(8)
    assert make_profile("bump", g, width=0.5).name == "bump"
    with pytest.raises(UnknownNameError):
        make_profile("nope", g)
    with pytest.raises(DomainError):
        make_profile("bump", g, radius=1)
    with pytest.raises(UnknownNameError):
        make_initial_data("nope", g)


def test_initial_data_shapes():
    g = Grid(64)
    for z0, z1 in (standing(g, 2, 1.0, 0.5), pulse(g, velocity=1.0), flat(g), make_initial_data("standing", g)):
        assert z0.dirichlet and z1.dirichlet
        assert z0.grid == g
    z0, _ = flat(g)
    # sin^3 is flat at both ends
    assert abs(z0.values[1]) < 1e-3 * np.abs(z0.values).max()
