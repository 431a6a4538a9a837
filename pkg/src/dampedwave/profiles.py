"""Damping coefficient profiles a(x) and initial-data families."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnknownNameError
from .grid import Grid, GridFn


@dataclass(frozen=True)
class DampingProfile:
    """Nonnegative damping coefficient sampled on the grid.

    ``a_inf`` bounds a from above; ``a1`` (if known) bounds |a'|.
    """

    a: GridFn
    a_inf: float
    a1: float | None = None
    support: tuple[float, float] | None = None
    name: str = "custom"

    def __post_init__(self):
        vals = self.a.values
        if np.any(vals < 0):
            raise DomainError("damping profile must be nonnegative")
        if np.any(vals > self.a_inf * (1 + 1e-12)):
            raise DomainError("damping profile exceeds its declared bound a_inf")
        if self.a1 is not None:
            slope = np.abs(np.diff(vals)) / self.a.grid.dx
            if slope.size and slope.max() > self.a1 * (1 + 1e-6):
                raise DomainError("finite-difference |a'| exceeds the declared bound a1")

    @property
    def grid(self) -> Grid:
        return self.a.grid

    @property
    def is_zero(self) -> bool:
        return not np.any(self.a.values)


def constant_profile(grid: Grid, value: float = 1.0) -> DampingProfile:
    value = float(value)
    if value < 0:
        raise DomainError("constant profile must be nonnegative")
    return DampingProfile(
        a=GridFn(grid, np.full(grid.n + 1, value)),
        a_inf=value,
        a1=0.0,
        support=(0.0, 1.0) if value > 0 else None,
        name="constant",
    )


def bump_profile(grid: Grid, center: float = 0.5, width: float = 0.4, amplitude: float = 1.0) -> DampingProfile:
    """C^1 bump ``amplitude * cos^2(pi (x - center)/width)`` on its support."""
    if width <= 0 or amplitude < 0:
        raise DomainError("bump needs positive width and nonnegative amplitude")
    lo, hi = center - width / 2, center + width / 2
    x = grid.x
    inside = np.abs(x - center) < width / 2
    vals = np.where(inside, amplitude * np.cos(math.pi * (x - center) / width) ** 2, 0.0)
    return DampingProfile(
        a=GridFn(grid, vals),
        a_inf=float(amplitude),
        a1=float(amplitude * math.pi / width),
        support=(max(lo, 0.0), min(hi, 1.0)),
        name="bump",
    )


def table_profile(grid: Grid, xs, values) -> DampingProfile:
    xs = np.asarray(xs, dtype=float)
    vals = np.interp(grid.x, xs, np.asarray(values, dtype=float))
    slope = np.abs(np.diff(vals)) / grid.dx
    nz = np.flatnonzero(vals > 0)
    support = (float(grid.x[nz[0]]), float(grid.x[nz[-1]])) if nz.size else None
    return DampingProfile(
        a=GridFn(grid, vals),
        a_inf=float(vals.max()),
        a1=float(slope.max()),
        support=support,
        name="table",
    )


PROFILES = {
    "constant": constant_profile,
    "bump": bump_profile,
    "table": table_profile,
}


def make_profile(name: str, grid: Grid, **params) -> DampingProfile:
    try:
        factory = PROFILES[name]
    except KeyError:
        raise UnknownNameError("profile", name) from None
    try:
        return factory(grid, **params)
    except TypeError as exc:
        raise DomainError(f"bad parameters for profile {name!r}: {exc}") from None


# ---------------------------------------------------------------------------
# initial data: each factory returns (z0, z1) as dirichlet grid functions


def standing(grid: Grid, k: int = 1, amplitude: float = 1.0, velocity: float = 0.0):
    """``z0 = amplitude sin(k pi x)``, ``z1 = velocity sin(k pi x)``."""
    k = int(k)
    z0 = grid.sample(lambda x: amplitude * np.sin(k * math.pi * x))
    z1 = grid.sample(lambda x: velocity * np.sin(k * math.pi * x))
    return z0, z1


def pulse(grid: Grid, center: float = 0.5, width: float = 0.3, amplitude: float = 1.0, velocity: float = 0.0):
    """Smooth compactly supported hump ``cos^4`` in z0 (and optionally z1)."""
    if width <= 0:
        raise DomainError("pulse width must be positive")

    def hump(x):
        inside = np.abs(x - center) < width / 2
        return np.where(inside, np.cos(math.pi * (x - center) / width) ** 4, 0.0)

    return grid.sample(lambda x: amplitude * hump(x)), grid.sample(lambda x: velocity * hump(x))


def flat(grid: Grid, amplitude: float = 1.0, velocity: float = 0.0):
    """``sin^3(pi x)`` data: vanishing first and second derivatives at x = 0, 1."""
    z0 = grid.sample(lambda x: amplitude * np.sin(math.pi * x) ** 3)
    z1 = grid.sample(lambda x: velocity * np.sin(math.pi * x) ** 3)
    return z0, z1


def table(grid: Grid, xs, z0_values, z1_values=None):
    xs = np.asarray(xs, dtype=float)
    z0 = grid.sample(lambda x: np.interp(x, xs, np.asarray(z0_values, dtype=float)))
    if z1_values is None:
        z1 = grid.zeros()
    else:
        z1 = grid.sample(lambda x: np.interp(x, xs, np.asarray(z1_values, dtype=float)))
    return z0, z1


INITIAL_DATA = {
    "standing": standing,
    "pulse": pulse,
    "flat": flat,
    "table": table,
}


def make_initial_data(name: str, grid: Grid, **params):
    try:
        factory = INITIAL_DATA[name]
    except KeyError:
        raise UnknownNameError("initial data", name) from None
    try:
        return factory(grid, **params)
    except TypeError as exc:
        raise DomainError(f"bad parameters for initial data {name!r}: {exc}") from None
