"""Norms and energy functionals of a wave state, plus a monotonicity audit."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError
from .grid import d2dx2, ddx, lp_norm, trapezoid

NORM_COLUMNS = ("t", "h2", "h4", "h8", "hinf", "phi2", "phi4", "phi8", "classical")


def gradient(state):
    """z_x of a state: the solver-supplied gradient when present, else centered differences."""
    return state.zx if getattr(state, "zx", None) is not None else ddx(state.z)


def _check_p(p):
    if p is None or not p >= 2:
        raise DomainError(f"energy norms need p >= 2, got {p}")


def hp_norm(state, p) -> float:
    """``||z_x||_p + ||z_t||_p`` with centered differences for z_x."""
    _check_p(p)
    return lp_norm(gradient(state), p) + lp_norm(state.v, p)


def dp_norm(state, p) -> float:
    """``||z_xx||_p + ||z_tx||_p`` from second and mixed differences."""
    _check_p(p)
    return lp_norm(d2dx2(state.z), p) + lp_norm(ddx(state.v), p)


def classical_energy(state) -> float:
    zx = gradient(state).values
    v = state.v.values
    return 0.5 * trapezoid(v * v + zx * zx, state.grid.dx)


@dataclass(frozen=True)
class ConvexWeight:
    """Even convex weight F used in the functional
    ``Phi = int F(z_t + z_x) + F(z_t - z_x) dx``."""

    kind: str
    F: Callable = field(repr=False)
    param: float | None = None
    name: str = ""

    def __call__(self, s):
        return self.F(np.asarray(s, dtype=float))

    @classmethod
    def power_p(cls, p: float) -> "ConvexWeight":
        """``F(s) = |s|^p / p``."""
        if not p >= 1:
            raise DomainError("power weight needs p >= 1")
        p = float(p)
        return cls("power_p", lambda s: np.abs(s) ** p / p, p, f"phi{p:g}")

    @classmethod
    def pos_square(cls, c: float) -> "ConvexWeight":
        """``F(s) = [max(|s| - c, 0)]^2``."""
        if not c >= 0:
            raise DomainError("pos_square threshold must be nonnegative")
        c = float(c)
        return cls("pos_square", lambda s: np.maximum(np.abs(s) - c, 0.0) ** 2, c, f"pos{c:g}")

    @classmethod
    def custom(cls, F: Callable, name: str = "custom", radius: float = 10.0, samples: int = 401) -> "ConvexWeight":
        """Wrap a user function after probing evenness, convexity and minimality at 0."""
        w = cls("custom", F, None, name)
        s = np.linspace(-radius, radius, samples)
        fs = w(s)
        scale = 1e-10 * max(1.0, float(np.abs(fs).max()))
        if np.abs(fs - w(-s)).max() > scale:
            raise DomainError(f"weight {name!r} is not even")
        mid = w(0.5 * (s[:-2] + s[2:]))
        if np.any(mid > 0.5 * (fs[:-2] + fs[2:]) + scale):
            raise DomainError(f"weight {name!r} fails the midpoint convexity test")
        if np.any(fs < float(w(0.0)) - scale):
            raise DomainError(f"weight {name!r} is not minimal at 0")
        return w


def haraux_phi(state, F: ConvexWeight) -> float:
    zx = gradient(state).values
    v = state.v.values
    return trapezoid(F(v + zx) + F(v - zx), state.grid.dx)


@dataclass(frozen=True)
class EnergySample:
    t: float
    h2: float
    hp: dict
    hinf: float
    phi: dict
    classical: float
    dp2: float | None = None


def energy_sample(state, ps=(2, 4, 8), phi_ps=(2, 4, 8), with_dp2=False) -> EnergySample:
    return EnergySample(
        t=state.t,
        h2=hp_norm(state, 2),
        hp={p: hp_norm(state, p) for p in ps},
        hinf=hp_norm(state, math.inf),
        phi={p: haraux_phi(state, ConvexWeight.power_p(p)) for p in phi_ps},
        classical=classical_energy(state),
        dp2=dp_norm(state, 2) if with_dp2 else None,
    )


def energy_row(state) -> tuple:
    """Values in the order of :data:`NORM_COLUMNS`."""
    e = energy_sample(state)
    return (e.t, e.h2, e.hp[4], e.hp[8], e.hinf, e.phi[2], e.phi[4], e.phi[8], e.classical)


@dataclass(frozen=True)
class MonotoneViolation:
    k: int
    t: float
    before: float
    after: float


def check_monotone(series, rel_slack: float = 0.0, abs_slack: float = 0.0) -> list:
    """Indices k where ``value[k+1] > value[k] (1 + rel_slack) + abs_slack``.

    ``series`` is a sequence of (t, value) pairs with increasing t.
    """
    pts = [(float(t), float(v)) for t, v in series]
    ts = [t for t, _ in pts]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise DomainError("series times must increase strictly")
    out = []
    for k in range(len(pts) - 1):
        (t0, v0), (_, v1) = pts[k], pts[k + 1]
        if v1 > v0 * (1 + rel_slack) + abs_slack:
            out.append(MonotoneViolation(k, t0, v0, v1))
    return out
