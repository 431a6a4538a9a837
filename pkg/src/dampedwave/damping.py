"""Scalar nonlinear damping functions and their sector bounds.

A damping function here is an odd, locally Lipschitz map ``sigma`` with
``sigma(s) * s > 0`` away from the origin and a positive slope ``c1`` at
zero.  The catalog below ships the usual saturation plus a handful of
representatives of wider families; :func:`validate_damping` probes the
defining properties on a grid and reports (never raises) what fails.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, EvaluationError, UnknownNameError

ZERO_TOL = 1e-12


@dataclass(frozen=True)
class DampingSpec:
    """A scalar damping nonlinearity together with the facts we know about it.

    ``sigma`` and ``sigma_prime`` must accept numpy arrays.  ``linear_bound_m``
    is the smallest known ``m`` with ``|sigma(s)| <= m |s|`` (``None`` if the
    function is not linearly bounded).
    """

    name: str
    sigma: Callable[[np.ndarray], np.ndarray]
    sigma_prime: Callable[[np.ndarray], np.ndarray]
    c1: float
    monotone: bool = False
    linear_bound_m: float | None = None
    params: dict = field(default_factory=dict)
    lipschitz_hint: Callable[[float], float] | None = None

    def __call__(self, s):
        return self.sigma(s)

    def lipschitz_on(self, radius: float) -> float:
        """Local Lipschitz constant of sigma on ``[-radius, radius]``.

        Uses the analytic hint when the catalog provides one, otherwise the
        largest difference quotient on a 4097-point grid (padded by 1%).
        """
        if radius <= 0:
            return abs(self.c1)
        if self.lipschitz_hint is not None:
            return float(self.lipschitz_hint(radius))
        s = np.linspace(-radius, radius, 4097)
        vals = np.asarray(self.sigma(s), dtype=float)
        quot = np.abs(np.diff(vals) / np.diff(s))
        return float(1.01 * max(quot.max(), abs(self.c1)))


@dataclass(frozen=True)
class SectorBounds:
    d0: float
    d1: float
    radius_R: float
    mode: str
    hypothesis_ok: bool = True
    grid_points: int = 0


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    violations: tuple = ()

    def failed_properties(self):
        return sorted({v[0] for v in self.violations})


def _checked(spec: DampingSpec, s):
    out = np.asarray(spec.sigma(s), dtype=float)
    if not np.all(np.isfinite(out)):
        raise EvaluationError(f"{spec.name}: non-finite sigma value")
    return out


def eval_quotient(spec: DampingSpec, s):
    """sigma(s)/s, with the slope ``c1`` assigned at s = 0.

    Works elementwise on arrays.  The value at zero is never computed as 0/0.
    """
    s_arr = np.asarray(s, dtype=float)
    sig = _checked(spec, s_arr)
    zero = s_arr == 0.0
    safe = np.where(zero, 1.0, s_arr)
    q = np.where(zero, spec.c1, sig / safe)
    if np.ndim(s) == 0:
        return float(q)
    return q


def validate_damping(spec: DampingSpec, radius: float, samples: int) -> ValidationReport:
    if radius <= 0:
        raise DomainError("radius must be positive")
    if samples < 3:
        raise DomainError("need at least 3 samples")
    violations = []
    s = np.linspace(-radius, radius, samples)
    sig = np.asarray(spec.sigma(s), dtype=float)

    bad = np.flatnonzero(~np.isfinite(sig))
    for i in bad:
        violations.append(("finite", float(s[i]), float(sig[i])))
    sig = np.where(np.isfinite(sig), sig, 0.0)

    s0 = float(spec.sigma(np.array([0.0]))[0])
    if abs(s0) > ZERO_TOL:
        violations.append(("zero_at_origin", 0.0, s0))

    sig_neg = np.asarray(spec.sigma(-s), dtype=float)
    odd_err = np.abs(sig + sig_neg)
    for i in np.flatnonzero(odd_err > ZERO_TOL):
        violations.append(("odd", float(s[i]), float(odd_err[i])))

    prod = sig * s
    for i in np.flatnonzero((prod <= 0.0) & (s != 0.0)):
        violations.append(("sign", float(s[i]), float(sig[i])))

    if not spec.c1 > 0:
        violations.append(("c1_positive", 0.0, float(spec.c1)))

    # slope at zero: central difference against the declared derivative
    eps = min(1e-6, radius / 10)
    fd = float((spec.sigma(np.array([eps]))[0] - spec.sigma(np.array([-eps]))[0]) / (2 * eps))
    dp0 = float(np.asarray(spec.sigma_prime(np.array([0.0])))[0])
    scale = max(1.0, abs(dp0))
    if abs(fd - dp0) > 1e-4 * scale:
        violations.append(("derivative_at_zero", 0.0, fd - dp0))
    if abs(dp0 - spec.c1) > 1e-9 * scale:
        violations.append(("c1_matches_derivative", 0.0, dp0 - spec.c1))

    if spec.monotone:
        drops = np.diff(sig)
        for i in np.flatnonzero(drops < -ZERO_TOL):
            violations.append(("monotone", float(s[i + 1]), float(drops[i])))

    if spec.linear_bound_m is not None:
        excess = np.abs(sig) - spec.linear_bound_m * np.abs(s)
        for i in np.flatnonzero(excess > ZERO_TOL * (1 + np.abs(s))):
            violations.append(("linear_bound", float(s[i]), float(excess[i])))

    return ValidationReport(passed=not violations, violations=tuple(violations))


def sector_bounds(
    spec: DampingSpec,
    radius_R: float,
    mode: str = "quotient",
    rel_tol: float = 1e-6,
    start_points: int = 2**12,
    max_points: int = 2**22,
) -> SectorBounds:
    """Extrema of sigma(xi)/xi (or sigma'(xi)) over ``[-2R, 2R]``.

    The grid is doubled until both extrema move by less than ``rel_tol``.
    In quotient mode the value ``c1`` at the origin always participates.
    """
    if radius_R <= 0:
        raise DomainError("radius_R must be positive")
    if mode not in ("quotient", "derivative"):
        raise DomainError(f"unknown sector mode {mode!r}")
    span = 2.0 * radius_R

    def values(xi):
        if mode == "quotient":
            return eval_quotient(spec, xi)
        return np.asarray(spec.sigma_prime(xi), dtype=float)

    def bounds_on(npts):
        xi = np.linspace(-span, span, npts + 1)
        vals = values(xi)
        return float(vals.min()), float(vals.max()), xi, vals

    npts = start_points
    lo, hi, xi, vals = bounds_on(npts)
    while npts < max_points:
        npts *= 2
        lo2, hi2, xi, vals = bounds_on(npts)
        stable = abs(lo2 - lo) <= rel_tol * max(abs(lo2), 1e-300) and abs(hi2 - hi) <= rel_tol * max(
            abs(hi2), 1e-300
        )
        lo, hi = min(lo, lo2), max(hi, hi2)
        if stable:
            break
    # polish: an extremum strictly between nodes is missed by every nested grid
    h = xi[1] - xi[0]
    for sign, k in ((1.0, int(np.argmin(vals))), (-1.0, int(np.argmax(vals)))):
        a, b = max(-span, xi[k] - h), min(span, xi[k] + h)
        res = minimize_scalar(lambda u: sign * float(values(np.array([u]))[0]), bounds=(a, b), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, span)})
        if np.isfinite(res.fun):
            if sign > 0:
                lo = min(lo, float(res.fun))
            else:
                hi = max(hi, -float(res.fun))
    if mode == "quotient":
        lo, hi = min(lo, spec.c1), max(hi, spec.c1)
    ok = True
    if mode == "quotient" and lo <= 0:
        ok = False
        warnings.warn(
            f"{spec.name}: sector lower bound d0={lo:.3g} <= 0 on [-{span}, {span}]",
            stacklevel=2,
        )
    return SectorBounds(d0=lo, d1=hi, radius_R=radius_R, mode=mode, hypothesis_ok=ok, grid_points=npts + 1)


# ---------------------------------------------------------------------------
# catalog


def sat(s):
    return np.clip(s, -1.0, 1.0)


def _sat_prime(s):
    return np.where(np.abs(s) <= 1.0, 1.0, 0.0)


def saturation() -> DampingSpec:
    return DampingSpec(
        name="saturation",
        sigma=sat,
        sigma_prime=_sat_prime,
        c1=1.0,
        monotone=True,
        linear_bound_m=1.0,
        lipschitz_hint=lambda r: 1.0,
    )


def saturation_composite(inner_slope: float = 0.25, wiggle: float = -1.0 / 30, freq: float = 10.0, name=None):
    """``sat(inner_slope*s + wiggle*sin(freq*s))``.

    With the defaults this is the nonmonotone example as it is usually
    written, whose slope at the origin is ``1/4 - 1/3 < 0``.  Flipping the
    sign of ``wiggle`` gives a valid nonmonotone damping.
    """

    def inner(s):
        return inner_slope * s + wiggle * np.sin(freq * s)

    def sigma(s):
        return sat(inner(s))

    def sigma_prime(s):
        g = inner_slope + wiggle * freq * np.cos(freq * s)
        return np.where(np.abs(inner(s)) <= 1.0, g, 0.0)

    c1 = inner_slope + wiggle * freq
    lip = abs(inner_slope) + abs(wiggle) * freq
    # |inner(s)| <= (|k| + |w| f)|s| and sat only shrinks
    return DampingSpec(
        name=name or "saturation_nonmonotone",
        sigma=sigma,
        sigma_prime=sigma_prime,
        c1=c1,
        monotone=False,
        linear_bound_m=lip,
        params={"inner_slope": inner_slope, "wiggle": wiggle, "freq": freq},
        lipschitz_hint=lambda r: lip,
    )


def linear(k: float = 1.0) -> DampingSpec:
    k = float(k)
    return DampingSpec(
        name="linear",
        sigma=lambda s: k * np.asarray(s, dtype=float),
        sigma_prime=lambda s: np.full(np.shape(s), k),
        c1=k,
        monotone=k >= 0,
        linear_bound_m=abs(k),
        params={"k": k},
        lipschitz_hint=lambda r: abs(k),
    )


def smooth_saturation(k: float = 1.0) -> DampingSpec:
    """tanh(k s)/k: a C-infinity saturation with unit slope at zero."""
    k = float(k)
    return DampingSpec(
        name="tanh",
        sigma=lambda s: np.tanh(k * np.asarray(s, dtype=float)) / k,
        sigma_prime=lambda s: 1.0 / np.cosh(k * np.asarray(s, dtype=float)) ** 2,
        c1=1.0,
        monotone=True,
        linear_bound_m=1.0,
        params={"k": k},
        lipschitz_hint=lambda r: 1.0,
    )


def power_growth(r: float = 2.0, k: float = 1.0) -> DampingSpec:
    """Odd antiderivative of ``k|s|^r``; slope bounds ``k|s|^r <= sigma'``.

    Its slope at zero is 0, so it is flagged by the ``c1_positive`` check.
    """
    r, k = float(r), float(k)
    return DampingSpec(
        name="power",
        sigma=lambda s: k * np.sign(s) * np.abs(s) ** (r + 1) / (r + 1),
        sigma_prime=lambda s: k * np.abs(np.asarray(s, dtype=float)) ** r,
        c1=0.0,
        monotone=True,
        linear_bound_m=None,
        params={"r": r, "k": k},
        lipschitz_hint=lambda rad: k * rad**r,
    )


def log_sublinear() -> DampingSpec:
    """s / log(2 + |s|): between |s|/log(2+|s|) and |s| for |s| >= 1."""

    def sigma(s):
        s = np.asarray(s, dtype=float)
        return s / np.log(2.0 + np.abs(s))

    def sigma_prime(s):
        a = np.abs(np.asarray(s, dtype=float))
        lg = np.log(2.0 + a)
        return 1.0 / lg - a / ((2.0 + a) * lg**2)

    c1 = 1.0 / math.log(2.0)
    return DampingSpec(
        name="log_sublinear",
        sigma=sigma,
        sigma_prime=sigma_prime,
        c1=c1,
        monotone=True,
        linear_bound_m=c1,
        lipschitz_hint=lambda r: c1,
    )


CATALOG = {
    "saturation": lambda **kw: saturation(**kw),
    "saturation_nonmonotone": lambda **kw: saturation_composite(**kw),
    "saturation_nonmonotone_valid": lambda **kw: saturation_composite(
        **{"wiggle": 1.0 / 30, "name": "saturation_nonmonotone_valid", **kw}
    ),
    "linear": lambda **kw: linear(**kw),
    "tanh": lambda **kw: smooth_saturation(**kw),
    "power": lambda **kw: power_growth(**kw),
    "log_sublinear": lambda **kw: log_sublinear(**kw),
}


def make_damping(name: str, **params) -> DampingSpec:
    try:
        factory = CATALOG[name]
    except KeyError:
        raise UnknownNameError("damping", name) from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise DomainError(f"bad parameters for damping {name!r}: {exc}") from None
