"""Uniform grid on [0, 1], periodic extensions, quadrature and L^p norms."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class Grid:
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("grid needs at least 2 cells")
        if (1.0 / self.n) * self.n != 1.0:
            raise DomainError(f"dx * n is not exactly 1 for n={self.n}")

    @property
    def dx(self) -> float:
        return 1.0 / self.n

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n + 1) / self.n

    def sample(self, f, dirichlet=True) -> "GridFn":
        vals = np.asarray(f(self.x), dtype=float) * np.ones(self.n + 1)
        if dirichlet:
            vals[0] = vals[-1] = 0.0
        return GridFn(self, vals, dirichlet)

    def zeros(self) -> "GridFn":
        return GridFn(self, np.zeros(self.n + 1), True)


class GridFn:
    """Node values of a function on a :class:`Grid`.

    The value array is copied and frozen.  A dirichlet-tagged function has
    exactly zero end values.
    """

    __slots__ = ("grid", "values", "dirichlet")

    def __init__(self, grid: Grid, values, dirichlet: bool = False):
        vals = np.array(values, dtype=float)
        if vals.shape != (grid.n + 1,):
            raise DomainError(f"expected {grid.n + 1} values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise DomainError("grid function has non-finite values")
        if dirichlet and (vals[0] != 0.0 or vals[-1] != 0.0):
            raise DomainError("dirichlet grid function must vanish at both ends")
        vals.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "dirichlet", bool(dirichlet))

    def __setattr__(self, name, value):
        raise AttributeError("GridFn is immutable")

    def __repr__(self):
        return f"GridFn(n={self.grid.n}, dirichlet={self.dirichlet})"

    def scaled(self, c: float) -> "GridFn":
        return GridFn(self.grid, c * self.values, self.dirichlet)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("x,value\n")
        for xv, fv in zip(self.grid.x, self.values):
            buf.write(f"{xv:.17g},{fv:.17g}\n")
        return buf.getvalue()


def _reduce(x):
    """Map x to (sign, r) with r in [0, 1] using the two reflections."""
    y = np.mod(np.asarray(x, dtype=float), 2.0)
    upper = y > 1.0
    r = np.where(upper, 2.0 - y, y)
    return np.where(upper, -1.0, 1.0), r


def _interp(f: GridFn, r):
    return np.interp(r, f.grid.x, f.values)


def extend_odd_periodic(f: GridFn, x):
    """Evaluate the 2-periodic extension of ``f`` that is odd about 0 and 1."""
    if not f.dirichlet:
        raise DomainError("odd extension needs a dirichlet grid function")
    sign, r = _reduce(x)
    out = sign * _interp(f, r)
    return float(out) if np.ndim(x) == 0 else out


def extend_even_periodic(f: GridFn, x):
    """Evaluate the 2-periodic extension of ``f`` that is even about 0 and 1."""
    _, r = _reduce(x)
    out = _interp(f, r)
    return float(out) if np.ndim(x) == 0 else out


def odd_extension_nodes(values: np.ndarray) -> np.ndarray:
    """Node values over one period: index j holds x = j*dx for j = 0..2n-1."""
    n = len(values) - 1
    return np.concatenate([values, -values[n - 1 : 0 : -1]])


def even_extension_nodes(values: np.ndarray) -> np.ndarray:
    n = len(values) - 1
    return np.concatenate([values, values[n - 1 : 0 : -1]])


def ddx(f: GridFn) -> GridFn:
    """Centered first difference; at the ends the odd reflection is used,
    which reduces to the one-sided quotient f[1]/dx (resp. -f[n-1]/dx)."""
    v = f.values
    h = f.grid.dx
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - v[:-2]) / (2 * h)
    if f.dirichlet:
        d[0] = v[1] / h
        d[-1] = -v[-2] / h
    else:
        d[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)
        d[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
    return GridFn(f.grid, d, False)


def d2dx2(f: GridFn) -> GridFn:
    """Three-point second difference (zero at the ends of a dirichlet function)."""
    v = f.values
    h = f.grid.dx
    d = np.zeros_like(v)
    d[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / h**2
    if not f.dirichlet:
        d[0] = d[1]
        d[-1] = d[-2]
    return GridFn(f.grid, d, False)


def trapezoid(values: np.ndarray, dx: float) -> float:
    return float(dx * (values.sum() - 0.5 * (values[0] + values[-1])))


def lp_norm(f: GridFn, p) -> float:
    """Composite-trapezoid L^p norm on [0, 1]; ``p = inf`` gives the max."""
    if p is None or not p >= 1:
        raise DomainError(f"L^p norm needs p >= 1, got {p}")
    a = np.abs(f.values)
    if math.isinf(p):
        return float(a.max())
    if p == 1:
        return trapezoid(a, f.grid.dx)
    m = a.max()
    if m == 0:
        return 0.0
    # scale out the max so |f|^p neither overflows nor underflows
    b = a / m
    if p == 2:
        return float(m * math.sqrt(trapezoid(b * b, f.grid.dx)))
    return float(m * trapezoid(b**p, f.grid.dx) ** (1.0 / p))


def holder_ratio(f: GridFn, p: float) -> float:
    """lp_norm(f, p) divided by ``||f||_2^(2/p) ||f||_inf^(1-2/p)``.

    Never exceeds 1 for p in (2, inf); returns 0 for the zero function.
    """
    if not 2 <= p < math.inf:
        raise DomainError("Holder ratio defined for 2 <= p < inf")
    lhs = lp_norm(f, p)
    rhs = lp_norm(f, 2) ** (2.0 / p) * lp_norm(f, math.inf) ** (1.0 - 2.0 / p)
    if rhs == 0:
        return 0.0
    return lhs / rhs
