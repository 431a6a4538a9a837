"""D'Alembert solver with a Picard fixed point on the velocity.

The damped equation ``z_tt = z_xx - a(x) sigma(z_t)`` on [0, 1] with
Dirichlet ends is solved through odd, 2-periodic extensions of the data and
the source ``h = -a sigma(z_t)``.  The time step equals the grid spacing,
so every characteristic foot lands on a node.

Velocity.  On the extended grid the invariant ``p = z_t + z_x`` satisfies
``(d/dt - d/dx) p = h``; the companion ``q = z_t - z_x`` is ``-p(-x)``, so
one periodic array carries both and ``z_t(x) = (p(x) - p(-x)) / 2``.
Inside a window of length T the velocity is the fixed point of the map

    y -> 1/2 [p0(x+t) - p0(t-x)]
         - 1/2 int_0^t [a~(x+t-s) sigma(y(s, x+t-s)) + a~(x-t+s) sigma(y(s, x-t+s))] ds

with the time integral done by the trapezoid rule, iterated by Picard.

Displacement.  The homogeneous part comes straight from the t = 0 data;
the source part obeys the diamond identity
``S(t+h,x) + S(t-h,x) - S(t,x+h) - S(t,x-h) = 1/2 int_diamond h``,
integrated by the trapezoid rule in characteristic coordinates.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .damping import DampingSpec
from .errors import DomainError, SolverError
from .grid import (
    GridFn,
    ddx,
    even_extension_nodes,
    extend_even_periodic,
    extend_odd_periodic,
    odd_extension_nodes,
)
from .profiles import DampingProfile


@dataclass(frozen=True)
class WaveState:
    t: float
    z: GridFn
    v: GridFn
    zx: GridFn | None = None

    def __post_init__(self):
        if self.z.grid != self.v.grid:
            raise DomainError("z and v must share a grid")
        if self.zx is not None and self.zx.grid != self.z.grid:
            raise DomainError("zx must share the grid of z")
        if not self.z.dirichlet:
            raise DomainError("z must satisfy Dirichlet conditions")

    @property
    def grid(self):
        return self.z.grid


@dataclass(frozen=True)
class CharSolverConfig:
    grid_n: int | None = None
    window_T: float | None = None
    picard_tol: float = 1e-12
    picard_max_iter: int = 200
    ball_margin: float = 0.1
    max_window: float = 1.0
    pairing: str = "symmetric"

    def __post_init__(self):
        if not self.picard_tol > 0:
            raise DomainError("picard_tol must be positive")
        if self.picard_max_iter < 1:
            raise DomainError("picard_max_iter must be at least 1")
        if self.pairing not in ("symmetric", "displayed"):
            raise DomainError(f"unknown pairing {self.pairing!r}")


@dataclass(frozen=True)
class WindowStats:
    index: int
    t_start: float
    steps: int
    T: float
    K: float
    contraction_bound: float
    iterations: int
    increments: tuple
    max_ratio: float
    max_ball_distance: float

    @property
    def in_ball(self) -> bool:
        return self.max_ball_distance <= self.K


@dataclass
class Trajectory:
    states: list
    sample_dt: float
    solver: str = "characteristics"
    windows: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        t = self.times
        if len(t) > 1 and np.any(np.diff(t) <= 0):
            raise DomainError("trajectory times must increase strictly")

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    @property
    def grid(self):
        return self.states[0].grid

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __getitem__(self, k):
        return self.states[k]

    def z_array(self) -> np.ndarray:
        return np.array([s.z.values for s in self.states])

    def v_array(self) -> np.ndarray:
        return np.array([s.v.values for s in self.states])

    def to_csv(self, mode: str = "nodes") -> str:
        """``nodes``: t then z at every node; ``norms``: t then the energy columns."""
        buf = io.StringIO()
        if mode == "nodes":
            n = self.grid.n
            buf.write("t," + ",".join(f"z{j}" for j in range(n + 1)) + "\n")
            for s in self.states:
                buf.write(f"{s.t:.17g}," + ",".join(f"{v:.17g}" for v in s.z.values) + "\n")
        elif mode == "norms":
            from .energy import NORM_COLUMNS, energy_row

            buf.write(",".join(NORM_COLUMNS) + "\n")
            for s in self.states:
                buf.write(",".join(f"{v:.17g}" for v in energy_row(s)) + "\n")
        else:
            raise DomainError(f"unknown CSV mode {mode!r}")
        return buf.getvalue()


# ---------------------------------------------------------------------------
# homogeneous D'Alembert evaluation at arbitrary times


def _primitive_table(ext: np.ndarray, h: float) -> np.ndarray:
    """Cumulative integral of the piecewise-linear periodic interpolant,
    at nodes 0..2n (last entry closes the period)."""
    nxt = np.roll(ext, -1)
    return np.concatenate([[0.0], np.cumsum(0.5 * h * (ext + nxt))])


def _primitive_eval(ext: np.ndarray, table: np.ndarray, h: float, x):
    period = len(ext)
    y = np.mod(np.asarray(x, dtype=float), 2.0)
    k = np.minimum(np.floor(y / h).astype(int), period - 1)
    s = y - k * h
    f0 = ext[k]
    f1 = ext[(k + 1) % period]
    return table[k] + s * f0 + 0.5 * s * s * (f1 - f0) / h


def dalembert_homogeneous(z0: GridFn, z1: GridFn, t: float) -> WaveState:
    """Undamped state at time t from data (z0, z1) via the reflected D'Alembert formula."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    if z0.grid != z1.grid:
        raise DomainError("z0 and z1 must share a grid")
    if not (z0.dirichlet and z1.dirichlet):
        raise DomainError("initial data must be dirichlet")
    grid = z0.grid
    h = grid.dx
    x = grid.x
    ext1 = odd_extension_nodes(z1.values)
    table = _primitive_table(ext1, h)
    z = 0.5 * (extend_odd_periodic(z0, x + t) + extend_odd_periodic(z0, x - t))
    z += 0.5 * (_primitive_eval(ext1, table, h, x + t) - _primitive_eval(ext1, table, h, x - t))
    dz0 = ddx(z0)
    v = 0.5 * (extend_even_periodic(dz0, x + t) - extend_even_periodic(dz0, x - t))
    v += 0.5 * (extend_odd_periodic(z1, x + t) + extend_odd_periodic(z1, x - t))
    z[0] = z[-1] = 0.0
    v[0] = v[-1] = 0.0
    return WaveState(float(t), GridFn(grid, z, True), GridFn(grid, v, True))


# ---------------------------------------------------------------------------
# the velocity map on one window


def _sigma_ext(damping: DampingSpec, y: np.ndarray) -> np.ndarray:
    """sigma of the odd extension, built from node values so oddness is exact."""
    s = np.asarray(damping.sigma(y), dtype=float)
    if not np.all(np.isfinite(s)):
        raise SolverError("damping returned a non-finite value")
    n = y.shape[-1] - 1
    return np.concatenate([s, -s[..., n - 1 : 0 : -1]], axis=-1)


class _Transport:
    """Index tables for moving the invariant p along characteristics."""

    def __init__(self, n: int, m: int):
        N2 = 2 * n
        lev = np.arange(m + 1)[:, None]
        col = np.arange(N2)[None, :]
        self.skew = (col - lev) % N2
        self.unskew = (col[:, : n + 1] + lev) % N2
        self.unskew_neg = (lev - col[:, : n + 1]) % N2
        self.m = m


def _phi_fast(P0, y, damping, a_ext, h, tr: _Transport):
    """One application of the window map; returns (new velocity, invariant at every level)."""
    G = -a_ext * _sigma_ext(damping, y)
    Gs = np.take_along_axis(G, tr.skew, axis=1)
    CS = np.cumsum(Gs, axis=0)
    Q = P0[None, :] + 0.5 * h * (2.0 * CS - Gs[0][None, :] - Gs)
    Pj = np.take_along_axis(Q, tr.unskew, axis=1)
    Pneg = np.take_along_axis(Q, tr.unskew_neg, axis=1)
    y_new = 0.5 * (Pj - Pneg)
    # invariant at every level over the whole period, for the next window
    full = (np.arange(Q.shape[1])[None, :] + np.arange(Q.shape[0])[:, None]) % Q.shape[1]
    P_levels = np.take_along_axis(Q, full, axis=1)
    return y_new, P_levels


def phi_direct(P0, y, damping, a_ext, h, pairing="symmetric"):
    """The window map evaluated literally, level by level (O(m^2 n)).

    ``pairing='symmetric'`` pairs each a~ with sigma(y) at the same
    characteristic foot.  ``pairing='displayed'`` uses
    ``a~(x+t-s) sigma(y(s, x-(t-s))) + a~(-x+t-s) sigma(y(s, -x-(t-s)))``.
    """
    m = y.shape[0] - 1
    n = y.shape[1] - 1
    N2 = 2 * n
    sig = _sigma_ext(damping, y)
    j = np.arange(n + 1)[None, :]
    out = np.empty_like(y)
    for lvl in range(m + 1):
        i = np.arange(lvl + 1)[:, None]
        w = np.full((lvl + 1, 1), h)
        w[0] = w[-1] = 0.5 * h
        if lvl == 0:
            w[:] = 0.0
        hom = 0.5 * (P0[(j + lvl) % N2] - P0[(lvl - j) % N2])
        tau = lvl - i
        rows = np.broadcast_to(i, (lvl + 1, n + 1))
        if pairing == "symmetric":
            A1 = a_ext[(j + tau) % N2] * sig[rows, (j + tau) % N2]
            A2 = a_ext[(j - tau) % N2] * sig[rows, (j - tau) % N2]
        elif pairing == "displayed":
            A1 = a_ext[(j + tau) % N2] * sig[rows, (j - tau) % N2]
            A2 = a_ext[(-j + tau) % N2] * sig[rows, (-j - tau) % N2]
        else:
            raise DomainError(f"unknown pairing {pairing!r}")
        out[lvl] = hom[0] - 0.5 * np.sum(w * (A1 + A2), axis=0)
    out[:, 0] = 0.0
    out[:, -1] = 0.0
    return out


def initial_invariant(z0: GridFn, z1: GridFn) -> np.ndarray:
    """p = z_t + z_x on the extended grid (index j <-> x = j dx mod 2)."""
    return odd_extension_nodes(z1.values) + even_extension_nodes(ddx(z0).values)


# ---------------------------------------------------------------------------


def _steps_for(duration: float, h: float, what: str) -> int:
    k = duration / h
    kr = int(round(k))
    if kr < 1:
        raise DomainError(f"{what} shorter than one time step")
    return kr


def solve(
    z0: GridFn,
    z1: GridFn,
    damping: DampingSpec,
    profile: DampingProfile,
    t_end: float,
    sample_dt: float,
    config: CharSolverConfig | None = None,
) -> Trajectory:
    """Integrate the damped wave equation; states are sampled every ``sample_dt``.

    ``sample_dt`` and ``t_end`` are rounded to whole multiples of dt = dx.
    Raises :class:`SolverError` if a Picard window fails to contract.
    """
    config = config or CharSolverConfig()
    if not t_end > 0:
        raise DomainError("t_end must be positive")
    if z0.grid != z1.grid or z0.grid != profile.grid:
        raise DomainError("initial data and profile must share a grid")
    if not (z0.dirichlet and z1.dirichlet):
        raise DomainError("initial data must be dirichlet")
    grid = z0.grid
    if config.grid_n is not None and config.grid_n != grid.n:
        raise DomainError(f"config grid_n={config.grid_n} but data has n={grid.n}")
    n, h = grid.n, grid.dx
    N2 = 2 * n
    total = _steps_for(t_end, h, "t_end")
    every = _steps_for(sample_dt, h, "sample_dt")
    warn = []
    if abs(every * h - sample_dt) > 1e-9 * sample_dt:
        warn.append(f"sample_dt {sample_dt} rounded to {every * h!r}")

    a_ext = even_extension_nodes(profile.a.values)
    Z0e = odd_extension_nodes(z0.values)
    Z1e = odd_extension_nodes(z1.values)
    C1 = _primitive_table(Z1e, h)[:N2]
    jj = np.arange(n + 1)

    def z_hom(k):
        ip = (jj + k) % N2
        im = (jj - k) % N2
        return 0.5 * (Z0e[ip] + Z0e[im]) + 0.5 * (C1[ip] - C1[im])

    P = initial_invariant(z0, z1)
    y_start = z1.values.copy()
    max_m = config.window_T if config.window_T is not None else config.max_window
    m_cap = max(1, int(math.floor(max_m / h + 1e-9)))

    states = [WaveState(0.0, z0, z1)]
    windows = []
    S_prev = S_cur = np.zeros(N2)
    G_prev = None
    k0 = 0
    tables = {}
    widx = 0
    while k0 < total:
        m = min(m_cap, total - k0)
        y0_sup = float(np.abs(y_start).max())
        # shrink the window until a_inf * Lip(sigma) * T <= 1/2
        while True:
            tr = tables.get(m) or tables.setdefault(m, _Transport(n, m))
            guess = np.tile(y_start, (m + 1, 1))
            y1, P_lv = _phi(config, P, guess, damping, a_ext, h, tr, z_hom, k0)
            K = 2.0 * (float(np.abs(y1).max()) + y0_sup) * (1.0 + config.ball_margin)
            c_hat = profile.a_inf * damping.lipschitz_on(y0_sup + K)
            m_ok = m if c_hat == 0 else max(1, int(math.floor(1.0 / (2.0 * c_hat * h) + 1e-9)))
            if m_ok >= m:
                break
            m = m_ok
        increments = [float(np.abs(y1 - guess).max())]
        ratios = []
        ball = increments[0]
        y_cur, grows = y1, 0
        floor = 1e-13 * max(1.0, y0_sup)
        while increments[-1] > config.picard_tol:
            if len(increments) >= config.picard_max_iter:
                raise SolverError(
                    f"Picard iteration cap reached in window {widx} (t={k0 * h:.6g}), "
                    f"last increment {increments[-1]:.3e}",
                    window=widx,
                    time=k0 * h,
                    last_increment=increments[-1],
                )
            y_next, P_lv = _phi(config, P, y_cur, damping, a_ext, h, tr, z_hom, k0)
            inc = float(np.abs(y_next - y_cur).max())
            if increments[-1] > floor:
                ratios.append(inc / increments[-1])
            grows = grows + 1 if inc > increments[-1] else 0
            increments.append(inc)
            ball = max(ball, float(np.abs(y_next - guess).max()))
            y_cur = y_next
            if grows >= 3:
                raise SolverError(
                    f"Picard map is not contracting in window {widx} (t={k0 * h:.6g})",
                    window=widx,
                    time=k0 * h,
                    last_increment=inc,
                )
        windows.append(
            WindowStats(
                index=widx,
                t_start=k0 * h,
                steps=m,
                T=m * h,
                K=K,
                contraction_bound=c_hat * m * h,
                iterations=len(increments),
                increments=tuple(increments),
                max_ratio=max(ratios) if ratios else 0.0,
                max_ball_distance=ball,
            )
        )
        y_win = y_cur
        y_win[:, 0] = 0.0
        y_win[:, -1] = 0.0
        G = -a_ext * _sigma_ext(damping, y_win)
        if G_prev is None:
            G_prev = G[0]  # unused on the very first step
        for lvl in range(1, m + 1):
            k = k0 + lvl
            if k == 1:
                S_new = (h * h / 6.0) * (np.roll(G[0], 1) + np.roll(G[0], -1) + G[1])
            else:
                S_new = (
                    np.roll(S_cur, -1)
                    + np.roll(S_cur, 1)
                    - S_prev
                    + 0.25 * h * h * (G[lvl] + G_prev + np.roll(G[lvl - 1], -1) + np.roll(G[lvl - 1], 1))
                )
            S_prev, S_cur = S_cur, S_new
            G_prev = G[lvl - 1]
            if k % every == 0:
                z = z_hom(k) + S_cur[: n + 1]
                z[0] = z[-1] = 0.0
                if not np.all(np.isfinite(z)):
                    raise SolverError(f"non-finite state at t={k * h:.6g}", window=widx, time=k * h)
                zx = None
                if P_lv is not None:
                    zx = GridFn(grid, 0.5 * (P_lv[lvl][: n + 1] + P_lv[lvl][(-jj) % N2]))
                states.append(WaveState(k * h, GridFn(grid, z, True), GridFn(grid, y_win[lvl], True), zx))
        G_prev = G[m - 1]
        if config.pairing == "symmetric":
            P = P_lv[m]
        else:
            zk = z_hom(k0 + m) + S_cur[: n + 1]
            zk[0] = zk[-1] = 0.0
            P = initial_invariant(GridFn(grid, zk, True), GridFn(grid, y_win[m], True))
        y_start = y_win[m].copy()
        k0 += m
        widx += 1

    return Trajectory(states=states, sample_dt=every * h, solver="characteristics", windows=windows, warnings=warn)


def _phi(config, P, y, damping, a_ext, h, tr, z_hom, k0):
    if config.pairing == "symmetric":
        return _phi_fast(P, y, damping, a_ext, h, tr)
    return phi_direct(P, y, damping, a_ext, h, "displayed"), None
