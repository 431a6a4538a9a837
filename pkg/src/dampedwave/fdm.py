"""Leapfrog finite differences at unit CFL: an independent oracle for the
characteristics solver.

The damping is explicit.  It is evaluated at the centered velocity
``(z* - z^{k-1}) / 2dt`` where ``z*`` is the undamped leapfrog update; the
plain backward difference ``(z^k - z^{k-1}) / dt`` makes the near-sawtooth
modes grow at unit CFL (root modulus about ``1 + sqrt(2 a dt)``).
"""

from __future__ import annotations

import numpy as np

from .characteristics import Trajectory, WaveState, _steps_for
from .damping import DampingSpec
from .errors import DomainError, SolverError

_BLOWUP = 1e8
from .grid import GridFn, d2dx2
from .profiles import DampingProfile


def _damp(damping, a, v):
    s = np.asarray(damping.sigma(v), dtype=float)
    return a * s


def _levels(z0, z1, damping, profile, total, velocity="predicted"):
    """Yield (k, z^{k-1}, z^k, z^{k+1}) for k = 1..total.

    ``velocity='backward'`` selects the unstable textbook variant; it is kept
    only so tests can demonstrate the growth.
    """
    grid = z0.grid
    dt = grid.dx
    a = profile.a.values
    z_prev = z0.values.copy()
    z_cur = z0.values + dt * z1.values + 0.5 * dt * dt * (d2dx2(z0).values - _damp(damping, a, z1.values))
    z_cur[0] = z_cur[-1] = 0.0
    # energy is non-increasing, so growth by this factor means instability
    cap = _BLOWUP * max(1.0, np.abs(z0.values).max() + np.abs(z1.values).max())
    for k in range(1, total + 1):
        z_next = np.empty_like(z_cur)
        z_next[1:-1] = z_cur[2:] + z_cur[:-2] - z_prev[1:-1]
        if velocity == "predicted":
            vel = (z_next[1:-1] - z_prev[1:-1]) / (2 * dt)
        else:
            vel = (z_cur[1:-1] - z_prev[1:-1]) / dt
        z_next[1:-1] -= dt * dt * _damp(damping, a[1:-1], vel)
        z_next[0] = z_next[-1] = 0.0
        if not np.all(np.isfinite(z_next)) or np.abs(z_next).max() > cap:
            raise SolverError(f"leapfrog blow-up at t={k * dt:.6g}", time=k * dt)
        yield k, z_prev, z_cur, z_next
        z_prev, z_cur = z_cur, z_next


def fdm_solve(
    z0: GridFn,
    z1: GridFn,
    damping: DampingSpec,
    profile: DampingProfile,
    t_end: float,
    sample_dt: float,
    velocity: str = "predicted",
) -> Trajectory:
    """Sampled leapfrog trajectory; reported velocities are centered differences."""
    if velocity not in ("predicted", "backward"):
        raise DomainError(f"unknown damping velocity {velocity!r}")
    if not t_end > 0:
        raise DomainError("t_end must be positive")
    if z0.grid != z1.grid or z0.grid != profile.grid:
        raise DomainError("initial data and profile must share a grid")
    grid = z0.grid
    dt = grid.dx
    total = _steps_for(t_end, dt, "t_end")
    every = _steps_for(sample_dt, dt, "sample_dt")
    states = [WaveState(0.0, z0, z1)]
    for k, z_prev, z_cur, z_next in _levels(z0, z1, damping, profile, total, velocity):
        if k % every == 0:
            v = (z_next - z_prev) / (2 * dt)
            v[0] = v[-1] = 0.0
            states.append(WaveState(k * dt, GridFn(grid, z_cur, True), GridFn(grid, v, True)))
    return Trajectory(states=states, sample_dt=every * dt, solver="fdm")


def staggered_energy(z_prev: np.ndarray, z_next: np.ndarray, dx: float) -> float:
    """Leapfrog energy between two time levels; exactly conserved at unit CFL
    without damping."""
    vel = (z_next - z_prev) / dx
    gx_prev = np.diff(z_prev) / dx
    gx_next = np.diff(z_next) / dx
    return float(0.5 * dx * np.sum(vel * vel) + 0.5 * dx * np.sum(gx_prev * gx_next))


def fdm_energy_series(z0, z1, damping, profile, t_end):
    """Staggered energy between consecutive levels, one value per step."""
    total = _steps_for(t_end, z0.grid.dx, "t_end")
    return np.array(
        [staggered_energy(zp, zc, z0.grid.dx) for _, zp, zc, _ in _levels(z0, z1, damping, profile, total)]
    )
