"""Decay-rate fits and theorem-level consistency checks built on solver runs."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .characteristics import CharSolverConfig, Trajectory, solve
from .damping import DampingSpec, sector_bounds
from .energy import dp_norm, gradient, hp_norm
from .errors import DomainError, HypothesisError, SolverError
from .fdm import fdm_solve
from .grid import GridFn, d2dx2, ddx, lp_norm
from .profiles import DampingProfile

HOLDER_SLACK = 1e-8


@dataclass(frozen=True)
class DecayFit:
    K: float
    beta: float
    r_squared: float
    window: tuple

    def __call__(self, t):
        return self.K * np.exp(-self.beta * np.asarray(t))


def default_window(times) -> tuple:
    """Last 75% of the run."""
    t0, t1 = float(times[0]), float(times[-1])
    return (t0 + 0.25 * (t1 - t0), t1)


def _window_mask(t, window):
    lo, hi = window
    return (t >= lo - 1e-12) & (t <= hi + 1e-12)


def fit_decay(series, window=None) -> DecayFit:
    """Least-squares line through (t, log value) on the window."""
    t = np.array([a for a, _ in series], dtype=float)
    y = np.array([b for _, b in series], dtype=float)
    window = tuple(window) if window is not None else default_window(t)
    mask = _window_mask(t, window)
    if mask.sum() < 5:
        raise DomainError(f"need at least 5 samples in window {window}, got {int(mask.sum())}")
    tw, yw = t[mask], y[mask]
    if np.any(yw <= 0) or not np.all(np.isfinite(yw)):
        raise DomainError("decay fit needs positive finite values in the window")
    ly = np.log(yw)
    slope, intercept = np.polyfit(tw, ly, 1)
    resid = ly - (slope * tw + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - float(np.sum(resid**2)) / ss_tot)
    return DecayFit(K=float(math.exp(intercept)), beta=float(-slope), r_squared=r2, window=window)


def envelope_constant(series, beta: float) -> float:
    """Smallest K with ``value(t) <= K exp(-beta t) value(0)`` at every sample."""
    t = np.array([a for a, _ in series], dtype=float)
    y = np.array([b for _, b in series], dtype=float)
    if y[0] <= 0:
        raise DomainError("envelope constant needs a positive initial value")
    return float(np.max(y * np.exp(beta * t)) / y[0])


def predicted_rate(beta2: float, p: float, q: float | None = None) -> float:
    """Rate in H_p implied by an H_2 rate ``beta2``.

    Without q: ``2 beta2 / p`` (data bounded in H_inf).
    With q in [2, p): ``beta2 * 2 (p - q) / (q (p - 2))``.
    """
    if not beta2 > 0:
        raise DomainError("beta2 must be positive")
    if q is None:
        if not p >= 2:
            raise DomainError("need p >= 2")
        return 0.0 if math.isinf(p) else 2.0 * beta2 / p
    if not (p > 2 and 2 <= q < p) or math.isinf(p):
        raise DomainError("need finite p > 2 and 2 <= q < p")
    return beta2 * 2.0 * (p - q) / (q * (p - 2))


def riesz_thorin_prefactor(R: float, K: float, p: float) -> float:
    """``(2R)^((p-2)/p) K^(2/p)``: constant in front of the H_p envelope."""
    return (2.0 * R) ** ((p - 2.0) / p) * K ** (2.0 / p)


# ---------------------------------------------------------------------------


def norm_series(traj: Trajectory, p) -> list:
    return [(s.t, hp_norm(s, p)) for s in traj]


@dataclass
class InterpReport:
    p: float
    holder_violations: list
    max_holder_ratio: float
    beta2: float | None = None
    beta_p: float | None = None
    predicted: float | None = None
    fit2: DecayFit | None = None
    fitp: DecayFit | None = None

    @property
    def rate_ok(self) -> bool:
        if self.beta_p is None:
            return True
        return self.beta_p >= 0.9 * self.predicted

    @property
    def passed(self) -> bool:
        return not self.holder_violations and self.rate_ok


def holder_check(f: GridFn, p: float, slack: float = HOLDER_SLACK):
    """(ok, lhs, rhs) for ``|f|_p <= |f|_2^(2/p) |f|_inf^(1-2/p) (1 + slack)``."""
    lhs = lp_norm(f, p)
    rhs = lp_norm(f, 2) ** (2.0 / p) * lp_norm(f, math.inf) ** (1.0 - 2.0 / p)
    return lhs <= rhs * (1 + slack), lhs, rhs


def interp_consistency(traj: Trajectory, p: float, window=None, fit_rates: bool = True) -> InterpReport:
    """Hoelder check at every sample for z_x and z_t, and (optionally) the
    fitted H_p rate against the H_2-derived prediction ``2 beta2 / p``."""
    if not 2 < p < math.inf:
        raise DomainError("p must lie in (2, inf)")
    bad = []
    worst = 0.0
    for s in traj:
        for label, f in (("z_x", gradient(s)), ("z_t", s.v)):
            ok, lhs, rhs = holder_check(f, p)
            if rhs > 0:
                worst = max(worst, lhs / rhs)
            if not ok:
                bad.append((s.t, label, lhs, rhs))
    rep = InterpReport(p=p, holder_violations=bad, max_holder_ratio=worst)
    if fit_rates:
        f2 = fit_decay(norm_series(traj, 2), window)
        fp = fit_decay(norm_series(traj, p), window)
        rep.fit2, rep.fitp = f2, fp
        rep.beta2, rep.beta_p = f2.beta, fp.beta
        rep.predicted = predicted_rate(f2.beta, p) if f2.beta > 0 else 0.0
    return rep


# ---------------------------------------------------------------------------


@dataclass
class Scenario:
    """Everything needed for one damped-wave run."""

    z0: GridFn
    z1: GridFn
    damping: DampingSpec
    profile: DampingProfile
    t_end: float
    sample_dt: float
    solver: str = "characteristics"
    config: CharSolverConfig = field(default_factory=CharSolverConfig)
    fit_window: tuple | None = None

    def run(self) -> Trajectory:
        if self.solver == "characteristics":
            return solve(self.z0, self.z1, self.damping, self.profile, self.t_end, self.sample_dt, self.config)
        if self.solver == "fdm":
            return fdm_solve(self.z0, self.z1, self.damping, self.profile, self.t_end, self.sample_dt)
        raise DomainError(f"unknown solver {self.solver!r}")

    def hinf0(self) -> float:
        from .characteristics import WaveState

        return hp_norm(WaveState(0.0, self.z0, self.z1), math.inf)

    def scaled_to(self, R: float) -> "Scenario":
        """Copy with the initial data scaled to H_inf norm R."""
        h = self.hinf0()
        if h == 0:
            raise DomainError("cannot scale zero initial data")
        c = R / h
        return replace(self, z0=self.z0.scaled(c), z1=self.z1.scaled(c))


@dataclass(frozen=True)
class SweepRow:
    R: float
    K: float
    beta: float
    d0: float
    d1: float
    r2: float


def semi_global_sweep(scenario: Scenario, R_list) -> list:
    R_list = [float(r) for r in R_list]
    if not R_list or any(r <= 0 for r in R_list) or any(b <= a for a, b in zip(R_list, R_list[1:])):
        raise DomainError("R_list must be positive and strictly increasing")
    rows = []
    for R in R_list:
        sb = sector_bounds(scenario.damping, R, "quotient")
        sc = scenario.scaled_to(R)
        try:
            traj = sc.run()
        except SolverError as exc:
            raise SolverError(f"R={R:g}: {exc}", window=exc.window, time=exc.time, last_increment=exc.last_increment) from exc
        fit = fit_decay(norm_series(traj, 2), scenario.fit_window)
        rows.append(SweepRow(R=R, K=fit.K, beta=fit.beta, d0=sb.d0, d1=sb.d1, r2=fit.r_squared))
    return rows


def sweep_to_csv(rows) -> str:
    buf = io.StringIO()
    buf.write("R,d0,d1,K,beta,r2\n")
    for r in rows:
        buf.write(f"{r.R:.17g},{r.d0:.17g},{r.d1:.17g},{r.K:.17g},{r.beta:.17g},{r.r2:.17g}\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------


@dataclass
class InftyReport:
    times: np.ndarray
    hinf: np.ndarray
    u_series: np.ndarray
    w_series: np.ndarray
    h2: np.ndarray
    envelope: np.ndarray
    K1: float = 0.0
    beta1: float = 0.0
    K2: float = 0.0
    beta2: float = 0.0
    constant: float = 0.0
    hinf_fit: DecayFit | None = None
    slack: float = 0.1
    notes: list = field(default_factory=list)

    @property
    def violations(self) -> list:
        bad = self.hinf > self.envelope * (1 + self.slack) + 1e-300
        return [(float(t), float(h), float(e)) for t, h, e, b in zip(self.times, self.hinf, self.envelope, bad) if b]

    @property
    def envelope_ok(self) -> bool:
        return not self.violations

    @property
    def hinf_rate(self) -> float:
        return self.hinf_fit.beta if self.hinf_fit is not None else 0.0


def _boundary_flat(f: GridFn, tol_rel: float) -> bool:
    d = ddx(f).values
    scale = float(np.abs(d).max())
    if scale == 0:
        return True
    return max(abs(d[0]), abs(d[-1])) <= tol_rel * scale


def u_norm(state, damping, profile) -> float:
    """``|u_x|_2 + |u_t|_2`` for u = z_t, with ``u_t = z_xx - a sigma(z_t)``."""
    ut = d2dx2(state.z).values - profile.a.values * np.asarray(damping.sigma(state.v.values), dtype=float)
    return lp_norm(ddx(state.v), 2) + lp_norm(GridFn(state.grid, ut), 2)


def thm_infty_scenario(
    z0: GridFn,
    z1: GridFn,
    damping: DampingSpec,
    profile: DampingProfile,
    t_end: float,
    sample_dt: float = 0.125,
    window=None,
    slack: float = 0.1,
    flat_tol: float | None = None,
    config: CharSolverConfig | None = None,
) -> InftyReport:
    """Run the base system and check the H_inf envelope
    ``(2 K1 + K2 m a1 / (beta2 - beta1)) exp(-beta1 t) |(z0, z1)|_D2``.

    (K1, beta1) come from the u = z_t series, (K2, beta2) from the H_2 series;
    each K is the smallest constant making ``K exp(-beta t)`` an envelope with
    the regression beta.  beta1 is capped at beta2/2 so that beta1 < beta2.
    """
    problems = []
    if not damping.monotone:
        problems.append(f"damping {damping.name!r} is not monotone")
    if damping.linear_bound_m is None:
        problems.append(f"damping {damping.name!r} has no linear bound m")
    if profile.a1 is None:
        problems.append("profile has no derivative bound a1")
    tol = flat_tol if flat_tol is not None else 10.0 * z0.grid.dx
    if not (_boundary_flat(z0, tol) and _boundary_flat(z1, tol)):
        problems.append("initial data derivatives do not vanish at x = 0 and x = 1")
    if problems:
        raise HypothesisError("; ".join(problems))

    traj = solve(z0, z1, damping, profile, t_end, sample_dt, config)
    t = traj.times
    hinf = np.array([hp_norm(s, math.inf) for s in traj])
    h2 = np.array([hp_norm(s, 2) for s in traj])
    us = np.array([u_norm(s, damping, profile) for s in traj])
    ws = np.array([dp_norm(s, 2) for s in traj])
    D2 = ws[0]
    rep = InftyReport(times=t, hinf=hinf, u_series=us, w_series=ws, h2=h2, envelope=np.zeros_like(t), slack=slack)
    if D2 == 0 and hinf.max() == 0:
        rep.notes.append("zero data: all series vanish")
        return rep

    f1 = fit_decay(list(zip(t, us)), window)
    f2 = fit_decay(list(zip(t, h2)), window)
    rep.beta2 = f2.beta
    rep.beta1 = min(f1.beta, 0.5 * f2.beta)
    if rep.beta1 < f1.beta:
        rep.notes.append(f"beta1 lowered from {f1.beta:.6g} to {rep.beta1:.6g}")
    rep.K1 = envelope_constant(list(zip(t, us)), rep.beta1)
    rep.K2 = envelope_constant(list(zip(t, h2)), rep.beta2)
    rep.constant = 2 * rep.K1 + rep.K2 * damping.linear_bound_m * profile.a1 / (rep.beta2 - rep.beta1)
    rep.envelope = rep.constant * np.exp(-rep.beta1 * t) * D2
    rep.hinf_fit = fit_decay(list(zip(t, hinf)), window)
    return rep
