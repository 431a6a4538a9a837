"""Lyapunov certificates for dv/dt = (A - d(t) B B^T) v with d0 <= d(t) <= d1.

The certificate is ``V(v) = <P v, v> + M |v|^2`` where P solves
``P A_d0 + A_d0^T P = -C I`` for ``A_d0 = A - d0 B B^T`` and
``M >= 2 (d1 - d0)^2 |B^T P|^2 / (C d0)``.  Along any admissible d(t),
``dV/dt <= -(C/2) |v|^2``, which gives the envelope

    |v(t)|^2 <= (|P| + M)/M * exp(-C t / (2 (|P| + M))) * |v0|^2.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import DomainError, HypothesisError, NoSolutionError, SolverError
from .profiles import DampingProfile

SKEW_TOL = 1e-10
KRON_MAX_DIM = 80


class PiecewiseConstant:
    """Right-continuous step function: ``values[i]`` on ``[times[i], times[i+1])``."""

    def __init__(self, times, values):
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.times.shape != self.values.shape or self.times.size == 0:
            raise DomainError("need one value per switching time")
        if np.any(np.diff(self.times) <= 0):
            raise DomainError("switching times must increase")

    def __call__(self, t):
        i = np.searchsorted(self.times, t, side="right") - 1
        return self.values[np.clip(i, 0, self.values.size - 1)]

    def __repr__(self):
        return f"PiecewiseConstant({self.times.size} pieces)"


def random_piecewise_d(rng, d0, d1, t_end, hold, grid_dt=None) -> PiecewiseConstant:
    """Values uniform in [d0, d1], held for ``hold`` time units each.

    With ``grid_dt`` the switching times are snapped to multiples of it, so a
    time stepper with that step never straddles a jump.
    """
    if hold <= 0:
        raise DomainError("hold must be positive")
    times = np.arange(0.0, t_end + hold, hold)
    if grid_dt is not None:
        times = np.unique(np.round(times / grid_dt) * grid_dt)
    values = rng.uniform(d0, d1, size=times.size)
    return PiecewiseConstant(times, values)


@dataclass
class LTVSystem:
    A: np.ndarray
    B: np.ndarray
    d: Callable
    d0: float
    d1: float

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.B = np.asarray(self.B, dtype=float).reshape(self.A.shape[0], -1)
        if self.A.shape[0] != self.A.shape[1]:
            raise DomainError("A must be square")
        if not self.d0 <= self.d1:
            raise DomainError("need d0 <= d1")

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def BBt(self) -> np.ndarray:
        return self.B @ self.B.T

    def A_d(self, d: float) -> np.ndarray:
        return self.A - d * self.BBt

    def dissipativity(self) -> float:
        """Largest eigenvalue of the symmetric part of A (should be <= 0)."""
        return float(np.linalg.eigvalsh(0.5 * (self.A + self.A.T)).max())

    def spectral_abscissa(self, d=None) -> float:
        return float(np.linalg.eigvals(self.A_d(self.d0 if d is None else d)).real.max())

    def hypothesis_report(self, probe_times=None) -> list:
        """Human-readable list of failed hypotheses (empty when all hold)."""
        out = []
        if self.d0 <= 0:
            out.append(f"d0 = {self.d0} is not positive")
        diss = self.dissipativity()
        if diss > SKEW_TOL:
            out.append(f"A is not dissipative: max eig of (A + A^T)/2 = {diss:.3e}")
        if probe_times is None:
            probe_times = getattr(self.d, "times", np.linspace(0.0, 10.0, 1001))
        dv = np.array([float(self.d(t)) for t in probe_times])
        lo, hi = dv < self.d0 - 1e-12, dv > self.d1 + 1e-12
        if lo.any():
            k = int(np.flatnonzero(lo)[0])
            out.append(f"d(t) = {dv[k]:.6g} < d0 at t = {probe_times[k]:.6g}")
        if hi.any():
            k = int(np.flatnonzero(hi)[0])
            out.append(f"d(t) = {dv[k]:.6g} > d1 at t = {probe_times[k]:.6g}")
        if self.d0 > 0:
            ab = self.spectral_abscissa()
            if not ab < 0:
                out.append(f"A - d0 B B^T is not Hurwitz (spectral abscissa {ab:.3e})")
        return out

    def validate(self, probe_times=None) -> None:
        problems = self.hypothesis_report(probe_times)
        if problems:
            raise HypothesisError("; ".join(problems))


def solve_lyapunov(A_d0, C: float = 1.0, method: str = "auto") -> np.ndarray:
    """Symmetric P with ``P A_d0 + A_d0^T P = -C I``.

    ``method='kron'`` solves the vectorized system
    ``(I (x) A^T + A^T (x) I) vec P = -C vec I`` directly;
    ``'schur'`` uses the Bartels-Stewart routine from scipy;
    ``'auto'`` picks kron up to dimension 80.
    """
    A = np.atleast_2d(np.asarray(A_d0, dtype=float))
    n = A.shape[0]
    if not C > 0:
        raise DomainError("C must be positive")
    ab = float(np.linalg.eigvals(A).real.max())
    if not ab < 0:
        raise NoSolutionError(f"A_d0 is not Hurwitz (spectral abscissa {ab:.3e})")
    if method == "auto":
        method = "kron" if n <= KRON_MAX_DIM else "schur"
    I = np.eye(n)
    if method == "kron":
        K = np.kron(I, A.T) + np.kron(A.T, I)
        # column-major vec: vec(P A) = (A^T (x) I) vec P, vec(A^T P) = (I (x) A^T) vec P
        P = np.linalg.solve(K, (-C * I).reshape(-1, order="F")).reshape(n, n, order="F")
    elif method == "schur":
        P = scipy.linalg.solve_continuous_lyapunov(A.T, -C * I)
    else:
        raise DomainError(f"unknown Lyapunov method {method!r}")
    P = 0.5 * (P + P.T)
    if np.linalg.eigvalsh(P).min() <= 0:
        raise NoSolutionError("Lyapunov solution is not positive definite")
    return P


def lyapunov_residual(P, A_d0, C) -> float:
    n = P.shape[0]
    return float(np.abs(P @ A_d0 + A_d0.T @ P + C * np.eye(n)).max())


@dataclass(frozen=True)
class LyapunovCertificate:
    P: np.ndarray = field(repr=False)
    C: float
    M: float
    norm_P: float
    residual: float = 0.0

    def V(self, v) -> float:
        v = np.asarray(v, dtype=float)
        return float(v @ self.P @ v + self.M * (v @ v))

    @property
    def rate(self) -> float:
        """Exponent of the squared-norm envelope, ``C / (2 (|P| + M))``."""
        return self.C / (2.0 * (self.norm_P + self.M))

    def envelope(self, t, v0_sq):
        if self.M <= 0:
            return math.inf
        return (self.norm_P + self.M) / self.M * np.exp(-self.rate * np.asarray(t)) * v0_sq


def certificate_M(P, B, C, d0, d1) -> float:
    btp = np.linalg.norm(B.T @ P, 2)
    return 2.0 * (d1 - d0) ** 2 * btp**2 / (C * d0)


def build_certificate(sys: LTVSystem, C: float = 1.0, method: str = "auto") -> LyapunovCertificate:
    if sys.d0 <= 0:
        raise HypothesisError(f"d0 = {sys.d0} must be positive")
    A_d0 = sys.A_d(sys.d0)
    P = solve_lyapunov(A_d0, C, method)
    norm_P = float(np.linalg.norm(P, 2))
    M = certificate_M(P, sys.B, C, sys.d0, sys.d1)
    # the argument needs M > 0; the formula degenerates when d1 = d0
    M = max(M, 1e-8 * norm_P)
    return LyapunovCertificate(P=P, C=float(C), M=float(M), norm_P=norm_P, residual=lyapunov_residual(P, A_d0, C))


def certificate_sweep(sys: LTVSystem, C_values) -> list:
    """(C, |P|, M, rate) for each C."""
    rows = []
    for C in C_values:
        cert = build_certificate(sys, C)
        rows.append((float(C), cert.norm_P, cert.M, cert.rate))
    return rows


# RK4 stage offsets; the end stages are pulled just inside the step so a
# step-aligned jump of a piecewise-constant d is seen on one side only.
_STAGE_EPS = 1e-9


def simulate_ltv(sys: LTVSystem, v0, t_end: float, dt: float) -> list:
    """Classical RK4 for ``dv/dt = (A - d(t) B B^T) v``; returns [(t, v), ...]."""
    if not (dt > 0 and t_end > 0):
        raise DomainError("dt and t_end must be positive")
    steps = int(round(t_end / dt))
    if steps < 1:
        raise DomainError("t_end shorter than one step")
    v = np.asarray(v0, dtype=float).copy()
    if v.shape != (sys.dim,):
        raise DomainError(f"v0 must have length {sys.dim}")
    A, BBt = sys.A, sys.BBt

    def f(t, w):
        return A @ w - float(sys.d(t)) * (BBt @ w)

    out = [(0.0, v.copy())]
    for k in range(steps):
        t = k * dt
        k1 = f(t + _STAGE_EPS * dt, v)
        k2 = f(t + 0.5 * dt, v + 0.5 * dt * k1)
        k3 = f(t + 0.5 * dt, v + 0.5 * dt * k2)
        k4 = f(t + (1 - _STAGE_EPS) * dt, v + dt * k3)
        v = v + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(v)):
            raise SolverError(f"LTV integration blew up at t={(k + 1) * dt:.6g}", time=(k + 1) * dt)
        out.append(((k + 1) * dt, v.copy()))
    return out


@dataclass
class DecayReport:
    """Rows (t, V, bound, normsq, violation) plus per-check violation lists."""

    rows: list
    derivative_violations: list
    envelope_violations: list
    envelope_defined: bool

    @property
    def passed(self) -> bool:
        return self.envelope_defined and not self.derivative_violations and not self.envelope_violations

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,V,bound,normsq,violation\n")
        for t, V, bound, nsq, flag in self.rows:
            buf.write(f"{t:.17g},{V:.17g},{bound:.17g},{nsq:.17g},{int(flag)}\n")
        return buf.getvalue()


def verify_decay(cert: LyapunovCertificate, sys: LTVSystem, traj, env_slack: float = 1e-6) -> DecayReport:
    """Audit a simulated trajectory against the certificate.

    Derivative check, per step of length dt:
    ``(V_{k+1} - V_k)/dt <= -(C/2) (|v_k|^2 + |v_{k+1}|^2)/2 + tol_k``.
    The trapezoid average stands in for the time integral of |v|^2; its
    quadrature error is at most ``dt^2/3 * L^2 |v_k|^2`` with
    ``L = max |A - d B B^T|`` over d in {d0, d1}, so
    ``tol_k = (C/6) dt^2 L^2 |v_k|^2`` plus a rounding allowance.
    Envelope check: ``|v(t)|^2 <= envelope(t) (1 + env_slack)``.
    """
    L = max(np.linalg.norm(sys.A_d(sys.d0), 2), np.linalg.norm(sys.A_d(sys.d1), 2))
    ts = np.array([t for t, _ in traj])
    vs = [np.asarray(v, dtype=float) for _, v in traj]
    Vs = np.array([cert.V(v) for v in vs])
    nsq = np.array([float(v @ v) for v in vs])
    defined = cert.M > 0
    bounds = np.array([cert.envelope(t, nsq[0]) for t in ts]) if defined else np.full(ts.size, math.inf)
    eps = np.finfo(float).eps
    deriv_bad, env_bad = [], []
    flags = np.zeros(ts.size, dtype=bool)
    for k in range(ts.size - 1):
        dt = ts[k + 1] - ts[k]
        lhs = (Vs[k + 1] - Vs[k]) / dt
        rhs = -0.5 * cert.C * 0.5 * (nsq[k] + nsq[k + 1])
        tol = cert.C / 6.0 * dt * dt * L * L * nsq[k] + 64 * eps * max(Vs[k], Vs[k + 1]) / dt
        if lhs > rhs + tol:
            deriv_bad.append((float(ts[k]), float(lhs), float(rhs + tol)))
            flags[k + 1] = True
    if defined:
        for k in range(ts.size):
            if nsq[k] > bounds[k] * (1 + env_slack) + 1e-300:
                env_bad.append((float(ts[k]), float(nsq[k]), float(bounds[k])))
                flags[k] = True
    elif nsq[0] > 0:
        flags[:] = True
    rows = [(float(t), float(V), float(b), float(q), bool(f)) for t, V, b, q, f in zip(ts, Vs, bounds, nsq, flags)]
    return DecayReport(rows, deriv_bad, env_bad, defined)


def discretize_wave(n: int, profile: DampingProfile, d0: float, d1: float, d: Callable) -> LTVSystem:
    """Method-of-lines wave operator in energy coordinates.

    Interior unknowns ``u_1..u_{n-1}``; L is the 3-point Dirichlet Laplacian
    over dx^2 and ``R = (-L)^{1/2}``.  In the coordinates ``(R u, u_t)`` the
    generator is ``[[0, R], [-R, 0]]`` (exactly skew) and the damping input is
    ``B = [0; diag(sqrt(a_j))]``.
    """
    if n < 2:
        raise DomainError("need n >= 2")
    if profile.grid.n != n:
        raise DomainError(f"profile grid has n={profile.grid.n}, expected {n}")
    N = n - 1
    lam, Q = np.linalg.eigh(-laplacian_1d(n))
    R = (Q * np.sqrt(lam)) @ Q.T
    R = 0.5 * (R + R.T)
    Z = np.zeros((N, N))
    A = np.block([[Z, R], [-R, Z]])
    B = np.vstack([Z, np.diag(np.sqrt(profile.a.values[1:-1]))])
    return LTVSystem(A=A, B=B, d=d, d0=d0, d1=d1)


def laplacian_1d(n: int) -> np.ndarray:
    """Interior 3-point Dirichlet Laplacian for n cells (exposed for checks)."""
    N = n - 1
    dx = 1.0 / n
    return (np.diag(np.full(N, -2.0)) + np.diag(np.ones(N - 1), 1) + np.diag(np.ones(N - 1), -1)) / dx**2
