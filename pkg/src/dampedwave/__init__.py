"""Simulation and verification tools for the 1D wave equation with localized
nonlinear damping ``z_tt = z_xx - a(x) sigma(z_t)`` on [0, 1]."""

from .characteristics import CharSolverConfig, Trajectory, WaveState, dalembert_homogeneous, solve
from .damping import DampingSpec, eval_quotient, make_damping, sector_bounds, validate_damping
from .errors import (
    DampedWaveError,
    DomainError,
    EvaluationError,
    HypothesisError,
    NoSolutionError,
    SolverError,
    UnknownNameError,
)
from .fdm import fdm_solve
from .grid import Grid, GridFn, extend_odd_periodic, lp_norm
from .profiles import DampingProfile, make_initial_data, make_profile

__version__ = "0.1.0"

__all__ = [
    "CharSolverConfig",
    "DampedWaveError",
    "DampingProfile",
    "DampingSpec",
    "DomainError",
    "EvaluationError",
    "Grid",
    "GridFn",
    "HypothesisError",
    "NoSolutionError",
    "SolverError",
    "Trajectory",
    "UnknownNameError",
    "WaveState",
    "dalembert_homogeneous",
    "eval_quotient",
    "extend_odd_periodic",
    "fdm_solve",
    "lp_norm",
    "make_damping",
    "make_initial_data",
    "make_profile",
    "sector_bounds",
    "solve",
    "validate_damping",
]
