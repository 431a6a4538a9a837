"""Scenario configuration files.

INI layout (all sections except ``[scenario]`` optional)::

    [scenario]
    id = thm23_bound
    grid_n = 256
    t_end = 20
    sample_dt = 0.125
    solver = characteristics      ; or fdm
    R = 1.0                       ; scale initial data to this H_inf norm

    [damping]
    name = saturation             ; other keys are numeric parameters

    [profile]
    name = bump
    center = 0.5
    width = 0.4

    [initial]
    name = standing
    k = 1

    [solver]
    picard_tol = 1e-12
    pairing = symmetric

    [analysis]
    p_list = 4, 8
    q_list = 3
    F_list = power:2, power:4, power:8, pos:1.5
    sweep_R = 0.5, 1, 2, 4
    fit_window = 5, 20
    cross_n = 64, 128, 256
    thm25 = false

    [ltv]
    system = example2x2           ; or wave
    n = 32
    d0 = 1
    d1 = 2
    C = 1
    draws = 20
    seed = 0
    hold = 0.5
    t_end = 20
    dt = 0.01
    C_sweep = 0.5, 1, 2
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import DomainError

CONFIG_PACKAGE = "dampedwave.configs"


def _floats(text: str) -> list:
    text = text.strip()
    if not text:
        return []
    return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]


def _ints(text: str) -> list:
    return [int(round(v)) for v in _floats(text)]


def _number(text: str):
    t = text.strip()
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        return t


def _params(section) -> dict:
    return {k: _number(v) for k, v in section.items() if k != "name"}


@dataclass(frozen=True)
class WeightSpec:
    kind: str
    value: float

    @property
    def label(self) -> str:
        return f"{self.kind}{self.value:g}"


def _weights(text: str) -> list:
    out = []
    for item in [x.strip() for x in text.split(",") if x.strip()]:
        kind, _, val = item.partition(":")
        kind = kind.strip()
        if kind not in ("power", "pos"):
            raise DomainError(f"unknown weight kind {kind!r}")
        out.append(WeightSpec(kind, float(val)))
    return out


@dataclass
class ScenarioConfig:
    scenario_id: str
    grid_n: int = 128
    t_end: float = 10.0
    sample_dt: float = 0.125
    solver: str = "characteristics"
    R: float | None = None
    damping: str = "saturation"
    damping_params: dict = field(default_factory=dict)
    profile: str = "bump"
    profile_params: dict = field(default_factory=dict)
    initial: str = "standing"
    initial_params: dict = field(default_factory=dict)
    solver_params: dict = field(default_factory=dict)
    p_list: list = field(default_factory=list)
    q_list: list = field(default_factory=list)
    F_list: list = field(default_factory=list)
    sweep_R: list = field(default_factory=list)
    fit_window: tuple | None = None
    cross_n: list = field(default_factory=list)
    thm25: bool = False
    ltv: dict = field(default_factory=dict)
    output: str | None = None
    source: str = ""

    def __post_init__(self):
        if not self.scenario_id or any(c in self.scenario_id for c in "/\\ "):
            raise DomainError(f"bad scenario id {self.scenario_id!r}")
        if self.grid_n < 2:
            raise DomainError("grid_n must be at least 2")
        if not (self.t_end > 0 and self.sample_dt > 0):
            raise DomainError("t_end and sample_dt must be positive")
        if self.solver not in ("characteristics", "fdm"):
            raise DomainError(f"unknown solver {self.solver!r}")
        if self.R is not None and not self.R > 0:
            raise DomainError("R must be positive")
        for p in self.p_list:
            if not 2 < p < math.inf:
                raise DomainError(f"p_list entries must lie in (2, inf), got {p}")
        if self.fit_window is not None and not (len(self.fit_window) == 2 and self.fit_window[0] < self.fit_window[1]):
            raise DomainError("fit_window must be an increasing pair")

    def echo(self) -> dict:
        """Plain-data view for the run manifest."""
        return {
            "scenario_id": self.scenario_id,
            "grid_n": self.grid_n,
            "t_end": self.t_end,
            "sample_dt": self.sample_dt,
            "solver": self.solver,
            "R": self.R,
            "damping": {"name": self.damping, **self.damping_params},
            "profile": {"name": self.profile, **self.profile_params},
            "initial": {"name": self.initial, **self.initial_params},
            "solver_params": dict(self.solver_params),
            "analysis": {
                "p_list": self.p_list,
                "q_list": self.q_list,
                "F_list": [w.label for w in self.F_list],
                "sweep_R": self.sweep_R,
                "fit_window": list(self.fit_window) if self.fit_window else None,
                "cross_n": self.cross_n,
                "thm25": self.thm25,
            },
            "ltv": dict(self.ltv),
        }


def parse_config(text: str, source: str = "<string>") -> ScenarioConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    cp.optionxform = str  # keep parameter names case-sensitive (C, R)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise DomainError(f"cannot parse {source}: {exc}") from None
    if not cp.has_section("scenario"):
        raise DomainError(f"{source}: missing [scenario] section")
    sc = cp["scenario"]
    get = lambda sec, key, default=None: cp[sec].get(key, default) if cp.has_section(sec) else default
    try:
        an = "analysis"
        fw = _floats(get(an, "fit_window", "") or "")
        cfg = ScenarioConfig(
            scenario_id=sc.get("id", Path(source).stem),
            grid_n=int(sc.get("grid_n", "128")),
            t_end=float(sc.get("t_end", "10")),
            sample_dt=float(sc.get("sample_dt", "0.125")),
            solver=sc.get("solver", "characteristics").strip(),
            R=float(sc["R"]) if "R" in sc else None,
            damping=get("damping", "name", "saturation").strip(),
            damping_params=_params(cp["damping"]) if cp.has_section("damping") else {},
            profile=get("profile", "name", "bump").strip(),
            profile_params=_params(cp["profile"]) if cp.has_section("profile") else {},
            initial=get("initial", "name", "standing").strip(),
            initial_params=_params(cp["initial"]) if cp.has_section("initial") else {},
            solver_params=_params(cp["solver"]) if cp.has_section("solver") else {},
            p_list=_floats(get(an, "p_list", "") or ""),
            q_list=_floats(get(an, "q_list", "") or ""),
            F_list=_weights(get(an, "F_list", "") or ""),
            sweep_R=_floats(get(an, "sweep_R", "") or ""),
            fit_window=tuple(fw) if fw else None,
            cross_n=_ints(get(an, "cross_n", "") or ""),
            thm25=(get(an, "thm25", "false") or "false").strip().lower() in ("1", "true", "yes", "on"),
            ltv=_params(cp["ltv"]) if cp.has_section("ltv") else {},
            output=sc.get("output"),
            source=source,
        )
    except (ValueError, KeyError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"{source}: bad value: {exc}") from None
    return cfg


def shipped_configs() -> list:
    """Names of the bundled scenario files (without extension)."""
    root = resources.files(CONFIG_PACKAGE)
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".ini"))


def load_config(ref: str) -> ScenarioConfig:
    """Load from a file path, or by name from the bundled scenarios."""
    path = Path(ref)
    if path.is_file():
        return parse_config(path.read_text(encoding="utf-8"), str(path))
    res = resources.files(CONFIG_PACKAGE) / f"{ref}.ini"
    if res.is_file():
        return parse_config(res.read_text(encoding="utf-8"), f"{ref}.ini")
    raise DomainError(f"no config file or bundled scenario named {ref!r}")
