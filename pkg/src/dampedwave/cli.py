"""Command-line experiment runner.

    dampedwave run <config> [--out DIR] [--quiet]
    dampedwave sweep <config>
    dampedwave validate-damping <name> [key=value ...] [--radius R] [--samples N]
    dampedwave certify-ltv <config>
    dampedwave list

``<config>`` is a path or the name of a bundled scenario.  Exit codes:
0 success, 1 bad config or arguments, 2 unknown registry name, 3 solver
failure, 4 theorem hypothesis violated, 5 a certificate check failed.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from .analysis import (
    Scenario,
    fit_decay,
    interp_consistency,
    norm_series,
    predicted_rate,
    semi_global_sweep,
    sweep_to_csv,
    thm_infty_scenario,
)
from .characteristics import CharSolverConfig, solve
from .config import ScenarioConfig, _floats, load_config, shipped_configs
from .damping import make_damping, sector_bounds, validate_damping
from .energy import ConvexWeight, check_monotone, gradient, haraux_phi, hp_norm
from .errors import DomainError, HypothesisError, SolverError, UnknownNameError
from .fdm import fdm_solve
from .grid import Grid, ddx
from .ltv import (
    LTVSystem,
    build_certificate,
    certificate_sweep,
    discretize_wave,
    random_piecewise_d,
    simulate_ltv,
    verify_decay,
)
from .profiles import make_initial_data, make_profile

EXIT_OK, EXIT_CONFIG, EXIT_UNKNOWN, EXIT_SOLVER, EXIT_HYPOTHESIS, EXIT_CHECK = 0, 1, 2, 3, 4, 5


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(v) for v in r) + "\n")
    path.write_bytes(buf.getvalue().encode("utf-8"))


def write_text(path: Path, text: str) -> None:
    path.write_bytes(text.encode("utf-8"))


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    return obj


def write_manifest(path: Path, data: dict) -> None:
    write_text(path, json.dumps(_clean(data), sort_keys=True, indent=2) + "\n")


# ---------------------------------------------------------------------------
# building blocks from a config


def build_problem(cfg: ScenarioConfig, n: int | None = None):
    grid = Grid(n or cfg.grid_n)
    damping = make_damping(cfg.damping, **cfg.damping_params)
    profile = make_profile(cfg.profile, grid, **cfg.profile_params)
    z0, z1 = make_initial_data(cfg.initial, grid, **cfg.initial_params)
    try:
        solver_cfg = CharSolverConfig(**cfg.solver_params)
    except TypeError as exc:
        raise DomainError(f"bad [solver] entry: {exc}") from None
    sc = Scenario(
        z0=z0,
        z1=z1,
        damping=damping,
        profile=profile,
        t_end=cfg.t_end,
        sample_dt=cfg.sample_dt,
        solver=cfg.solver,
        config=solver_cfg,
        fit_window=cfg.fit_window,
    )
    if cfg.R is not None:
        sc = sc.scaled_to(cfg.R)
    return sc


def data_radius(sc: Scenario) -> float:
    """``max(|z0'|_inf, |z1|_inf)``: the radius in the a-priori sup bound."""
    return max(float(np.abs(ddx(sc.z0).values).max()), float(np.abs(sc.z1.values).max()))


def require_decay_hypotheses(sc: Scenario, R: float) -> dict:
    """Checks shared by every decay scenario; raises HypothesisError."""
    problems = []
    rep = validate_damping(sc.damping, max(2.0 * R, 1.0), 2001)
    if not rep.passed:
        problems.append(f"damping {sc.damping.name!r} fails {', '.join(rep.failed_properties())}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sb = sector_bounds(sc.damping, R, "quotient")
    if not sb.hypothesis_ok:
        problems.append(f"sector lower bound d0={sb.d0:.6g} is not positive for R={R:g}")
    if sc.profile.is_zero:
        problems.append("damping profile vanishes identically")
    if problems:
        raise HypothesisError("; ".join(problems))
    return {"d0": sb.d0, "d1": sb.d1, "R": R}


def solver_stats(traj) -> dict:
    w = traj.windows
    if not w:
        return {"solver": traj.solver, "windows": 0}
    return {
        "solver": traj.solver,
        "windows": len(w),
        "max_ratio": max(x.max_ratio for x in w),
        "max_iterations": max(x.iterations for x in w),
        "max_contraction_bound": max(x.contraction_bound for x in w),
        "all_in_ball": all(x.in_ball for x in w),
        "window_lengths": sorted({x.T for x in w}),
    }


# ---------------------------------------------------------------------------
# pipelines


def run_scenario(cfg: ScenarioConfig, outdir: Path) -> dict:
    outdir.mkdir(parents=True, exist_ok=True)
    sc = build_problem(cfg)
    hinf0 = sc.hinf0()
    needs_decay = bool(cfg.p_list or cfg.q_list or cfg.fit_window or cfg.thm25)
    manifest = {"config": cfg.echo(), "files": ["trajectory.csv"]}
    if needs_decay:
        manifest["sector"] = require_decay_hypotheses(sc, hinf0)

    traj = sc.run()
    write_text(outdir / "trajectory.csv", traj.to_csv("norms"))
    manifest["solver_stats"] = solver_stats(traj)
    manifest["warnings"] = list(traj.warnings)

    h2 = np.array([hp_norm(s, 2) for s in traj])
    r0 = data_radius(sc)
    sup = max(max(float(np.abs(gradient(s).values).max()), float(np.abs(s.v.values).max())) for s in traj)
    summary = {
        "samples": len(traj),
        "hinf0": hinf0,
        "h2_rel_variation": float(np.abs(h2 - h2[0]).max() / h2[0]) if h2[0] > 0 else 0.0,
        "data_radius": r0,
        "thm23_ratio": sup / (2 * r0) if r0 > 0 else 0.0,
    }

    if cfg.F_list:
        weights = [
            ConvexWeight.power_p(w.value) if w.kind == "power" else ConvexWeight.pos_square(w.value) for w in cfg.F_list
        ]
        cols = [[haraux_phi(s, F) for s in traj] for F in weights]
        t = traj.times
        write_csv(outdir / "phi.csv", ["t"] + [w.label for w in cfg.F_list], zip(t, *cols))
        manifest["files"].append("phi.csv")
        summary["phi_violations"] = {
            w.label: len(check_monotone(list(zip(t, c)), 1e-6, 1e-9)) for w, c in zip(cfg.F_list, cols)
        }

    if needs_decay and not cfg.thm25:
        fit = fit_decay(norm_series(traj, 2), cfg.fit_window)
        summary["fit_h2"] = {"K": fit.K, "beta": fit.beta, "r2": fit.r_squared, "window": list(fit.window)}
        rows = []
        for p in cfg.p_list:
            rep = interp_consistency(traj, p, cfg.fit_window)
            rows.append(
                (p, rep.beta2, rep.beta_p, rep.predicted, len(rep.holder_violations), rep.max_holder_ratio, rep.rate_ok)
            )
        if rows:
            write_csv(
                outdir / "interp.csv",
                ["p", "beta2", "beta_p", "predicted", "holder_violations", "max_holder_ratio", "rate_ok"],
                rows,
            )
            manifest["files"].append("interp.csv")
        qrows = []
        for p in cfg.p_list:
            for q in cfg.q_list:
                if 2 <= q < p and fit.beta > 0:
                    qrows.append((p, q, predicted_rate(fit.beta, p, q)))
        if qrows:
            write_csv(outdir / "rates_q.csv", ["p", "q", "predicted"], qrows)
            manifest["files"].append("rates_q.csv")

    if cfg.cross_n:
        rows = []
        prev = None
        for n in cfg.cross_n:
            sub = build_problem(cfg, n)
            a = solve(sub.z0, sub.z1, sub.damping, sub.profile, cfg.t_end, cfg.sample_dt, sub.config)
            b = fdm_solve(sub.z0, sub.z1, sub.damping, sub.profile, cfg.t_end, cfg.sample_dt)
            disc = max(float(np.abs(x.z.values - y.z.values).max()) for x, y in zip(a, b))
            rows.append((n, 1.0 / n, disc, prev / disc if prev else 0.0))
            prev = disc
        write_csv(outdir / "cross_solver.csv", ["n", "dx", "discrepancy", "ratio"], rows)
        manifest["files"].append("cross_solver.csv")
        summary["cross_min_ratio"] = min(r[3] for r in rows[1:]) if len(rows) > 1 else None

    if cfg.thm25:
        rep = thm_infty_scenario(sc.z0, sc.z1, sc.damping, sc.profile, cfg.t_end, cfg.sample_dt, cfg.fit_window, config=sc.config)
        write_csv(
            outdir / "thm25.csv",
            ["t", "hinf", "envelope", "u", "w", "h2"],
            zip(rep.times, rep.hinf, rep.envelope, rep.u_series, rep.w_series, rep.h2),
        )
        manifest["files"].append("thm25.csv")
        summary["thm25"] = {
            "K1": rep.K1,
            "beta1": rep.beta1,
            "K2": rep.K2,
            "beta2": rep.beta2,
            "constant": rep.constant,
            "hinf_rate": rep.hinf_rate,
            "envelope_violations": len(rep.violations),
            "notes": rep.notes,
        }

    manifest["summary"] = summary
    write_manifest(outdir / "manifest.json", manifest)
    return manifest


def run_sweep(cfg: ScenarioConfig, outdir: Path) -> dict:
    if not cfg.sweep_R:
        raise DomainError("sweep needs analysis.sweep_R")
    outdir.mkdir(parents=True, exist_ok=True)
    sc = build_problem(cfg)
    require_decay_hypotheses(sc, max(cfg.sweep_R))
    rows = semi_global_sweep(sc, cfg.sweep_R)
    write_text(outdir / "sweep.csv", sweep_to_csv(rows))
    betas = [r.beta for r in rows]
    manifest = {
        "config": cfg.echo(),
        "files": ["sweep.csv"],
        "summary": {
            "beta_min": min(betas),
            "beta_max": max(betas),
            "beta_spread": (max(betas) - min(betas)) / max(abs(b) for b in betas) if any(betas) else 0.0,
        },
    }
    write_manifest(outdir / "manifest.json", manifest)
    return manifest


def ltv_system(cfg: ScenarioConfig) -> LTVSystem:
    lt = cfg.ltv
    d0, d1 = float(lt.get("d0", 1.0)), float(lt.get("d1", 2.0))
    kind = str(lt.get("system", "example2x2"))
    const = lambda t: d0
    if kind == "example2x2":
        return LTVSystem(np.array([[0.0, 1.0], [-1.0, 0.0]]), np.array([[0.0], [1.0]]), const, d0, d1)
    if kind == "wave":
        n = int(lt.get("n", cfg.grid_n))
        profile = make_profile(cfg.profile, Grid(n), **cfg.profile_params)
        return discretize_wave(n, profile, d0, d1, const)
    raise UnknownNameError("ltv system", kind)


def run_certify(cfg: ScenarioConfig, outdir: Path) -> dict:
    outdir.mkdir(parents=True, exist_ok=True)
    lt = cfg.ltv
    base = ltv_system(cfg)
    C = float(lt.get("C", 1.0))
    draws = int(lt.get("draws", 20))
    seed = int(lt.get("seed", 0))
    hold = float(lt.get("hold", 0.5))
    t_end = float(lt.get("t_end", 20.0))
    dt = float(lt.get("dt", 0.01))
    base.validate(np.array([0.0]))
    cert = build_certificate(base, C)
    write_csv(outdir / "certificate.csv", [f"P{j}" for j in range(base.dim)], cert.P.tolist())
    files = ["certificate.csv"]
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(draws):
        d = random_piecewise_d(rng, base.d0, base.d1, t_end, hold, dt)
        sys_i = LTVSystem(base.A, base.B, d, base.d0, base.d1)
        sys_i.validate()
        v0 = rng.normal(size=base.dim)
        traj = simulate_ltv(sys_i, v0, t_end, dt)
        rep = verify_decay(cert, sys_i, traj)
        name = f"ltv_draw_{i:02d}.csv"
        write_text(outdir / name, rep.to_csv())
        files.append(name)
        nsq = rep.rows[-1][3] / rep.rows[0][3]
        rows.append((i, rep.passed, len(rep.derivative_violations), len(rep.envelope_violations), nsq))
    write_csv(outdir / "ltv_summary.csv", ["draw", "passed", "derivative_violations", "envelope_violations", "final_normsq_ratio"], rows)
    files.append("ltv_summary.csv")
    if "C_sweep" in lt:
        cs = _floats(str(lt["C_sweep"])) if isinstance(lt["C_sweep"], str) else [float(lt["C_sweep"])]
        write_csv(outdir / "c_sweep.csv", ["C", "norm_P", "M", "rate"], certificate_sweep(base, cs))
        files.append("c_sweep.csv")
    manifest = {
        "config": cfg.echo(),
        "files": files,
        "certificate": {
            "C": cert.C,
            "M": cert.M,
            "norm_P": cert.norm_P,
            "rate": cert.rate,
            "residual": cert.residual,
            "dim": base.dim,
            "skew_defect": float(np.abs(base.A + base.A.T).max()),
            "spectral_abscissa": base.spectral_abscissa(),
        },
        "summary": {"draws": draws, "failed": sum(1 for r in rows if not r[1])},
    }
    write_manifest(outdir / "manifest.json", manifest)
    return manifest


# ---------------------------------------------------------------------------


def _kv(items) -> dict:
    out = {}
    for it in items:
        key, sep, val = it.partition("=")
        if not sep:
            raise DomainError(f"expected key=value, got {it!r}")
        try:
            out[key] = float(val)
        except ValueError:
            out[key] = val
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dampedwave", description="Damped wave equation laboratory.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output root (default: config 'output' or ./out)")
    common.add_argument("--quiet", action="store_true", help="no summary on stdout")
    sub = ap.add_subparsers(dest="verb", required=True)
    for verb, text in (("run", "run a scenario"), ("sweep", "semi-global R sweep"), ("certify-ltv", "Lyapunov certificate")):
        p = sub.add_parser(verb, parents=[common], help=text)
        p.add_argument("config", help="config path or bundled scenario name")
    p = sub.add_parser("validate-damping", parents=[common], help="probe a catalog damping")
    p.add_argument("name")
    p.add_argument("params", nargs="*", help="key=value parameters")
    p.add_argument("--radius", type=float, default=5.0)
    p.add_argument("--samples", type=int, default=2001)
    sub.add_parser("list", parents=[common], help="list bundled scenarios")
    return ap


def _outdir(args, cfg: ScenarioConfig) -> Path:
    root = Path(args.out or cfg.output or "out")
    return root / cfg.scenario_id


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    say = (lambda *a: None) if args.quiet else print
    try:
        if args.verb == "list":
            for name in shipped_configs():
                say(name)
            return EXIT_OK
        if args.verb == "validate-damping":
            spec = make_damping(args.name, **_kv(args.params))
            rep = validate_damping(spec, args.radius, args.samples)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                sb = sector_bounds(spec, args.radius / 2, "quotient")
            say(f"{spec.name}: {'passed' if rep.passed else 'FAILED'}")
            for prop in rep.failed_properties():
                first = next(v for v in rep.violations if v[0] == prop)
                say(f"  {prop}: s={first[1]:.6g} value={first[2]:.6g}")
            say(f"  sector on [-{args.radius:g}, {args.radius:g}]: d0={sb.d0:.10g} d1={sb.d1:.10g}")
            return EXIT_OK if rep.passed else EXIT_HYPOTHESIS
        cfg = load_config(args.config)
        out = _outdir(args, cfg)
        if args.verb == "run":
            m = run_scenario(cfg, out)
        elif args.verb == "sweep":
            m = run_sweep(cfg, out)
        else:
            m = run_certify(cfg, out)
        say(f"{cfg.scenario_id}: wrote {', '.join(m['files'])} to {out}")
        say(json.dumps(_clean(m.get("summary", {})), sort_keys=True))
        if args.verb == "certify-ltv" and m["summary"]["failed"]:
            return EXIT_CHECK
        return EXIT_OK
    except UnknownNameError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    except SolverError as exc:
        where = []
        if exc.window is not None:
            where.append(f"window {exc.window}")
        if exc.time is not None:
            where.append(f"t={exc.time:.6g}")
        print(f"solver failure ({', '.join(where) or 'unknown location'}): {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except HypothesisError as exc:
        print(f"hypothesis violated: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
