"""Batch front-end: subcommand dispatch, config handling, artifact output.

Subcommands: solve2d, radial, sweep, constants, verify.  Options come from
built-in defaults, overridden by a TOML config file (--config) with tables
[domain], [params], [solve], [output], overridden in turn by flags.  Every
run writes its artifacts plus a manifest.json with a config echo, library
versions, the seed, wall time, and a sha256 per artifact.

Exit codes: 0 success, 2 configuration/validation error, 3 solver
non-convergence or failed verification.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .constants import ConvergenceError, threshold_report
from .energy import Params
from .io import (write_field_bin, write_field_csv, write_json,
                 write_manifest, write_phase_diagram_csv, write_profile_csv)
from .mesh import build_disk_mesh, build_rectangle_mesh, mesh_summary
from .minimize import (INIT_KINDS, SolveOptions, StagnationError,
                       canonicalize, minimize_sphere_field)
from .radial import check_monotone, ode_residual, radial_energy, \
    solve_radial_bvp
from .verify import (lift_phase, meridian_deviation, phase_diagram_sweep,
                     radial_deviation, sign_consistency, uniqueness_check)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

_DEFAULTS = {
    "domain": {"kind": "disk", "radius": 1.0, "nr": 48, "ntheta": 96,
               "lx": 1.0, "ly": 1.0, "nx": 48, "ny": 48},
    "params": {"kappa": 1.0, "gamma": 1.0, "dim": 2},
    "solve": {"seeds": 3, "max_iterations": 20000, "tolerance": 1e-8,
              "init": "random-uniform-S2", "init_file": None, "dr": None,
              "mode": "radial", "kappa_grid": None, "gamma_grid": None},
    "output": {"dir": "spheremin-out", "format": "csv"},
}


def _parse_grid(text):
    if text is None:
        return None
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise ValueError(f"bad grid {text!r}: {exc}") from None


def _load_config(args) -> dict:
    """Merge defaults <- config file <- explicit flags into one dict."""
    cfg = {section: dict(values) for section, values in _DEFAULTS.items()}
    explicit = set()
    if args.config is not None:
        with open(args.config, "rb") as handle:
            data = tomllib.load(handle)
        for section, values in data.items():
            if section not in cfg or not isinstance(values, dict):
                raise ValueError(f"unknown config table [{section}]")
            for key, value in values.items():
                if key not in cfg[section] and key != "kappa2":
                    raise ValueError(f"unknown config key {section}.{key}")
                cfg[section][key] = value
                explicit.add(f"{section}.{key}")

    def set_flag(section, key, value):
        if value is not None:
            cfg[section][key] = value
            explicit.add(f"{section}.{key}")

    if getattr(args, "disk", None) is not None:
        set_flag("domain", "kind", "disk")
        set_flag("domain", "radius", args.disk)
    if getattr(args, "ball_radius", None) is not None:
        set_flag("domain", "kind", "disk")
        set_flag("domain", "radius", args.ball_radius)
    if getattr(args, "rect", None) is not None:
        set_flag("domain", "kind", "rectangle")
        set_flag("domain", "lx", args.rect[0])
        set_flag("domain", "ly", args.rect[1])
    if getattr(args, "mesh", None) is not None:
        a, b = args.mesh
        if cfg["domain"]["kind"] == "disk":
            set_flag("domain", "nr", a)
            set_flag("domain", "ntheta", b)
        else:
            set_flag("domain", "nx", a)
            set_flag("domain", "ny", b)
    set_flag("params", "kappa", getattr(args, "kappa", None))
    set_flag("params", "kappa2", getattr(args, "kappa2", None))
    set_flag("params", "gamma", getattr(args, "gamma", None))
    set_flag("params", "dim", getattr(args, "dim", None))
    set_flag("solve", "seeds", getattr(args, "seeds", None))
    set_flag("solve", "max_iterations", getattr(args, "max_iterations", None))
    set_flag("solve", "tolerance", getattr(args, "tolerance", None))
    set_flag("solve", "init", getattr(args, "init", None))
    set_flag("solve", "init_file", getattr(args, "init_file", None))
    set_flag("solve", "dr", getattr(args, "dr", None))
    set_flag("solve", "mode", getattr(args, "mode", None))
    set_flag("solve", "kappa_grid", _parse_grid(getattr(args, "kappa_grid",
                                                        None)))
    set_flag("solve", "gamma_grid", _parse_grid(getattr(args, "gamma_grid",
                                                        None)))
    set_flag("output", "dir", args.out)
    set_flag("output", "format", getattr(args, "format", None))

    # kappa may come squared (kappa2); the squared form wins if both given.
    if "kappa2" in cfg["params"]:
        kappa2 = float(cfg["params"].pop("kappa2"))
        if kappa2 < 0.0:
            raise ValueError(f"kappa2 must be >= 0, got {kappa2}")
        if "params.kappa" in explicit:
            print("warning: --kappa2 overrides --kappa", file=sys.stderr)
        cfg["params"]["kappa"] = float(np.sqrt(kappa2))

    cfg["seed"] = int(args.seed)
    cfg["jobs"] = int(args.jobs)
    if cfg["jobs"] < 1:
        raise ValueError("jobs must be >= 1")
    return cfg


def _build_mesh(cfg):
    dom = cfg["domain"]
    if dom["kind"] == "disk":
        return build_disk_mesh(int(dom["nr"]), int(dom["ntheta"]),
                               float(dom["radius"]))
    if dom["kind"] == "rectangle":
        return build_rectangle_mesh(int(dom["nx"]), int(dom["ny"]),
                                    float(dom["lx"]), float(dom["ly"]))
    raise ValueError(f"unknown domain kind {dom['kind']!r}")


def _params(cfg) -> Params:
    return Params(kappa=float(cfg["params"]["kappa"]),
                  gamma=float(cfg["params"]["gamma"]))


def _options(cfg, seed_offset: int = 0) -> SolveOptions:
    solve = cfg["solve"]
    return SolveOptions(max_iterations=int(solve["max_iterations"]),
                        gradient_tolerance=float(solve["tolerance"]),
                        rng_seed=cfg["seed"] + seed_offset,
                        init_kind=str(solve["init"]),
                        init_file=solve["init_file"])


def _outdir(cfg) -> Path:
    out = Path(cfg["output"]["dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config_echo(cfg) -> dict:
    return {"domain": cfg["domain"], "params": cfg["params"],
            "solve": cfg["solve"], "output": cfg["output"],
            "seed": cfg["seed"], "jobs": cfg["jobs"]}


def _finish(cfg, out: Path, artifacts, t0: float) -> None:
    write_manifest(out / "manifest.json", _config_echo(cfg), artifacts,
                   cfg["seed"], time.perf_counter() - t0)


def cmd_solve2d(cfg) -> int:
    t0 = time.perf_counter()
    mesh = _build_mesh(cfg)
    params = _params(cfg)
    field, report = minimize_sphere_field(mesh, params, _options(cfg))
    out = _outdir(cfg)
    artifacts = [out / "field.bin", out / "report.json"]
    write_field_bin(out / "field.bin", field)
    if cfg["output"]["format"] == "json":
        write_json(out / "field.json", {"nodes": mesh.nodes,
                                        "field": field})
        artifacts.append(out / "field.json")
    else:
        write_field_csv(out / "field.csv", mesh, field)
        artifacts.append(out / "field.csv")
    write_json(out / "report.json",
               {"report": report.to_dict(), "mesh": mesh_summary(mesh),
                "kappa": params.kappa, "gamma": params.gamma})
    _finish(cfg, out, artifacts, t0)
    print(f"solve2d: {report.classification}, "
          f"energy {report.energy.total:.6g}, "
          f"{report.iterations} iterations")
    return EXIT_OK if report.converged else EXIT_SOLVER


def cmd_radial(cfg) -> int:
    t0 = time.perf_counter()
    if cfg["domain"]["kind"] != "disk":
        raise ValueError("radial solves need a disk domain (--disk R)")
    params = _params(cfg)
    radius = float(cfg["domain"]["radius"])
    dim = int(cfg["params"]["dim"])
    dr = cfg["solve"]["dr"]
    profile = solve_radial_bvp(params, radius, dim,
                               dr=None if dr is None else float(dr))
    monotone, worst = check_monotone(profile)
    out = _outdir(cfg)
    artifacts = [out / "report.json"]
    if cfg["output"]["format"] == "json":
        phi = profile.u / 2.0
        write_json(out / "profile.json",
                   {"r": profile.r, "u": profile.u, "u_prime": profile.du,
                    "phi": phi, "m1": np.sin(phi), "m3": np.cos(phi)})
        artifacts.append(out / "profile.json")
    else:
        write_profile_csv(out / "profile.csv", profile)
        artifacts.append(out / "profile.csv")
    write_json(out / "report.json",
               {"kappa": params.kappa, "gamma": params.gamma,
                "radius": radius, "dim": dim,
                "u0": profile.u0, "closure": profile.closure,
                "classification": profile.classification,
                "roots": [{"u0": u0, "energy": energy}
                          for u0, energy in profile.roots],
                "energy": radial_energy(profile, params).to_dict(),
                "monotone": monotone, "monotone_violation": worst,
                "ode_residual": ode_residual(profile, params)})
    _finish(cfg, out, artifacts, t0)
    print(f"radial: {profile.classification}, u0 {profile.u0:.6g}, "
          f"closure {profile.closure:.3g}")
    return EXIT_OK


def cmd_sweep(cfg) -> int:
    t0 = time.perf_counter()
    kappa_grid = _parse_grid(cfg["solve"]["kappa_grid"]) \
        if isinstance(cfg["solve"]["kappa_grid"], str) \
        else cfg["solve"]["kappa_grid"]
    gamma_grid = _parse_grid(cfg["solve"]["gamma_grid"]) \
        if isinstance(cfg["solve"]["gamma_grid"], str) \
        else cfg["solve"]["gamma_grid"]
    if not kappa_grid or not gamma_grid:
        raise ValueError("sweep needs --kappa-grid and --gamma-grid")
    mode = cfg["solve"]["mode"]
    if mode == "2d":
        domain = _build_mesh(cfg)
    elif mode == "radial":
        domain = (float(cfg["domain"]["radius"]), int(cfg["params"]["dim"]))
    else:
        raise ValueError(f"unknown sweep mode {mode!r}")
    dr = cfg["solve"]["dr"]
    diagram = phase_diagram_sweep(
        domain, kappa_grid, gamma_grid, seeds=int(cfg["solve"]["seeds"]),
        options=_options(cfg), base_seed=cfg["seed"],
        dr=None if dr is None else float(dr), jobs=cfg["jobs"])
    out = _outdir(cfg)
    write_phase_diagram_csv(out / "diagram.csv", diagram)
    artifacts = [out / "diagram.csv", out / "report.json"]
    labels, counts = np.unique(diagram.classes.astype(str),
                               return_counts=True)
    write_json(out / "report.json",
               {"mode": diagram.mode, "c_trace": diagram.c_trace,
                "cells": int(diagram.classes.size),
                "class_counts": dict(zip(labels, counts)),
                "failures": list(diagram.failures)})
    _finish(cfg, out, artifacts, t0)
    print(f"sweep: {diagram.classes.size} cells, "
          + ", ".join(f"{c} {n}" for c, n in zip(labels, counts)))
    return EXIT_OK


def cmd_constants(cfg) -> int:
    t0 = time.perf_counter()
    mesh = _build_mesh(cfg)
    params = _params(cfg)
    report = threshold_report(mesh, params.kappa, params.gamma)
    out = _outdir(cfg)
    write_json(out / "constants.json", report.to_dict())
    _finish(cfg, out, [out / "constants.json"], t0)
    for key, value in report.to_dict().items():
        if key != "mesh":
            print(f"{key:12s} {value}")
    return EXIT_OK


def cmd_verify(cfg) -> int:
    """Solve at the given parameters and run every structural check."""
    t0 = time.perf_counter()
    if cfg["domain"]["kind"] != "disk":
        raise ValueError("verify needs a disk domain (--disk R)")
    if int(cfg["solve"]["seeds"]) < 2:
        raise ValueError("verify needs --seeds >= 2 for the uniqueness check")
    mesh = _build_mesh(cfg)
    params = _params(cfg)
    radius = float(cfg["domain"]["radius"])
    dr = cfg["solve"]["dr"]
    profile = solve_radial_bvp(params, radius, 2,
                               dr=None if dr is None else float(dr))
    monotone, _ = check_monotone(profile)

    fields = []
    converged = True
    for s in range(int(cfg["solve"]["seeds"])):
        field, report = minimize_sphere_field(mesh, params, _options(cfg, s))
        converged = converged and report.converged
        fields.append(field)
    canon, _ = canonicalize(mesh, fields[0])
    phase = lift_phase(canon)
    radii = np.hypot(mesh.nodes[:, 0], mesh.nodes[:, 1])
    phi_1d = np.interp(radii, profile.r, profile.u / 2.0)

    checks = {
        "converged": converged,
        "monotone_profile": bool(monotone),
        "meridian_deviation": meridian_deviation(fields[0], mesh),
        "radial_deviation": radial_deviation(mesh, phase),
        "uniqueness_distance": uniqueness_check(fields, mesh),
        "sign_m1": sign_consistency(canon, 0, mesh).constant_sign,
        "sign_m3": sign_consistency(canon, 2, mesh).constant_sign,
        "max_2d_1d_gap": float(np.max(np.abs(phase - phi_1d))),
    }
    verdicts = {
        "converged": converged,
        "monotone_profile": bool(monotone),
        "meridian_deviation": checks["meridian_deviation"] <= 1e-3,
        "radial_deviation": checks["radial_deviation"] <= 1e-3,
        "uniqueness_distance": checks["uniqueness_distance"] <= 5e-3,
        "sign_m1": checks["sign_m1"],
        "sign_m3": checks["sign_m3"],
        "max_2d_1d_gap": checks["max_2d_1d_gap"] <= 5e-2,
    }
    out = _outdir(cfg)
    write_json(out / "verify.json", {"kappa": params.kappa,
                                     "gamma": params.gamma,
                                     "checks": checks,
                                     "verdicts": verdicts})
    _finish(cfg, out, [out / "verify.json"], t0)
    for name in checks:
        status = "PASS" if verdicts[name] else "FAIL"
        print(f"{status} {name} = {checks[name]}")
    return EXIT_OK if all(verdicts.values()) else EXIT_SOLVER


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, default=0, help="base RNG seed")
    common.add_argument("--jobs", type=int, default=1,
                        help="parallel sweep jobs")
    common.add_argument("--format", choices=("csv", "json"),
                        help="tabular artifact format (default csv)")
    domain = argparse.ArgumentParser(add_help=False)
    domain.add_argument("--disk", type=float, metavar="R",
                        help="disk domain of radius R")
    domain.add_argument("--R", type=float, metavar="R", dest="ball_radius",
                        help="ball radius (alias for --disk)")
    domain.add_argument("--rect", type=float, nargs=2,
                        metavar=("LX", "LY"), help="rectangle domain")
    domain.add_argument("--mesh", type=int, nargs=2, metavar=("A", "B"),
                        help="resolution: (nr ntheta) disk, (nx ny) rectangle")
    pars = argparse.ArgumentParser(add_help=False)
    pars.add_argument("--kappa", type=float, help="anisotropy strength")
    pars.add_argument("--kappa2", type=float,
                      help="anisotropy strength squared (wins over --kappa)")
    pars.add_argument("--gamma", type=float, help="boundary penalty scale")
    pars.add_argument("--N", dest="dim", type=int,
                      help="dimension for radial solves")
    solve = argparse.ArgumentParser(add_help=False)
    solve.add_argument("--max-iterations", type=int)
    solve.add_argument("--tolerance", type=float,
                       help="relative projected-gradient tolerance")
    solve.add_argument("--init", choices=INIT_KINDS)
    solve.add_argument("--init-file", help="field dump for --init file")
    solve.add_argument("--seeds", type=int, help="seeds per solve/sweep cell")
    solve.add_argument("--dr", type=float, help="radial integration step")

    parser = argparse.ArgumentParser(
        prog="spheremin",
        description="boundary-penalized Dirichlet energy laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve2d", parents=[common, domain, pars, solve],
                   help="minimize over sphere-valued fields on a 2D mesh")
    sub.add_parser("radial", parents=[common, domain, pars, solve],
                   help="solve the radial boundary-value problem")
    sweep = sub.add_parser("sweep", parents=[common, domain, pars, solve],
                           help="classify a (kappa, gamma) grid")
    sweep.add_argument("--kappa-grid", help="comma-separated kappa values")
    sweep.add_argument("--gamma-grid", help="comma-separated gamma values")
    sweep.add_argument("--mode", choices=("2d", "radial"))
    sub.add_parser("constants", parents=[common, domain, pars],
                   help="threshold constants for a domain")
    sub.add_parser("verify", parents=[common, domain, pars, solve],
                   help="run the structural checks at one parameter point")
    return parser


_COMMANDS = {"solve2d": cmd_solve2d, "radial": cmd_radial,
             "sweep": cmd_sweep, "constants": cmd_constants,
             "verify": cmd_verify}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        return _COMMANDS[args.command](cfg)
    except (ValueError, OSError, tomllib.TOMLDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StagnationError, ConvergenceError, RuntimeError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
