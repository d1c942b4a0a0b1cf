"""Command-line driver: ``python -m dnls_breathers <command> [flags]``.

Commands: ground-state, breather, convergence, fem-check, evolve.  Settings
come from defaults, then an optional JSON config file (``--config``), then
``BREATHER_OUT`` for the output directory, then explicit flags.  Every run
writes ``manifest.json`` next to its artifacts.

Config file schema (all keys optional)::

    {"command": "breather", "dim": 1, "p": 1.0, "mode": "ST", "mu": 0.2,
     "mus": [0.4, 0.2, 0.1], "radius": "auto" | <int>, "tol": 1e-12,
     "max_iter": 50, "out": "out", "seed": 0, "trials": 100,
     "steps": 4096, "snapshots": 8}

Exit codes: 0 success, 1 computation failed (partial artifacts flagged),
2 invalid configuration (one JSON line on stderr).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy

from . import io
from .continuum import continuum_functionals
from .dynamics import ComplexLatticeState, conserved_drift, evolve
from .fem import FemFunction, gradient_energy, l2_mass_identity_check, quadrature_gradient_energy
from .lattice import LABEL_OFFSETS, ModeSpec, check_exponent, random_field
from .solver import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    SolverError,
    auto_radius,
    coercivity_check,
    convergence_study,
    ground_state,
    initial_guess,
    solve_breather,
)

COMMANDS = ("ground-state", "breather", "convergence", "fem-check", "evolve")
FEM_RTOL = 1e-12
FEM_RADIUS = 6


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(message)
        self.key = key


@dataclass
class RunConfig:
    command: str
    dim: int = 1
    p: float | None = None
    mode: str = "ST"
    mu: float = 0.2
    mus: list[float] = field(default_factory=lambda: [0.4, 0.2, 0.1, 0.05])
    radius: str | int = "auto"
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    out: str = "out"
    seed: int = 0
    trials: int = 100
    steps: int = 4096
    snapshots: int = 8

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError("command", f"unknown command {self.command!r}")
        if self.dim not in (1, 2):
            raise ConfigError("dim", f"dim must be 1 or 2, got {self.dim}")
        if self.p is None:
            self.p = 1.0 if self.dim == 1 else 0.5
        try:
            check_exponent(self.p, self.dim)
        except ValueError as exc:
            raise ConfigError("p", str(exc)) from None
        if self.mode not in LABEL_OFFSETS[self.dim]:
            raise ConfigError("mode", f"mode {self.mode!r} is not valid for dim={self.dim} "
                                      f"(valid: {', '.join(LABEL_OFFSETS[self.dim])})")
        if not self.mu > 0:
            raise ConfigError("mu", f"mu must be positive, got {self.mu}")
        if len(self.mus) < 3 or any(not m > 0 for m in self.mus):
            raise ConfigError("mus", "mus needs at least three positive values")
        if self.radius != "auto" and not (isinstance(self.radius, int) and self.radius >= 2):
            raise ConfigError("radius", f"radius must be 'auto' or an integer >= 2, got {self.radius!r}")
        for key in ("tol",):
            if not getattr(self, key) > 0:
                raise ConfigError(key, f"{key} must be positive")
        for key in ("max_iter", "trials", "steps"):
            if not getattr(self, key) >= 1:
                raise ConfigError(key, f"{key} must be at least 1")
        if self.snapshots < 0:
            raise ConfigError("snapshots", "snapshots must be non-negative")
        return self


def _radius_arg(text: str):
    if text == "auto":
        return "auto"
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or an integer, got {text!r}") from None


def _mus_arg(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail("argv", message)


def _fail(key: str, message: str, code: int = 2):
    sys.stderr.write(json.dumps({"error": "invalid_config", "key": key, "message": message}) + "\n")
    raise SystemExit(code)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dnls-breathers", description="Discrete breathers of the DNLS lattice.")
    parser.add_argument("command", choices=COMMANDS, nargs="?", help="pipeline to run")
    parser.add_argument("--config", help="JSON file with any of the settings below")
    parser.add_argument("--dim", type=int, help="lattice dimension, 1 or 2 (default 1)")
    parser.add_argument("--p", type=float, help="nonlinearity exponent, 1/2 <= p < 2/dim (default 1 in 1D, 1/2 in 2D)")
    parser.add_argument("--mode", help="breather type: ST or P in 1D; ST, P, H_x, H_y in 2D (default ST)")
    parser.add_argument("--mu", type=float, help="lattice spacing (default 0.2)")
    parser.add_argument("--mus", type=_mus_arg, help="comma-separated spacing ladder for convergence")
    parser.add_argument("--radius", type=_radius_arg, help="box half-width K or 'auto' (default auto)")
    parser.add_argument("--tol", type=float, help=f"Newton residual tolerance (default {DEFAULT_TOL:g})")
    parser.add_argument("--max-iter", dest="max_iter", type=int, help=f"Newton step cap (default {DEFAULT_MAX_ITER})")
    parser.add_argument("--out", help="output directory (default ./out; BREATHER_OUT overrides the file value)")
    parser.add_argument("--seed", type=int, help="seed for fem-check random fields (default 0)")
    parser.add_argument("--trials", type=int, help="random fields per fem-check (default 100)")
    parser.add_argument("--steps", type=int, help="time steps per period for evolve (default 4096)")
    parser.add_argument("--snapshots", type=int, help="snapshots written by evolve (default 8)")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return parser


def load_config(argv=None) -> tuple[RunConfig, bool]:
    """Merge defaults, config file, environment and flags; returns ``(config, verbose)``."""
    args = build_parser().parse_args(argv)
    values: dict = {}
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", f"cannot read config file: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config", "config file must hold a JSON object")
        unknown = sorted(set(loaded) - set(RunConfig.__dataclass_fields__))
        if unknown:
            raise ConfigError(unknown[0], f"unknown config key {unknown[0]!r}")
        values.update(loaded)
    if os.environ.get("BREATHER_OUT"):
        values["out"] = os.environ["BREATHER_OUT"]
    for key, val in vars(args).items():
        if key not in ("config", "verbose") and val is not None:
            values[key] = val
    if "command" not in values:
        raise ConfigError("command", f"no command given (choose from {', '.join(COMMANDS)})")
    try:
        cfg = RunConfig(**values)
        cfg.dim, cfg.max_iter, cfg.seed = int(cfg.dim), int(cfg.max_iter), int(cfg.seed)
        cfg.trials, cfg.steps, cfg.snapshots = int(cfg.trials), int(cfg.steps), int(cfg.snapshots)
        cfg.mu, cfg.tol = float(cfg.mu), float(cfg.tol)
        cfg.p = None if cfg.p is None else float(cfg.p)
        cfg.mus = [float(m) for m in cfg.mus]
    except (TypeError, ValueError) as exc:
        raise ConfigError("config", f"bad value: {exc}") from None
    return cfg.validate(), args.verbose


# -- pipelines ---------------------------------------------------------------------


def _solve(cfg: RunConfig):
    mode = ModeSpec.from_label(cfg.mode, cfg.dim)
    prof = ground_state(cfg.dim, cfg.p)
    K = auto_radius(prof, cfg.mu) if cfg.radius == "auto" else cfg.radius
    guess = initial_guess(prof, mode, cfg.mu, K)
    return solve_breather(guess, mode, cfg.p, tol=cfg.tol, max_iter=cfg.max_iter)


def _failure(out: Path, stem: str, exc: Exception, **extra) -> dict:
    info = {"partial": True, "error": str(exc), "trace": getattr(exc, "trace", []), **extra}
    io.write_json(out / f"{stem}_failure.json", info)
    return info


def run_ground_state(cfg: RunConfig, out: Path) -> tuple[int, dict]:
    prof = ground_state(cfg.dim, cfg.p)
    H, N = continuum_functionals(prof)
    io.export_profile(prof, out, mass=N)
    return 0, {"lambda_c": prof.lambda_c, "amplitude": prof.amplitude, "mass": N, "energy": H}


def run_breather(cfg: RunConfig, out: Path) -> tuple[int, dict]:
    try:
        res = _solve(cfg)
    except SolverError as exc:
        return 1, _failure(out, "breather", exc)
    res.coercivity_margin = coercivity_check(res)
    io.export_result(res, out)
    return 0, res.summary()


def run_convergence(cfg: RunConfig, out: Path) -> tuple[int, dict]:
    mode = ModeSpec.from_label(cfg.mode, cfg.dim)
    report = convergence_study(mode, cfg.p, cfg.mus, tol=cfg.tol, max_iter=cfg.max_iter)
    io.export_report(report, out)
    return (1 if report.partial else 0), report.summary()


def run_fem_check(cfg: RunConfig, out: Path) -> tuple[int, dict]:
    rng = np.random.default_rng(cfg.seed)
    K = FEM_RADIUS if cfg.radius == "auto" else cfg.radius
    mode = ModeSpec.from_label(cfg.mode, cfg.dim)
    reports = []
    for _ in range(cfg.trials):
        f = random_field(rng, cfg.dim, cfg.mu, K)
        F = FemFunction.from_mode(f, mode)
        reports.append(io.identity_report("gradient", gradient_energy(F), quadrature_gradient_energy(F)))
        reports.append(io.identity_report("mass", *l2_mass_identity_check(F)))
    worst = max(r["rel_err"] for r in reports)
    summary = {"trials": cfg.trials, "checks": len(reports), "max_rel_err": worst,
               "failures": sum(r["rel_err"] > FEM_RTOL for r in reports), "rtol": FEM_RTOL}
    io.write_json(out / "fem_check.json", {"summary": summary, "reports": reports})
    return (0 if summary["failures"] == 0 else 1), summary


def run_evolve(cfg: RunConfig, out: Path) -> tuple[int, dict]:
    try:
        res = _solve(cfg)
    except SolverError as exc:
        return 1, _failure(out, "evolve", exc)
    io.export_result(res, out)
    T = 2 * np.pi / abs(res.lam)
    dt = T / cfg.steps
    s0 = ComplexLatticeState.from_field(res.field)
    if cfg.snapshots:
        end, shots = evolve(s0, cfg.p, T, dt, snapshots=cfg.snapshots)
    else:
        end, shots = evolve(s0, cfg.p, T, dt), []
    dN, dH = conserved_drift(s0, end, cfg.p)
    defect = float(np.max(np.abs(end.values - np.exp(-1j * res.lam * T) * s0.values)))
    summary = {"T": T, "dt": dt, "dN": dN, "dH": dH, "return_defect": defect}
    io.export_trajectory(shots, summary, out)
    return 0, summary


PIPELINES = {
    "ground-state": run_ground_state,
    "breather": run_breather,
    "convergence": run_convergence,
    "fem-check": run_fem_check,
    "evolve": run_evolve,
}


def _versions() -> dict:
    try:
        pkg = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        pkg = "unknown"
    return {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__,
            "dnls_breathers": pkg}


def run(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    status, result = PIPELINES[cfg.command](cfg, out)
    manifest = {"config": asdict(cfg), "versions": _versions(), "status": status,
                "partial": status != 0, "result": result,
                "wall_time": time.perf_counter() - start}
    io.write_json(out / "manifest.json", manifest)
    print(json.dumps(io._clean({"command": cfg.command, "status": status, **result})))
    return status


def main(argv=None) -> int:
    try:
        cfg, verbose = load_config(argv)
    except ConfigError as exc:
        _fail(exc.key, str(exc))
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
