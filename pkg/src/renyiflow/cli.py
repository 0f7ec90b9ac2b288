"""Configuration-driven runner: ``renyiflow solve|verify|constants|sweep``.

A scenario is a flat ``key = value`` text file (``#`` starts a comment);
``--set key=value`` overrides are applied afterwards, later ones winning.
Every run writes into ``--out``:

* ``timeseries.csv`` with columns ``t,mass,E,R_p,N_p,I_p,Lambda_p``;
* ``certificates.json``, a list of objects with fields
  ``check_id, params, lhs, rhs, slack, tol, pass, notes`` (verify only);
* ``manifest.txt`` echoing the resolved configuration.

``constants`` writes ``constants.csv`` (``n,p,printed,corrected,quadrature,
rel_spread,flag``) and ``sobolev.csv`` (``n,S_n,from_gamma,rel_diff``).
``sweep`` expands every ``sweep.<key> = v1, v2, ...`` line into the
cartesian product of scenarios, runs them in worker processes (capped by
the ``RENYIFLOW_SWEEP_WORKERS`` environment variable) and writes one
subdirectory per scenario plus ``sweep.csv``, all sorted by scenario name.

Exit status: 0 all certificates pass, 1 some certificate fails, 2 usage or
configuration error. Floats are written with 17 significant digits.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .barenblatt import (
    barenblatt_mixture, barenblatt_spec, constants_row, existence_threshold, gaussian_profile,
    moment_threshold, self_similar_snapshot, sobolev_consistency, two_shell, uniform_ball,
)
from .core import DensityField, build_radial_grid
from .functionals import is_shannon
from .solver import SolverConfig, SolverError, Trajectory, evolve
from .verify import (
    DEFAULT_TOLERANCES, Certificate, CheckError, check_barenblatt_attraction, check_concavity,
    check_debruijn, check_isoperimetric, check_lambda_monotone, check_moment_law,
    check_power_linearity, check_refinement, check_sobolev, refined_schedule,
)

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
WORKERS_ENV = "RENYIFLOW_SWEEP_WORKERS"

INITIAL_KINDS = ("gaussian", "barenblatt", "uniform-ball", "two-shell")
INITIAL_PARAMS = {
    "gaussian": {"sigma": 1.0},
    "barenblatt": {"time": 1.0, "mix_time": None, "mix_weight": 0.5},
    "uniform-ball": {"radius": 1.0},
    "two-shell": {"r1": 1.0, "r2": 3.0, "width": 0.4, "weight": 0.5},
}
TRAJECTORY_CHECKS = ("debruijn", "moment_law", "lambda_monotone", "concavity",
                     "barenblatt_attraction", "refinement")
DATUM_CHECKS = ("isoperimetric", "sobolev")
PROFILE_CHECKS = ("power_linearity",)
CHECKS = TRAJECTORY_CHECKS + DATUM_CHECKS + PROFILE_CHECKS
#: Checks that need a finite second moment, i.e. p > n/(n+2).
MOMENT_CHECKS = ("moment_law", "lambda_monotone", "isoperimetric", "barenblatt_attraction")

_SCALAR_KEYS = {"name", "n", "p", "kappa", "initial", "r_max", "cells", "times", "t0", "checks",
                "cfl_safety", "floor", "max_steps"}
_CONSTANTS_KEYS = {"n_list", "p_list"}

_TOL_KEY = {"debruijn": "debruijn", "moment_law": "moment_law", "lambda_monotone": "lambda_monotone",
            "concavity": "concavity", "barenblatt_attraction": "attraction"}

TIMESERIES_COLUMNS = ("t", "mass", "E", "R_p", "N_p", "I_p", "Lambda_p")
_REPORT_FIELDS = ("mass", "second_moment", "renyi", "power", "fisher", "lam")


class ConfigError(ValueError):
    pass


# -- number formatting -------------------------------------------------------

def fmt_float(x: float) -> str:
    """17 significant digits; non-finite values as nan / inf / -inf."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _fmt_value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    if isinstance(v, (list, tuple)):
        return ", ".join(_fmt_value(x) for x in v)
    if v is None:
        return "none"
    return str(v)


def to_json(obj: Any, indent: int = 0) -> str:
    """JSON with 17-significant-digit floats; non-finite floats become strings."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        s = fmt_float(obj)
        return s if math.isfinite(obj) else json.dumps(s)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(x, (dict, list, tuple)) for x in obj):
            return "[" + ", ".join(to_json(x) for x in obj) + "]"
        return "[\n" + ",\n".join(inner + to_json(x, indent + 1) for x in obj) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# -- configuration -----------------------------------------------------------

@dataclass
class RawConfig:
    """key -> (value text, origin) where origin is ``file:line`` or ``--set``."""

    entries: dict[str, tuple[str, str]] = field(default_factory=dict)
    source: str = "<config>"

    def get(self, key: str, default: str | None = None) -> tuple[str | None, str]:
        if key in self.entries:
            return self.entries[key]
        return default, self.source

    def copy(self) -> RawConfig:
        return RawConfig(dict(self.entries), self.source)


def parse_config_text(text: str, source: str = "<config>") -> RawConfig:
    raw = RawConfig(source=source)
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        where = f"{source}:{lineno}"
        if "=" not in stripped:
            raise ConfigError(f"{where}: expected 'key = value', got {stripped!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if not key:
            raise ConfigError(f"{where}: empty key")
        if key in raw.entries:
            raise ConfigError(f"{where}: duplicate key {key!r} (first at {raw.entries[key][1]})")
        raw.entries[key] = (value, where)
    return raw


def load_config(path: str | None, overrides: list[str]) -> RawConfig:
    if path is None:
        raw = RawConfig(source="<defaults>")
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
        raw = parse_config_text(text, source=path)
    for i, item in enumerate(overrides, start=1):
        if "=" not in item:
            raise ConfigError(f"--set #{i}: expected key=value, got {item!r}")
        key, value = (part.strip() for part in item.split("=", 1))
        if not key:
            raise ConfigError(f"--set #{i}: empty key")
        raw.entries[key] = (value, f"--set #{i}")
    return raw


def parse_number(text: str) -> float:
    """A float, also accepting exact fractions such as ``2/3``."""
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        return float(text)


def _number(raw: RawConfig, key: str, default: float | None = None, *, integer: bool = False):
    text, where = raw.get(key)
    if text is None:
        if default is None:
            raise ConfigError(f"{where}: missing required key {key!r}")
        return default
    try:
        value = parse_number(text)
    except ValueError:
        raise ConfigError(f"{where}: {key} must be a number, got {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{where}: {key} must be finite, got {text!r}")
    if integer:
        if value != int(value):
            raise ConfigError(f"{where}: {key} must be an integer, got {text!r}")
        return int(value)
    return value


def _positive(raw: RawConfig, key: str, default=None, *, integer: bool = False):
    value = _number(raw, key, default, integer=integer)
    if not value > 0:
        raise ConfigError(f"{raw.get(key)[1]}: {key} must be positive, got {value}")
    return value


def parse_times(text: str, where: str) -> tuple[float, ...]:
    """``a, b, c`` or ``start:stop:count`` (count evenly spaced points)."""
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            start, stop = parse_number(parts[0]), parse_number(parts[1])
            count = int(parts[2])
            if count < 1:
                raise ValueError
            times = tuple(float(t) for t in np.linspace(start, stop, count))
        else:
            times = tuple(parse_number(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"{where}: times must be 'a, b, ...' or 'start:stop:count', got {text!r}") from None
    if not times:
        raise ConfigError(f"{where}: times is empty")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ConfigError(f"{where}: times must be strictly increasing")
    return times


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    n: int
    p: float
    kappa: float
    initial: str
    initial_params: dict[str, Any]
    r_max: float
    cells: int
    times: tuple[float, ...]
    t0: float
    checks: tuple[str, ...]
    tolerances: dict[str, float]
    cfl_safety: float = 0.9
    floor: float = 1e-12
    max_steps: int = 50_000_000

    def solver_config(self, times=None) -> SolverConfig:
        return SolverConfig(tuple(times or self.times), kappa=self.kappa, cfl_safety=self.cfl_safety,
                            floor=self.floor, t0=self.t0, max_steps=self.max_steps)

    def manifest(self) -> dict[str, Any]:
        out = {"name": self.name, "n": self.n, "p": self.p, "kappa": self.kappa,
               "initial": self.initial}
        for k, v in self.initial_params.items():
            out[f"initial.{k}"] = v
        out.update(r_max=self.r_max, cells=self.cells, times=list(self.times), t0=self.t0,
                   checks=list(self.checks), cfl_safety=self.cfl_safety, floor=self.floor,
                   max_steps=self.max_steps)
        for k, v in self.tolerances.items():
            out[f"tol.{k}"] = v
        return out


def resolve_scenario(raw: RawConfig, allow_sweep: bool = False) -> ScenarioConfig:
    """Validate a raw configuration against the preconditions of every operation it invokes."""
    for key, (_, where) in raw.entries.items():
        head = key.split(".", 1)[0]
        if key in _SCALAR_KEYS or head in ("initial", "tol") or (allow_sweep and head == "sweep"):
            continue
        raise ConfigError(f"{where}: unknown key {key!r}")

    name_text, _ = raw.get("name")
    name = name_text or Path(raw.source).stem or "scenario"
    n = _positive(raw, "n", 1, integer=True)
    p = _positive(raw, "p")
    p_where = raw.get("p")[1]
    if not p > existence_threshold(n):
        raise ConfigError(f"{p_where}: p = {p:g} must exceed (n-2)/n = {existence_threshold(n):g}")
    kappa = _positive(raw, "kappa", 1.0)

    initial, where = raw.get("initial", "gaussian")
    if initial not in INITIAL_KINDS:
        raise ConfigError(f"{where}: initial must be one of {', '.join(INITIAL_KINDS)}, got {initial!r}")
    params = dict(INITIAL_PARAMS[initial])
    for key, (text, kwhere) in raw.entries.items():
        if key.startswith("initial."):
            sub = key.split(".", 1)[1]
            if sub not in params:
                raise ConfigError(f"{kwhere}: initial '{initial}' has no parameter {sub!r}")
            params[sub] = _number(raw, key)
    if initial == "barenblatt" and is_shannon(p):
        raise ConfigError(f"{where}: the barenblatt datum needs p != 1 (use gaussian)")

    r_max = _positive(raw, "r_max")
    cells = _positive(raw, "cells", 4000, integer=True)
    times_text, twhere = raw.get("times")
    if times_text is None:
        raise ConfigError(f"{twhere}: missing required key 'times'")
    times = parse_times(times_text, twhere)
    t0_default = params["time"] if initial == "barenblatt" else 0.0
    t0 = _number(raw, "t0", t0_default)
    if t0 < 0 or times[0] < t0 or times[0] <= 0:
        raise ConfigError(f"{twhere}: snapshot times must be positive and not precede t0 = {t0:g}")

    checks_text, cwhere = raw.get("checks", "")
    checks = tuple(c.strip() for c in checks_text.split(",") if c.strip())
    for c in checks:
        if c not in CHECKS:
            raise ConfigError(f"{cwhere}: unknown check {c!r}; known: {', '.join(CHECKS)}")
    moment_users = [c for c in checks if c in MOMENT_CHECKS]
    if moment_users and not p > moment_threshold(n):
        raise ConfigError(f"{cwhere}: {', '.join(moment_users)} need p > n/(n+2) = "
                          f"{moment_threshold(n):g}, got p = {p:g}")
    if "sobolev" in checks and n <= 2:
        raise ConfigError(f"{cwhere}: sobolev needs n > 2, got n = {n}")
    if "power_linearity" in checks and is_shannon(p):
        raise ConfigError(f"{cwhere}: power_linearity needs p != 1")

    tolerances = dict(DEFAULT_TOLERANCES)
    for key, (_, kwhere) in raw.entries.items():
        if key.startswith("tol."):
            sub = key.split(".", 1)[1]
            if sub not in DEFAULT_TOLERANCES:
                raise ConfigError(f"{kwhere}: unknown tolerance {sub!r}")
            tolerances[sub] = _positive(raw, key)

    cfl = _positive(raw, "cfl_safety", 0.9)
    if cfl > 1:
        raise ConfigError(f"{raw.get('cfl_safety')[1]}: cfl_safety must lie in (0, 1]")
    return ScenarioConfig(
        name=name, n=n, p=p, kappa=kappa, initial=initial, initial_params=params,
        r_max=r_max, cells=cells, times=times, t0=t0, checks=checks, tolerances=tolerances,
        cfl_safety=cfl, floor=_positive(raw, "floor", 1e-12),
        max_steps=_positive(raw, "max_steps", 50_000_000, integer=True),
    )


# -- running -----------------------------------------------------------------

def build_initial(cfg: ScenarioConfig, cells: int | None = None) -> DensityField:
    grid = build_radial_grid(cfg.n, cfg.r_max, cells or cfg.cells)
    prm = cfg.initial_params
    if cfg.initial == "gaussian":
        return gaussian_profile(cfg.n, prm["sigma"], grid)
    if cfg.initial == "uniform-ball":
        return uniform_ball(grid, prm["radius"])
    if cfg.initial == "two-shell":
        return two_shell(grid, prm["r1"], prm["r2"], prm["width"], prm["weight"])
    spec = barenblatt_spec(cfg.n, cfg.p)
    if prm["mix_time"] is None:
        return self_similar_snapshot(spec, prm["time"], grid)
    return barenblatt_mixture(spec, prm["time"], prm["mix_time"], grid, prm["mix_weight"])


def _aborted(check_id: str, cfg: ScenarioConfig, tol: float, reason: str) -> Certificate:
    params = {"n": cfg.n, "p": cfg.p, "kappa": cfg.kappa, "r_max": cfg.r_max, "cells": cfg.cells,
              "times": list(cfg.times)}
    return Certificate(check_id, params, math.nan, math.nan, math.nan, tol, False,
                       f"solver aborted: {reason}")


def _trajectory_certificates(check: str, cfg: ScenarioConfig, traj: Trajectory) -> list[Certificate]:
    tol = cfg.tolerances
    if check == "debruijn":
        return [check_debruijn(traj, tol["debruijn"])]
    if check == "moment_law":
        return [check_moment_law(traj, tol["moment_law"])]
    if check == "lambda_monotone":
        return [check_lambda_monotone(traj, tol["lambda_monotone"], tol["lambda_static"])]
    if check == "concavity":
        return [check_concavity(traj, tol["concavity"])]
    if check == "barenblatt_attraction":
        return [check_barenblatt_attraction(traj, tol["attraction"], tol["attraction_bound"])]
    raise AssertionError(check)


def run_checks(cfg: ScenarioConfig, f0: DensityField, traj: Trajectory | None,
               abort_reason: str | None) -> list[Certificate]:
    certs: list[Certificate] = []
    fine = None
    for check in cfg.checks:
        if check == "isoperimetric":
            certs.append(check_isoperimetric(f0, cfg.p, cfg.tolerances["isoperimetric"]))
        elif check == "sobolev":
            certs.append(check_sobolev(f0, cfg.tolerances["sobolev"]))
        elif check == "power_linearity":
            certs.append(check_power_linearity(barenblatt_spec(cfg.n, cfg.p), cfg.times, f0.grid,
                                               cfg.tolerances["power_linearity"]))
        elif traj is None:
            ids = ["refinement_debruijn", "refinement_moment_law"] if check == "refinement" else [check]
            tol = cfg.tolerances[_TOL_KEY[check]] if check in _TOL_KEY else 0.0
            certs.extend(_aborted(i, cfg, tol, abort_reason) for i in ids)
        elif check == "refinement":
            if fine is None:
                try:
                    fine = evolve(build_initial(cfg, 2 * cfg.cells), cfg.p,
                                  cfg.solver_config(refined_schedule(cfg.times)))
                except SolverError as exc:
                    certs.extend(_aborted(i, cfg, 0.0, f"refined run: {exc}")
                                 for i in ("refinement_debruijn", "refinement_moment_law"))
                    continue
            certs.append(check_refinement(traj, fine, "debruijn"))
            certs.append(check_refinement(traj, fine, "moment_law"))
        else:
            certs.extend(_trajectory_certificates(check, cfg, traj))
    return certs


def write_timeseries(path: Path, traj: Trajectory) -> None:
    lines = [",".join(TIMESERIES_COLUMNS)]
    for t, rep in zip(traj.times, traj.reports):
        lines.append(",".join([fmt_float(t)] + [fmt_float(getattr(rep, k)) for k in _REPORT_FIELDS]))
    path.write_text("\n".join(lines) + "\n")


def write_manifest(path: Path, command: str, values: dict[str, Any], extra: dict[str, Any] | None = None) -> None:
    body = {"command": command, "version": __version__, **values, **(extra or {})}
    path.write_text("".join(f"{k} = {_fmt_value(v)}\n" for k, v in body.items()))


def write_certificates(path: Path, certs: list[Certificate]) -> None:
    path.write_text(to_json([c.as_dict() for c in certs]) + "\n")


def run_scenario(cfg: ScenarioConfig, out: Path, command: str = "verify") -> int:
    """Solve, optionally check, and write the report files; returns the exit status."""
    out.mkdir(parents=True, exist_ok=True)
    try:
        f0 = build_initial(cfg)
    except ValueError as exc:
        raise ConfigError(f"{cfg.name}: cannot build initial datum: {exc}") from None
    traj, abort_reason = None, None
    try:
        traj = evolve(f0, cfg.p, cfg.solver_config())
    except SolverError as exc:
        abort_reason = str(exc)
    except ValueError as exc:
        raise ConfigError(f"{cfg.name}: {exc}") from None
    if traj is not None:
        write_timeseries(out / "timeseries.csv", traj)
    extra = {"steps": traj.steps if traj else "aborted"}
    if command == "solve":
        write_manifest(out / "manifest.txt", command, cfg.manifest(), extra)
        if abort_reason:
            print(f"{cfg.name}: solver aborted: {abort_reason}", file=sys.stderr)
            return EXIT_FAIL
        return EXIT_PASS
    try:
        certs = run_checks(cfg, f0, traj, abort_reason)
    except (CheckError, ValueError) as exc:
        raise ConfigError(f"{cfg.name}: {exc}") from None
    write_certificates(out / "certificates.json", certs)
    n_pass = sum(c.passed for c in certs)
    extra.update(certificates=len(certs), passed=n_pass)
    write_manifest(out / "manifest.txt", command, cfg.manifest(), extra)
    for c in certs:
        print(f"{cfg.name}: {'PASS' if c.passed else 'FAIL'} {c.check_id} "
              f"lhs={c.lhs:.6g} rhs={c.rhs:.6g} slack={c.slack:.3e} tol={c.tol:g}")
    return EXIT_PASS if n_pass == len(certs) else EXIT_FAIL


# -- constants table ---------------------------------------------------------

DEFAULT_N_LIST = "1, 2, 3, 4"
DEFAULT_P_LIST = "1/2, 2/3, 3/4, 1, 3/2, 2, 3"


def _number_list(raw: RawConfig, key: str, default: str, integer: bool = False) -> list:
    text, where = raw.get(key, default)
    try:
        vals = [parse_number(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"{where}: {key} must be a comma-separated list of numbers") from None
    if integer:
        if any(v != int(v) or v < 1 for v in vals):
            raise ConfigError(f"{where}: {key} must hold positive integers")
        vals = [int(v) for v in vals]
    if not vals:
        raise ConfigError(f"{where}: {key} is empty")
    return vals


def run_constants(raw: RawConfig, out: Path) -> int:
    for key, (_, where) in raw.entries.items():
        if key not in _CONSTANTS_KEYS:
            raise ConfigError(f"{where}: unknown key {key!r} for constants")
    n_list = _number_list(raw, "n_list", DEFAULT_N_LIST, integer=True)
    p_list = _number_list(raw, "p_list", DEFAULT_P_LIST)
    pairs = [(n, p) for n in n_list for p in p_list if p > moment_threshold(n)]
    if not pairs:
        raise ConfigError(f"{raw.source}: no admissible (n, p) pair with p > n/(n+2)")
    out.mkdir(parents=True, exist_ok=True)
    lines = ["n,p,printed,corrected,quadrature,rel_spread,flag"]
    status = EXIT_PASS
    for n, p in pairs:
        row = constants_row(n, p)
        if row.flag == "quadrature-mismatch":
            status = EXIT_FAIL
        lines.append(",".join([str(n), fmt_float(p), fmt_float(row.printed), fmt_float(row.corrected),
                               fmt_float(row.quadrature), fmt_float(row.rel_spread), row.flag]))
        print(f"gamma n={n} p={p:.6g}: printed {row.printed:.6f} corrected {row.corrected:.6f} "
              f"quadrature {row.quadrature:.6f} [{row.flag}]")
    (out / "constants.csv").write_text("\n".join(lines) + "\n")
    sob = ["n,S_n,from_gamma,rel_diff"]
    for n in sorted({n for n in n_list if n > 2}):
        direct, via, diff = sobolev_consistency(n)
        sob.append(",".join([str(n), fmt_float(direct), fmt_float(via), fmt_float(diff)]))
        print(f"sobolev n={n}: {direct:.6f}")
    (out / "sobolev.csv").write_text("\n".join(sob) + "\n")
    write_manifest(out / "manifest.txt", "constants",
                   {"n_list": n_list, "p_list": p_list, "rows": len(pairs)})
    return status


# -- sweep -------------------------------------------------------------------

def expand_sweep(raw: RawConfig) -> list[ScenarioConfig]:
    """Cartesian product over every ``sweep.<key>`` list, sorted by scenario name."""
    axes = []
    for key, (text, where) in raw.entries.items():
        if key.startswith("sweep."):
            values = [v.strip() for v in text.split(",") if v.strip()]
            if not values:
                raise ConfigError(f"{where}: {key} has no values")
            axes.append((key.split(".", 1)[1], values, where))
    if not axes:
        raise ConfigError(f"{raw.source}: sweep needs at least one 'sweep.<key> = v1, v2' line")
    base = raw.copy()
    for key in [k for k in base.entries if k.startswith("sweep.")]:
        del base.entries[key]
    base_name = base.get("name")[0] or Path(raw.source).stem or "sweep"
    scenarios = []
    for combo in itertools.product(*(vals for _, vals, _ in axes)):
        scenario = base.copy()
        label = [base_name]
        for (key, _, where), value in zip(axes, combo):
            scenario.entries[key] = (value, where)
            label.append(f"{key}={value}".replace("/", "_"))
        scenario.entries["name"] = ("__".join(label), raw.source)
        scenarios.append(resolve_scenario(scenario))
    names = [s.name for s in scenarios]
    if len(set(names)) != len(names):
        raise ConfigError(f"{raw.source}: sweep produces duplicate scenario names")
    return sorted(scenarios, key=lambda s: s.name)


def _sweep_worker(args) -> tuple[str, int, str]:
    cfg, out = args
    try:
        return cfg.name, run_scenario(cfg, Path(out) / cfg.name), ""
    except ConfigError as exc:
        return cfg.name, EXIT_CONFIG, str(exc)


def sweep_workers(count: int) -> int:
    cap = os.environ.get(WORKERS_ENV)
    workers = min(count, os.cpu_count() or 1)
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {cap!r}") from None
    return max(1, workers)


def run_sweep(raw: RawConfig, out: Path) -> int:
    scenarios = expand_sweep(raw)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(cfg, str(out)) for cfg in scenarios]
    workers = sweep_workers(len(jobs))
    if workers == 1:
        results = [_sweep_worker(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    lines = ["name,exit_status,error"]
    for name, status, error in sorted(results):
        lines.append(f"{name},{status},{json.dumps(error) if error else ''}")
        if error:
            print(f"{name}: {error}", file=sys.stderr)
    (out / "sweep.csv").write_text("\n".join(lines) + "\n")
    statuses = [status for _, status, _ in results]
    if EXIT_CONFIG in statuses:
        return EXIT_CONFIG
    return EXIT_FAIL if EXIT_FAIL in statuses else EXIT_PASS


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="renyiflow",
        description="Evolve radial densities under nonlinear diffusion and certify entropy identities.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "solve": "run the solver and write the time series",
        "verify": "run the solver and the requested checks",
        "constants": "tabulate gamma_{n,p} and S_n",
        "sweep": "verify the cartesian product of scenarios in parallel",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=name != "constants", help="flat key = value file")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override a configuration key (repeatable, later wins)")
        p.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_PASS
    out = Path(args.out)
    try:
        raw = load_config(args.config, args.overrides)
        if args.command == "constants":
            return run_constants(raw, out)
        if args.command == "sweep":
            return run_sweep(raw, out)
        return run_scenario(resolve_scenario(raw), out, command=args.command)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
