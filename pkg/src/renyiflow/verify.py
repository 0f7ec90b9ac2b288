"""Certificates for the identities and inequalities along nonlinear diffusion.

Slack orientation is uniform: ``slack = lhs - rhs`` for ">=" claims and
``rhs - lhs`` for "<=" claims, and a certificate passes when
``slack >= -tol * scale``. Checks that reduce to a single relative error
report it as ``lhs`` with ``rhs = 0`` and ``scale = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import numpy as np

from .barenblatt import (
    BarenblattSpec, barenblatt_profile, gamma_constant, gaussian_profile, moment_threshold,
    reference_grid, self_similar_snapshot, sobolev_constant,
)
from .core import DensityField, RadialGrid, build_radial_grid, dilate, integrate_power, l1_distance, radial_gradient, second_moment
from .functionals import entropy_power, fisher_information, is_shannon, lambda_invariant
from .solver import Trajectory

DEFAULT_TOLERANCES = {
    "debruijn": 2e-2,
    "moment_law": 2e-2,
    "lambda_monotone": 1e-6,
    "lambda_static": 1e-3,
    "concavity": 1e-3,
    "isoperimetric": 1e-3,
    "power_linearity": 1e-3,
    "sobolev": 5e-3,
    "attraction": 1e-4,
    "attraction_bound": 1e-3,
}

#: Required reduction of the worst mismatch when h and the snapshot spacing halve.
REFINEMENT_FACTOR = 2.0
#: Mismatches at or below this level are roundoff, not discretization error.
REFINEMENT_FLOOR = 1e-8


class CheckError(ValueError):
    """The inputs do not meet a check's preconditions."""


@dataclass(frozen=True)
class Certificate:
    check_id: str
    params: dict[str, Any]
    lhs: float
    rhs: float
    slack: float
    tol: float
    passed: bool
    notes: str = ""
    scale: float = field(default=1.0, repr=False)

    def as_dict(self) -> dict[str, Any]:
        return {
            "check_id": self.check_id,
            "params": self.params,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "tol": self.tol,
            "pass": self.passed,
            "notes": self.notes,
        }


def _certify(check_id, params, lhs, rhs, relation, tol, scale=1.0, extra_ok=True, notes=""):
    slack = lhs - rhs if relation == ">=" else rhs - lhs
    passed = bool(slack >= -tol * scale) and bool(extra_ok)
    return Certificate(check_id, params, float(lhs), float(rhs), float(slack), float(tol),
                       passed, notes, float(scale))


def _traj_params(traj: Trajectory) -> dict[str, Any]:
    g = traj.grid
    return {"n": g.n, "p": traj.p, "kappa": traj.kappa, "r_max": g.r_max,
            "cells": g.cells, "times": list(traj.times)}


def _need_snapshots(traj: Trajectory, k: int, check_id: str) -> None:
    if len(traj) < k:
        raise CheckError(f"{check_id} needs at least {k} snapshots, got {len(traj)}")


def _centered(times: np.ndarray, values: np.ndarray) -> np.ndarray:
    """d/dt at interior snapshots from the two neighbours (any spacing)."""
    return (values[2:] - values[:-2]) / (times[2:] - times[:-2])


def _relative_mismatch(estimate: np.ndarray, reference: np.ndarray) -> np.ndarray:
    return np.abs(estimate - reference) / np.abs(reference)


def debruijn_mismatch(traj: Trajectory) -> np.ndarray:
    """|dR_p/dt - kappa I_p| / (kappa I_p) at each interior snapshot."""
    t = np.array(traj.times)
    rate = _centered(t, traj.series("renyi"))
    return _relative_mismatch(rate, traj.kappa * traj.series("fisher")[1:-1])


def moment_law_mismatch(traj: Trajectory) -> np.ndarray:
    """|dE/dt - 2 n kappa int v^p| / (2 n kappa int v^p) at each interior snapshot."""
    t = np.array(traj.times)
    rate = _centered(t, traj.series("second_moment"))
    law = 2.0 * traj.n * traj.kappa * traj.series("power_integral")[1:-1]
    return _relative_mismatch(rate, law)


def check_debruijn(traj: Trajectory, tol: float | None = None) -> Certificate:
    _need_snapshots(traj, 3, "debruijn")
    tol = DEFAULT_TOLERANCES["debruijn"] if tol is None else tol
    mism = debruijn_mismatch(traj)
    worst = int(np.argmax(mism))
    return _certify("debruijn", _traj_params(traj), mism[worst], 0.0, "<=", tol,
                    notes=f"max relative mismatch of dR_p/dt vs kappa*I_p at t={traj.times[worst + 1]:.6g}")


def check_moment_law(traj: Trajectory, tol: float | None = None) -> Certificate:
    _need_snapshots(traj, 3, "moment_law")
    tol = DEFAULT_TOLERANCES["moment_law"] if tol is None else tol
    mism = moment_law_mismatch(traj)
    energy = traj.series("second_moment")
    increasing = bool(np.all(np.diff(energy) > 0))
    worst = int(np.argmax(mism))
    notes = f"max relative mismatch of dE/dt vs 2n*kappa*int v^p at t={traj.times[worst + 1]:.6g}"
    if not increasing:
        notes += "; second moment NOT increasing"
    return _certify("moment_law", _traj_params(traj), mism[worst], 0.0, "<=", tol,
                    extra_ok=increasing, notes=notes)


def mckean_gap(f: DensityField, p: float) -> float:
    """Relative gap (I_p - n^2 int f^p / E) / (n^2 int f^p / E); zero at Barenblatt."""
    n = f.n
    bound = n * n * integrate_power(f, p) / second_moment(f)
    return (fisher_information(f, p) - bound) / bound


def check_lambda_monotone(traj: Trajectory, tol: float | None = None,
                          static_tol: float | None = None) -> Certificate:
    """Lambda_p non-decreasing (absolute tolerance) and the static bound at every snapshot."""
    n, p = traj.n, traj.p
    if not p > moment_threshold(n):
        raise CheckError(f"lambda_monotone needs p > n/(n+2) = {moment_threshold(n):g}")
    _need_snapshots(traj, 2, "lambda_monotone")
    tol = DEFAULT_TOLERANCES["lambda_monotone"] if tol is None else tol
    static_tol = DEFAULT_TOLERANCES["lambda_static"] if static_tol is None else static_tol
    lam = traj.series("lam")
    steps = np.diff(lam)
    gaps = np.array([mckean_gap(fld, p) for fld in traj.fields])
    static_ok = bool(gaps.min() >= -static_tol)
    notes = (f"Lambda from {lam[0]:.10g} to {lam[-1]:.10g}; "
             f"min relative static gap I_p - n^2 int v^p/E: {gaps.min():.3e} (tol {static_tol:g})")
    return _certify("lambda_monotone", _traj_params(traj), steps.min(), 0.0, ">=", tol,
                    extra_ok=static_ok, notes=notes)


def _require_uniform(times: np.ndarray, check_id: str) -> float:
    dts = np.diff(times)
    if np.max(np.abs(dts - dts.mean())) > 1e-9 * max(1.0, abs(dts.mean())):
        raise CheckError(f"{check_id} needs uniformly spaced snapshots")
    return float(dts.mean())


def check_concavity(traj: Trajectory, tol: float | None = None) -> Certificate:
    """Second differences of N_p over the snapshots are at most tol * max|N_p|."""
    n, p = traj.n, traj.p
    if not p > (n - 2) / n:
        raise CheckError(f"concavity needs p > (n-2)/n = {(n - 2) / n:g}")
    _need_snapshots(traj, 4, "concavity")
    tol = DEFAULT_TOLERANCES["concavity"] if tol is None else tol
    _require_uniform(np.array(traj.times), "concavity")
    power = traj.series("power")
    second = power[2:] - 2.0 * power[1:-1] + power[:-2]
    scale = float(np.max(np.abs(power)))
    return _certify("concavity", _traj_params(traj), second.max(), 0.0, "<=", tol, scale=scale,
                    notes=f"second differences in [{second.min():.4e}, {second.max():.4e}], max N_p {scale:.6g}")


def check_isoperimetric(f: DensityField, p: float, tol: float | None = None) -> Certificate:
    """N_p(f) I_p(f) >= gamma_{n,p} (relative tolerance)."""
    n = f.n
    if not p > moment_threshold(n):
        raise CheckError(f"isoperimetric needs p > n/(n+2) = {moment_threshold(n):g}")
    tol = DEFAULT_TOLERANCES["isoperimetric"] if tol is None else tol
    product = entropy_power(f, p) * fisher_information(f, p)
    gam = gamma_constant(n, p)
    note = f"gamma_(n,p) = {gam:.10g}"
    try:
        f2 = dilate(f, 2.0)
        dilated = entropy_power(f2, p) * fisher_information(f2, p)
        note += f"; dilation residual at a=2: {abs(dilated - product) / product:.3e}"
    except ValueError as exc:
        note += f"; dilation residual unavailable ({exc})"
    params = {"n": n, "p": p, "r_max": f.grid.r_max, "cells": f.grid.cells}
    return _certify("isoperimetric", params, product, gam, ">=", tol, scale=gam, notes=note)


def check_power_linearity(spec: BarenblattSpec, times, grid, tol: float | None = None) -> Certificate:
    """N_p along the exact self-similar solution is slope * t with slope = N_p(M~_p).

    lhs is the fitted slope through the origin, rhs the profile's N_p, and
    slack minus the worse of the slope error and the max deviation from the line.
    """
    times = np.array([float(t) for t in times])
    if times.size < 4 or np.any(times <= 0):
        raise CheckError("power_linearity needs at least 4 positive times")
    if np.any(np.diff(times) <= 0):
        raise CheckError("power_linearity needs strictly increasing times")
    tol = DEFAULT_TOLERANCES["power_linearity"] if tol is None else tol
    p = spec.p
    power = np.array([entropy_power(self_similar_snapshot(spec, t, grid), p) for t in times])
    slope = float(np.dot(power, times) / np.dot(times, times))
    profile_power = entropy_power(self_similar_snapshot(spec, 1.0, grid), p)
    deviation = float(np.max(np.abs(power - slope * times) / (slope * times)))
    slope_err = abs(slope - profile_power) / profile_power
    params = {"n": spec.n, "p": p, "r_max": grid.r_max, "cells": grid.cells, "times": list(times)}
    worst = max(deviation, slope_err)
    return Certificate("power_linearity", params, slope, profile_power, -worst, tol,
                       bool(worst <= tol),
                       f"max deviation from line {deviation:.3e}; slope error {slope_err:.3e}")


def sobolev_ratio(g: np.ndarray, grid) -> float:
    """Rayleigh quotient int |grad g|^2 / (int g^(2*))^(2/2*) for radial g."""
    n = grid.n
    crit = 2.0 * n / (n - 2.0)
    dg = radial_gradient(grid, g)
    return grid.integrate(dg * dg) / grid.integrate(g**crit) ** (2.0 / crit)


def check_sobolev(f: DensityField, tol: float | None = None) -> Certificate:
    """Sobolev inequality for g = f^(1/2*) where f is a probability density."""
    n = f.n
    if n <= 2:
        raise CheckError(f"sobolev needs n > 2, got {n}")
    tol = DEFAULT_TOLERANCES["sobolev"] if tol is None else tol
    crit = 2.0 * n / (n - 2.0)
    ratio = sobolev_ratio(f.values ** (1.0 / crit), f.grid)
    s_n = sobolev_constant(n)
    params = {"n": n, "r_max": f.grid.r_max, "cells": f.grid.cells}
    return _certify("sobolev", params, ratio, s_n, ">=", tol, scale=s_n,
                    notes=f"2* = {crit:g}; relative excess {(ratio - s_n) / s_n:.3e}")


def _ratio_exponent(n: int, p: float) -> float:
    return 1.0 + n * (p - 1.0) / 2.0


def _reference_density(n: int, p: float, grid: RadialGrid) -> DensityField:
    if is_shannon(p):
        return gaussian_profile(n, 1.0, grid)
    return barenblatt_profile(n, p, grid)[1]


@lru_cache(maxsize=None)
def reference_invariants(n: int, p: float) -> tuple[float, float]:
    """(Lambda_p, N_p / E^(1 + n(p-1)/2)) of the extremal, both dilation invariant.

    Evaluated on a grid sized for the profile itself (Gaussian at p = 1).
    """
    if not p > moment_threshold(n):
        raise CheckError(f"needs p > n/(n+2) = {moment_threshold(n):g}")
    grid = build_radial_grid(n, 12.0, 4000) if is_shannon(p) else reference_grid(n, p)
    ref = _reference_density(n, p, grid)
    energy = second_moment(ref)
    return lambda_invariant(ref, p), entropy_power(ref, p) / energy ** _ratio_exponent(n, p)


def lambda_excess(traj: Trajectory) -> float:
    """max over snapshots of Lambda_p(v) - Lambda_p(M~_p); nonpositive in exact arithmetic."""
    ref_lam, _ = reference_invariants(traj.n, traj.p)
    return float(np.max(traj.series("lam")) - ref_lam)


def check_barenblatt_attraction(traj: Trajectory, tol: float | None = None,
                                bound_tol: float | None = None) -> Certificate:
    """Moment-normalized distance to the Barenblatt profile is non-increasing.

    Each snapshot is dilated so its second moment equals that of M~_p on the
    trajectory grid. Also checks Lambda_p(v) <= Lambda_p(M~_p) and the
    entropy-power ratio bound.
    """
    n, p = traj.n, traj.p
    if not p > moment_threshold(n):
        raise CheckError(f"attraction needs p > n/(n+2) = {moment_threshold(n):g}")
    _need_snapshots(traj, 3, "barenblatt_attraction")
    tol = DEFAULT_TOLERANCES["attraction"] if tol is None else tol
    bound_tol = DEFAULT_TOLERANCES["attraction_bound"] if bound_tol is None else bound_tol
    try:
        ref = _reference_density(n, p, traj.grid)
    except ValueError as exc:
        raise CheckError(f"extremal does not fit the trajectory grid: {exc}") from None
    ref_energy = second_moment(ref)
    _, ref_ratio = reference_invariants(n, p)
    expo = _ratio_exponent(n, p)
    dists, ratios = [], []
    for fld, rep in zip(traj.fields, traj.reports):
        a = math.sqrt(rep.second_moment / ref_energy)
        dists.append(l1_distance(dilate(fld, a), ref))
        ratios.append(rep.power / rep.second_moment**expo)
    dists = np.array(dists)
    increase = float(np.max(np.diff(dists)))
    lam_excess = lambda_excess(traj)
    ratio_excess = float(np.max(ratios) / ref_ratio - 1.0)
    bounds_ok = lam_excess <= bound_tol and ratio_excess <= bound_tol
    notes = (f"distances {dists[0]:.4e} -> {dists[-1]:.4e}; "
             f"max Lambda_p - Lambda_p(M~) = {lam_excess:.3e}; "
             f"max relative excess of N_p/E^{expo:g} = {ratio_excess:.3e} (tol {bound_tol:g})")
    return _certify("barenblatt_attraction", _traj_params(traj), increase, 0.0, "<=", tol,
                    extra_ok=bounds_ok, notes=notes)


_MISMATCHES = {"debruijn": debruijn_mismatch, "moment_law": moment_law_mismatch}


def refined_schedule(times) -> tuple[float, ...]:
    """The snapshot times with every gap halved (midpoints inserted)."""
    times = [float(t) for t in times]
    out = [times[0]]
    for a, b in zip(times, times[1:]):
        out.extend((0.5 * (a + b), b))
    return tuple(out)


def _common_interior(coarse: Trajectory, fine: Trajectory) -> np.ndarray:
    """Indices into fine's interior mismatch array at coarse's interior times."""
    fine_t = np.array(fine.times[1:-1])
    idx = []
    for t in coarse.times[1:-1]:
        hit = np.flatnonzero(np.isclose(fine_t, t, rtol=1e-12, atol=1e-12))
        if hit.size == 0:
            raise CheckError(f"refined run has no interior snapshot at t={t}")
        idx.append(int(hit[0]))
    return np.array(idx)


def check_refinement(coarse: Trajectory, fine: Trajectory, identity: str,
                     factor: float = REFINEMENT_FACTOR, floor: float = REFINEMENT_FLOOR) -> Certificate:
    """The worst mismatch of ``identity`` shrinks by ``factor`` on the refined run.

    Both runs are compared at the coarse run's interior snapshot times. A
    refined mismatch already at the roundoff ``floor`` counts as converged.
    """
    if identity not in _MISMATCHES:
        raise CheckError(f"unknown identity {identity!r}; choose from {sorted(_MISMATCHES)}")
    if fine.grid.cells <= coarse.grid.cells:
        raise CheckError("refined run must have more cells")
    _need_snapshots(coarse, 3, "refinement")
    measure = _MISMATCHES[identity]
    base = float(np.max(measure(coarse)))
    refined = float(np.max(measure(fine)[_common_interior(coarse, fine)]))
    ratio = base / refined if refined > 0 else math.inf
    at_floor = refined <= floor
    params = {"identity": identity, "n": coarse.n, "p": coarse.p,
              "cells": [coarse.grid.cells, fine.grid.cells]}
    notes = f"worst mismatch {base:.4e} -> {refined:.4e}"
    if at_floor:
        notes += f"; refined mismatch at roundoff floor {floor:g}"
    slack = max(ratio - factor, 0.0) if at_floor else ratio - factor
    return Certificate(f"refinement_{identity}", params, ratio, factor, slack, 0.0,
                       bool(ratio >= factor or at_floor), notes)
