"""Explicit finite-volume solver for dv/dt = kappa * Laplacian(v^p), radial.

Cell i exchanges flux with its neighbours through the faces at
``r = i h`` and ``r = (i+1) h``; both ends (r = 0 and r = r_max) are
zero-flux, so the midpoint-rule mass is conserved up to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .core import DensityField
from .functionals import FunctionalReport, evaluate, is_shannon

#: Lower bound on dt relative to h^2 before the run is declared stalled.
DT_UNDERFLOW = 1e-12


class SolverError(RuntimeError):
    """The scheme failed (negative cells, step-size underflow, step budget)."""


@dataclass(frozen=True)
class SolverConfig:
    snapshot_times: tuple[float, ...]
    kappa: float = 1.0
    cfl_safety: float = 0.9
    floor: float = 1e-12
    t0: float = 0.0
    max_steps: int = 50_000_000

    def __post_init__(self):
        times = tuple(float(t) for t in self.snapshot_times)
        object.__setattr__(self, "snapshot_times", times)
        if not times:
            raise ValueError("snapshot_times must be nonempty")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("snapshot_times must be strictly increasing")
        if times[0] < self.t0 or times[0] <= 0:
            raise ValueError("snapshot times must be positive and not precede t0")
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if not self.floor > 0:
            raise ValueError("floor must be positive")


@dataclass(frozen=True)
class Trajectory:
    p: float
    kappa: float
    times: tuple[float, ...]
    fields: tuple[DensityField, ...] = field(repr=False)
    reports: tuple[FunctionalReport, ...] = field(repr=False)
    steps: int = 0

    @property
    def n(self) -> int:
        return self.fields[0].n

    @property
    def grid(self):
        return self.fields[0].grid

    def series(self, name: str) -> np.ndarray:
        """One diagnostic (a FunctionalReport attribute) as an array over snapshots."""
        return np.array([getattr(rep, name) for rep in self.reports])

    def __len__(self):
        return len(self.times)


# power-law fast paths for the kernel
_POW_IDENTITY, _POW_SQUARE, _POW_THREE_HALVES, _POW_THREE_QUARTERS, _POW_GENERAL = range(5)

_OK, _NEGATIVE, _UNDERFLOW, _TOO_MANY = range(4)


def _power_kind(p: float) -> int:
    if is_shannon(p):
        return _POW_IDENTITY
    return {2.0: _POW_SQUARE, 1.5: _POW_THREE_HALVES, 0.75: _POW_THREE_QUARTERS}.get(p, _POW_GENERAL)


@numba.njit(cache=True)
def _powers(v, w, kind, p, floor, slope):
    """w = v^p, continued linearly (w = slope * v) below the floor when slope > 0."""
    m = v.size
    if kind == 0:
        for i in range(m):
            w[i] = max(v[i], 0.0)
    elif kind == 1:
        for i in range(m):
            x = max(v[i], 0.0)
            w[i] = x * x
    elif kind == 2:
        for i in range(m):
            x = max(v[i], 0.0)
            w[i] = x * np.sqrt(x)
    elif kind == 3:
        for i in range(m):
            x = max(v[i], 0.0)
            w[i] = np.sqrt(x * np.sqrt(x))
    else:
        for i in range(m):
            w[i] = max(v[i], 0.0) ** p
    if slope > 0.0:
        for i in range(m):
            if v[i] < floor:
                w[i] = slope * max(v[i], 0.0)


@numba.njit(cache=True)
def _advance(v, w, t, target, kind, p, coef_out, coef_in, dt_scale, expo,
             floor, slope, dt_min, neg_limit, steps, max_steps):
    """Explicit Euler steps until ``t == target``; returns (t, steps, status, info).

    ``coef_out[i]`` multiplies w[i+1] - w[i] (zero in the last cell) and
    ``coef_in[i]`` multiplies w[i] - w[i-1] (zero in the first cell).
    """
    m = v.size
    vmax = floor
    vmin = np.inf
    for i in range(m):
        vmax = max(vmax, v[i])
        if v[i] > floor:
            vmin = min(vmin, v[i])
    while t < target:
        if expo == 0.0:
            dt = dt_scale
        else:
            if expo > 0.0:
                mob = vmax**expo
            else:
                mob = (vmin if vmin < np.inf else floor) ** expo
            dt = dt_scale / (p * mob)
            if dt < dt_min:
                return t, steps, _UNDERFLOW, dt
        if t + dt >= target:
            dt = target - t
            t_next = target
        else:
            t_next = t + dt
        _powers(v, w, kind, p, floor, slope)
        vmax = floor
        vmin = np.inf
        lowest = np.inf
        prev = 0.0
        for i in range(m - 1):
            dw = w[i + 1] - w[i]
            x = v[i] + dt * (coef_out[i] * dw - coef_in[i] * prev)
            prev = dw
            v[i] = x
            vmax = max(vmax, x)
            lowest = min(lowest, x)
            if x > floor:
                vmin = min(vmin, x)
        x = v[m - 1] - dt * coef_in[m - 1] * prev
        v[m - 1] = x
        vmax = max(vmax, x)
        lowest = min(lowest, x)
        if x > floor:
            vmin = min(vmin, x)
        t = t_next
        steps += 1
        if lowest < neg_limit:
            return t, steps, _NEGATIVE, lowest
        if steps > max_steps:
            return t, steps, _TOO_MANY, 0.0
    return t, steps, _OK, 0.0


def evolve(f0: DensityField, p: float, config: SolverConfig) -> Trajectory:
    """Advance f0 (taken at time ``config.t0``) to every snapshot time."""
    n = f0.n
    if not p > (n - 2) / n:
        raise ValueError(f"need p > (n-2)/n = {(n - 2) / n:g}, got {p}")
    if abs(f0.mass - 1.0) > 1e-6:
        raise ValueError(f"initial datum must have unit mass, got {f0.mass:.10f}")
    grid = f0.grid
    h, kappa, floor = grid.h, config.kappa, config.floor
    r_face = np.arange(1, grid.cells) * h
    r_cell = grid.r
    # per-cell coefficients of the flux difference through the outer / inner face
    coef_out = np.zeros(grid.cells)
    coef_in = np.zeros(grid.cells)
    coef_out[:-1] = kappa * r_face ** (n - 1) / (r_cell[:-1] ** (n - 1) * h * h)
    coef_in[1:] = kappa * r_face ** (n - 1) / (r_cell[1:] ** (n - 1) * h * h)
    dt_scale = config.cfl_safety * h * h / (2.0 * n * kappa)
    pm1 = 1.0 if is_shannon(p) else float(p)
    kind = _power_kind(p)
    # fast diffusion: below the floor the diffusivity is frozen at floor^(p-1)
    slope = floor ** (pm1 - 1.0) if pm1 < 1.0 else 0.0

    v = f0.values.copy()
    w = np.empty_like(v)
    t = float(config.t0)
    steps = 0
    times, fields = [], []
    for target in config.snapshot_times:
        t, steps, status, info = _advance(
            v, w, t, target, kind, pm1, coef_out, coef_in, dt_scale, pm1 - 1.0,
            floor, slope, DT_UNDERFLOW * h * h, -10.0 * floor, steps, config.max_steps)
        if status == _NEGATIVE:
            raise SolverError(f"negative density {info:.3e} at t={t:.6g}")
        if status == _UNDERFLOW:
            raise SolverError(f"time step {info:.3e} underflows {DT_UNDERFLOW:g} h^2 at t={t:.6g}")
        if status == _TOO_MANY:
            raise SolverError(f"exceeded {config.max_steps} steps before t={target}")
        times.append(t)
        fields.append(DensityField(grid, np.maximum(v, 0.0)))
    reports = tuple(evaluate(fld, p) for fld in fields)
    return Trajectory(p=p, kappa=kappa, times=tuple(times), fields=tuple(fields),
                      reports=reports, steps=steps)
