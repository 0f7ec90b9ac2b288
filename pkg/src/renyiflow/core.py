"""Radial grids, midpoint quadrature and elementary density operations.

Every density is radially symmetric and stored by its values at the
cell centres ``r_i = (i + 1/2) h`` of a uniform grid on ``[0, r_max]``.
Volume integrals over R^n reduce to ``omega_n * sum(g(r_i) r_i^(n-1) h)``
with ``omega_n = 2 pi^(n/2) / Gamma(n/2)`` the area of the unit sphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gamma import gamma

MIN_CELLS = 16
#: Mass tolerance every profile generator guarantees.
EPS_MASS = 1e-6


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class RadialGrid:
    n: int
    r_max: float
    cells: int
    h: float = field(init=False)
    omega: float = field(init=False)
    r: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        h = self.r_max / self.cells
        r = (np.arange(self.cells) + 0.5) * h
        omega = 2.0 * math.pi ** (self.n / 2.0) / gamma(self.n / 2.0)
        w = omega * r ** (self.n - 1) * h
        r.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "weights", w)

    def integrate(self, values) -> float:
        """Midpoint rule for the integral over R^n of a radial function."""
        return float(np.dot(self.weights, values))

    def ball_volume(self, radius: float) -> float:
        return self.omega * radius**self.n / self.n


def build_radial_grid(n: int, r_max: float, cells: int) -> RadialGrid:
    if int(n) != n or n < 1:
        raise ValueError(f"dimension must be an integer >= 1, got {n}")
    if not r_max > 0:
        raise ValueError(f"r_max must be positive, got {r_max}")
    if int(cells) != cells or cells < MIN_CELLS:
        raise ValueError(f"need at least {MIN_CELLS} cells, got {cells}")
    return RadialGrid(int(n), float(r_max), int(cells))


@dataclass(frozen=True)
class DensityField:
    """Nonnegative radial density sampled at the cell centres of ``grid``."""

    grid: RadialGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.cells,):
            raise ValueError(f"expected {self.grid.cells} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("density values must be finite")
        if np.any(v < 0):
            raise ValueError(f"density values must be nonnegative (min {v.min():.3e})")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def mass(self) -> float:
        return self.grid.integrate(self.values)

    def normalized(self) -> DensityField:
        return DensityField(self.grid, self.values / self.mass)


def integrate_power(f: DensityField, q: float) -> float:
    """Integral of f^q over R^n."""
    if not q > 0:
        raise ValueError(f"exponent must be positive, got {q}")
    if q == 1:
        return f.mass
    return f.grid.integrate(f.values**q)


def second_moment(f: DensityField) -> float:
    """E(f) = integral of |x|^2 f."""
    return f.grid.integrate(f.grid.r**2 * f.values)


def radial_gradient(grid: RadialGrid, values: np.ndarray) -> np.ndarray:
    """d/dr by central differences, second-order one-sided at both ends."""
    return np.gradient(values, grid.h, edge_order=2)


def dilate(f: DensityField, a: float, tail_budget: float = EPS_MASS) -> DensityField:
    """Mass-preserving dilation f_a(x) = a^n f(a x), resampled on f's grid.

    ``a < 1`` spreads the density; the mass that would land beyond
    ``r_max`` (the mass of f between ``a r_max`` and ``r_max``) must stay
    below ``tail_budget``.
    """
    if not a > 0:
        raise ValueError(f"dilation factor must be positive, got {a}")
    if a == 1:
        return f
    grid = f.grid
    if a < 1:
        lost = grid.integrate(np.where(grid.r > a * grid.r_max, f.values, 0.0))
        if lost > tail_budget:
            raise ValueError(
                f"dilation by {a} pushes mass {lost:.3e} beyond r_max={grid.r_max}"
            )
    # np.interp is monotone piecewise linear: no new extrema, no negatives
    values = a**grid.n * np.interp(a * grid.r, grid.r, f.values, right=0.0)
    return DensityField(grid, values)


def l1_distance(f: DensityField, g: DensityField) -> float:
    if f.grid != g.grid:
        raise GridMismatchError("densities live on different grids")
    return f.grid.integrate(np.abs(f.values - g.values))
