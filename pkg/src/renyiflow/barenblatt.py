"""Reference densities and sharp constants.

Barenblatt profiles ``(C - lam |x|^2)_+^(1/(p-1))`` and their self-similar
evolution, Gaussians, the stress-test densities (uniform ball, two-shell
mixture), the isoperimetric constants gamma_{n,p} and the sharp Sobolev
constant S_n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc

from .core import EPS_MASS, DensityField, RadialGrid, build_radial_grid
from .functionals import entropy_power, fisher_information, is_shannon
from .gamma import gamma

#: Relative truncation allowed for moment-type integrals of algebraic tails.
MOMENT_BUDGET = 1e-4


def existence_threshold(n: int) -> float:
    """Lower end (n-2)/n of the range where mass is conserved."""
    return (n - 2) / n


def moment_threshold(n: int) -> float:
    """p must exceed n/(n+2) for the Barenblatt profile to have a finite second moment."""
    return n / (n + 2)


def _beta(a: float, b: float) -> float:
    return gamma(a) * gamma(b) / gamma(a + b)


@dataclass(frozen=True)
class BarenblattSpec:
    n: int
    p: float
    mu: float
    lam: float
    C: float

    @property
    def support_radius(self) -> float:
        """sqrt(C/lam) for p > 1; infinite for fast diffusion."""
        return math.sqrt(self.C / self.lam) if self.p > 1 else math.inf

    @property
    def core_length(self) -> float:
        return math.sqrt(self.C / abs(self.lam))

    def profile(self, r: np.ndarray) -> np.ndarray:
        if self.p > 1:
            base = np.maximum(self.C - self.lam * r * r, 0.0)
            return base ** (1.0 / (self.p - 1.0))
        return (self.C - self.lam * r * r) ** (1.0 / (self.p - 1.0))

    def at_time(self, t: float, r: np.ndarray) -> np.ndarray:
        """M_p(r, t) = t^(-n/mu) M~(r t^(-1/mu))."""
        s = t ** (-1.0 / self.mu)
        return s**self.n * self.profile(r * s)


def barenblatt_exponents(n: int, p: float) -> tuple[float, float]:
    """(mu, lam) with mu = 2 + n(p-1) and lam = (p-1) / (2 mu p)."""
    mu = 2.0 + n * (p - 1.0)
    return mu, (p - 1.0) / (2.0 * mu * p)


def _check_profile_order(n: int, p: float) -> None:
    if not p > existence_threshold(n):
        raise ValueError(f"Barenblatt profile needs p > (n-2)/n = {existence_threshold(n):g}, got {p}")
    if is_shannon(p):
        raise ValueError("p = 1 has no Barenblatt profile; use the Gaussian")


def _mass_law(n: int, p: float) -> tuple[float, float]:
    """(A, beta) such that the exact mass of the profile is A * C^beta."""
    mu, lam = barenblatt_exponents(n, p)
    omega = 2.0 * math.pi ** (n / 2.0) / gamma(n / 2.0)
    if p > 1:
        k = 1.0 / (p - 1.0)
        return 0.5 * omega * lam ** (-n / 2.0) * _beta(n / 2.0, k + 1.0), k + n / 2.0
    k = 1.0 / (1.0 - p)
    return 0.5 * omega * (-lam) ** (-n / 2.0) * _beta(n / 2.0, k - n / 2.0), n / 2.0 - k


def exact_normalization(n: int, p: float) -> float:
    """C giving unit mass on all of R^n (closed form via the Beta function)."""
    _check_profile_order(n, p)
    A, beta = _mass_law(n, p)
    return A ** (-1.0 / beta)


def barenblatt_spec(n: int, p: float) -> BarenblattSpec:
    _check_profile_order(n, p)
    mu, lam = barenblatt_exponents(n, p)
    return BarenblattSpec(n, p, mu, lam, exact_normalization(n, p))


def _tail_bound(spec: BarenblattSpec, radius: float, q: float, m: float) -> float:
    """Upper bound on the integral of |x|^m f^q outside the ball of given radius.

    Only for p < 1, where f <= |lam|^(-k) r^(-2k), k = 1/(1-p).
    """
    n = spec.n
    k = 1.0 / (1.0 - spec.p)
    decay = 2.0 * q * k - m - n
    if decay <= 0:
        return math.inf
    omega = 2.0 * math.pi ** (n / 2.0) / gamma(n / 2.0)
    return omega * (-spec.lam) ** (-q * k) * radius ** (-decay) / decay


def _tail_radius(spec: BarenblattSpec, q: float, m: float, target: float) -> float:
    n = spec.n
    k = 1.0 / (1.0 - spec.p)
    decay = 2.0 * q * k - m - n
    omega = 2.0 * math.pi ** (n / 2.0) / gamma(n / 2.0)
    return (omega * (-spec.lam) ** (-q * k) / (decay * target)) ** (1.0 / decay)


def _fast_power_integral(spec: BarenblattSpec) -> float:
    """Exact integral of f^p over R^n for p < 1."""
    n, p = spec.n, spec.p
    a = -spec.lam
    pk = p / (1.0 - p)
    omega = 2.0 * math.pi ** (n / 2.0) / gamma(n / 2.0)
    return 0.5 * omega * spec.C ** (n / 2.0 - pk) * a ** (-n / 2.0) * _beta(n / 2.0, pk - n / 2.0)


def _power_sensitivity(n: int, p: float) -> float:
    """Exponent of the power integral inside N_p = (int f^p)^e."""
    return max(1.0, abs((2.0 / n + p - 1.0) / (1.0 - p)))


def _tail_requirements(spec: BarenblattSpec, moments: bool, budget: float) -> list[tuple[str, float, float, float]]:
    """[(label, q, m, absolute target)] for each truncated integral that matters."""
    reqs = [("mass", 1.0, 0.0, EPS_MASS)]
    if moments:
        fp = _fast_power_integral(spec)
        energy = spec.n * spec.mu * fp
        reqs.append(("power integral", spec.p, 0.0, budget * fp / _power_sensitivity(spec.n, spec.p)))
        reqs.append(("second moment", 1.0, 2.0, budget * energy))
    return reqs


def check_tail_budget(spec: BarenblattSpec, r_max: float, moments: bool = True,
                      budget: float = MOMENT_BUDGET) -> None:
    if spec.p > 1:
        if spec.support_radius >= r_max:
            raise ValueError(
                f"grid radius {r_max} does not contain the support radius {spec.support_radius:.6g}"
            )
        return
    for label, q, m, target in _tail_requirements(spec, moments, budget):
        tail = _tail_bound(spec, r_max, q, m)
        if tail > target:
            raise ValueError(
                f"r_max={r_max} truncates the {label} tail by {tail:.3e} (> {target:.3e}); "
                f"need r_max >= {_tail_radius(spec, q, m, target):.6g}"
            )


def reference_grid(n: int, p: float, cells: int | None = None, margin: float = 1.1,
                   moments: bool = True, budget: float = MOMENT_BUDGET,
                   points_per_core: int = 100) -> RadialGrid:
    """A grid sized for the unit-mass Barenblatt profile of order p.

    p > 1: radius ``margin`` times the support radius. p < 1: the smallest
    radius meeting the tail budget, with ``points_per_core`` cells per
    core length sqrt(C/|lam|).
    """
    spec = barenblatt_spec(n, p)
    if p > 1:
        r_max = margin * spec.support_radius
        return build_radial_grid(n, r_max, cells or 4000)
    r_max = max(margin * _tail_radius(spec, q, m, target)
                for _, q, m, target in _tail_requirements(spec, moments, budget))
    r_max = max(r_max, 4.0 * spec.core_length)
    if cells is None:
        cells = max(4000, math.ceil(points_per_core * r_max / spec.core_length))
    return build_radial_grid(n, r_max, cells)


def _bisect_normalization(spec: BarenblattSpec, grid: RadialGrid, tol: float = 1e-12) -> float:
    c0 = spec.C
    lo, hi = 0.5 * c0, 2.0 * c0
    increasing = spec.p > 1

    def excess(c):
        trial = BarenblattSpec(spec.n, spec.p, spec.mu, spec.lam, c)
        return grid.integrate(trial.profile(grid.r)) - 1.0

    if increasing:
        assert excess(lo) < 0 < excess(hi)
    else:
        assert excess(lo) > 0 > excess(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        e = excess(mid)
        if abs(e) <= tol:
            return mid
        if (e < 0) == increasing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def barenblatt_profile(n: int, p: float, grid: RadialGrid, moments: bool = True,
                       budget: float = MOMENT_BUDGET) -> tuple[BarenblattSpec, DensityField]:
    """Unit-mass Barenblatt profile on ``grid``.

    C is found by bisection on the discrete mass map so the field is
    normalized to ~1e-12; the closed-form C only brackets the search.
    ``moments=True`` demands a finite second moment (p > n/(n+2)) and enforces
    the relative tail budget on the power integral and the second moment.
    """
    if grid.n != n:
        raise ValueError(f"grid dimension {grid.n} != {n}")
    _check_profile_order(n, p)
    if moments and not p > moment_threshold(n):
        raise ValueError(
            f"second-moment use needs p > n/(n+2) = {moment_threshold(n):g}, got {p}"
        )
    spec = barenblatt_spec(n, p)
    check_tail_budget(spec, grid.r_max, moments=moments, budget=budget)
    c = _bisect_normalization(spec, grid)
    spec = BarenblattSpec(n, p, spec.mu, spec.lam, c)
    return spec, DensityField(grid, spec.profile(grid.r))


def self_similar_snapshot(spec: BarenblattSpec, t: float, grid: RadialGrid) -> DensityField:
    """The source-type solution M_p(., t), renormalized to unit discrete mass."""
    if not t > 0:
        raise ValueError(f"time must be positive, got {t}")
    if grid.n != spec.n:
        raise ValueError(f"grid dimension {grid.n} != {spec.n}")
    if t == 1.0:
        values = spec.profile(grid.r)
    else:
        scale = t ** (1.0 / spec.mu)
        if spec.p > 1:
            if spec.support_radius * scale >= grid.r_max:
                raise ValueError(
                    f"support radius {spec.support_radius * scale:.6g} at t={t} exceeds r_max={grid.r_max}"
                )
        elif _tail_bound(spec, grid.r_max / scale, 1.0, 0.0) > EPS_MASS:
            raise ValueError(f"r_max={grid.r_max} truncates the tail mass at t={t}")
        values = spec.at_time(t, grid.r)
    return DensityField(grid, values).normalized()


def gaussian_tail(n: int, sigma: float, radius: float) -> tuple[float, float]:
    """(mass, second moment) of the Gaussian of variance sigma outside the ball."""
    z = radius * radius / (2.0 * sigma)
    return float(gammaincc(n / 2.0, z)), float(n * sigma * gammaincc(n / 2.0 + 1.0, z))


def gaussian_profile(n: int, sigma: float, grid: RadialGrid) -> DensityField:
    """M_sigma(x) = (2 pi sigma)^(-n/2) exp(-|x|^2 / (2 sigma)); sigma is the variance."""
    if not sigma > 0:
        raise ValueError(f"variance must be positive, got {sigma}")
    if grid.n != n:
        raise ValueError(f"grid dimension {grid.n} != {n}")
    mass_tail, moment_tail = gaussian_tail(n, sigma, grid.r_max)
    if mass_tail > EPS_MASS or moment_tail > EPS_MASS:
        raise ValueError(
            f"r_max={grid.r_max} too small for variance {sigma}: tails {mass_tail:.2e}, {moment_tail:.2e}"
        )
    r = grid.r
    values = (2.0 * math.pi * sigma) ** (-n / 2.0) * np.exp(-r * r / (2.0 * sigma))
    return DensityField(grid, values).normalized()


def uniform_ball(grid: RadialGrid, radius: float = 1.0) -> DensityField:
    """Constant density on the ball of the given radius (unit discrete mass)."""
    if not 0 < radius < grid.r_max:
        raise ValueError(f"ball radius must lie in (0, r_max), got {radius}")
    values = np.where(grid.r < radius, 1.0 / grid.ball_volume(radius), 0.0)
    return DensityField(grid, values).normalized()


def two_shell(grid: RadialGrid, r1: float = 1.0, r2: float = 3.0, width: float = 0.4,
              weight: float = 0.5) -> DensityField:
    """Mixture of two Gaussian shells centred at radii r1 and r2.

    ``weight`` is the mass fraction carried by the outer shell.
    """
    if not 0 <= r1 < r2:
        raise ValueError("need 0 <= r1 < r2")
    if not 0 < weight < 1:
        raise ValueError("weight must lie in (0, 1)")
    if r2 + 8.0 * width > grid.r_max:
        raise ValueError(f"outer shell at {r2} (width {width}) does not fit in r_max={grid.r_max}")
    r = grid.r
    inner = np.exp(-0.5 * ((r - r1) / width) ** 2)
    outer = np.exp(-0.5 * ((r - r2) / width) ** 2)
    inner /= grid.integrate(inner)
    outer /= grid.integrate(outer)
    return DensityField(grid, (1.0 - weight) * inner + weight * outer).normalized()


def barenblatt_mixture(spec: BarenblattSpec, t_a: float, t_b: float, grid: RadialGrid,
                       weight: float = 0.5) -> DensityField:
    """(1 - weight) M_p(., t_a) + weight M_p(., t_b): a non-self-similar datum
    with the tail behaviour of the Barenblatt family."""
    if not 0 < weight < 1:
        raise ValueError("weight must lie in (0, 1)")
    a = self_similar_snapshot(spec, t_a, grid).values
    b = self_similar_snapshot(spec, t_b, grid).values
    return DensityField(grid, (1.0 - weight) * a + weight * b).normalized()


# -- sharp constants ---------------------------------------------------------

def _check_gamma_order(n: int, p: float) -> None:
    if not p > moment_threshold(n):
        raise ValueError(f"gamma_(n,p) needs p > n/(n+2) = {moment_threshold(n):g}, got {p}")


def _gamma_tail_factor(n: int, p: float) -> float:
    return (((n + 2) * p - n) / (2.0 * p)) ** ((2.0 + n * (p - 1.0)) / (n * (p - 1.0)))


def gamma_constant(n: int, p: float) -> float:
    """Sharp constant of N_p(f) I_p(f) >= gamma_{n,p}.

    For p > 1 the Gamma arguments are p/(p-1) and n/2 + p/(p-1), which
    reproduce N_p I_p of the Barenblatt profile exactly. p = 1 gives the
    Gaussian value 2 pi e n.
    """
    _check_gamma_order(n, p)
    if is_shannon(p):
        return 2.0 * math.pi * math.e * n
    if p > 1:
        s = p / (p - 1.0)
        ratio = gamma(s) / gamma(n / 2.0 + s)
        return n * math.pi * 2.0 * p / (p - 1.0) * ratio ** (2.0 / n) * _gamma_tail_factor(n, p)
    s = 1.0 / (1.0 - p)
    ratio = gamma(s - n / 2.0) / gamma(s)
    return n * math.pi * 2.0 * p / (1.0 - p) * ratio ** (2.0 / n) * _gamma_tail_factor(n, p)


def gamma_constant_printed(n: int, p: float) -> float:
    """The closed form for p > 1 with Gamma arguments (p+1)/p and n/2 + (p+1)/p.

    Kept for comparison; it does not equal N_p I_p at the Barenblatt profile.
    Identical to :func:`gamma_constant` for p < 1.
    """
    _check_gamma_order(n, p)
    if p <= 1:
        return gamma_constant(n, p)
    s = (p + 1.0) / p
    ratio = gamma(s) / gamma(n / 2.0 + s)
    return n * math.pi * 2.0 * p / (p - 1.0) * ratio ** (2.0 / n) * _gamma_tail_factor(n, p)


def gamma_constant_by_quadrature(n: int, p: float, grid: RadialGrid | None = None) -> float:
    """N_p I_p evaluated on the sampled extremal (Barenblatt, or Gaussian at p = 1)."""
    _check_gamma_order(n, p)
    if is_shannon(p):
        grid = grid or build_radial_grid(n, 12.0, 4000)
        f = gaussian_profile(n, 1.0, grid)
    else:
        # the power-integral tail budget (moments=True) is what N_p needs
        grid = grid or reference_grid(n, p)
        _, f = barenblatt_profile(n, p, grid)
    return entropy_power(f, p) * fisher_information(f, p)


def sobolev_order(n: int) -> float:
    """The distinguished order p = (n-1)/n."""
    return (n - 1.0) / n


def sobolev_constant(n: int) -> float:
    """S_n = n (n-2) pi (Gamma(n/2) / Gamma(n))^(2/n)."""
    if int(n) != n or n <= 2:
        raise ValueError(f"the Sobolev constant needs integer n > 2, got {n}")
    return n * (n - 2) * math.pi * (gamma(n / 2.0) / gamma(float(n))) ** (2.0 / n)


def sobolev_constant_from_gamma(n: int) -> float:
    """((n-2)/(2n-2))^2 gamma_{n,(n-1)/n}."""
    if int(n) != n or n <= 2:
        raise ValueError(f"needs integer n > 2, got {n}")
    return ((n - 2.0) / (2.0 * n - 2.0)) ** 2 * gamma_constant(n, sobolev_order(n))


#: Relative spread between constant evaluations above which a table row is flagged.
SPREAD_TOL = 1e-3


@dataclass(frozen=True)
class ConstantsRow:
    n: int
    p: float
    printed: float
    corrected: float
    quadrature: float

    @property
    def rel_spread(self) -> float:
        """(max - min) / corrected over the three evaluations."""
        vals = (self.printed, self.corrected, self.quadrature)
        return (max(vals) - min(vals)) / abs(self.corrected)

    @property
    def quadrature_error(self) -> float:
        return abs(self.quadrature - self.corrected) / abs(self.corrected)

    @property
    def flag(self) -> str:
        if self.quadrature_error > SPREAD_TOL:
            return "quadrature-mismatch"
        return "spread" if self.rel_spread > SPREAD_TOL else "ok"


def constants_row(n: int, p: float) -> ConstantsRow:
    """All three evaluations of gamma_{n,p}, so disagreements stay visible."""
    return ConstantsRow(n, p, gamma_constant_printed(n, p), gamma_constant(n, p),
                        gamma_constant_by_quadrature(n, p))


def sobolev_consistency(n: int) -> tuple[float, float, float]:
    """(S_n, S_n recovered from gamma_{n,(n-1)/n}, relative difference)."""
    direct = sobolev_constant(n)
    via = sobolev_constant_from_gamma(n)
    return direct, via, abs(via - direct) / direct
