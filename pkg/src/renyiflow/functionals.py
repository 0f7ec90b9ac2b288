"""Information functionals of a radial density: Renyi and Tsallis entropies,
entropy power, p-Fisher information and the dilation-invariant Lambda_p."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DensityField, integrate_power, radial_gradient, second_moment

#: Orders within this distance of 1 are treated as the Shannon case.
DELTA_LIMIT = 1e-6
#: Density floor below which the Fisher integrand is masked. Effectively the
#: support {f > 0}: a larger floor cuts off the algebraic tails of
#: fast-diffusion profiles, whose Fisher integrand decays only like r^2 f.
EPS_POS = 1e-300


def _check_order(p: float) -> None:
    if not p > 0:
        raise ValueError(f"order must be positive, got {p}")


def is_shannon(p: float) -> bool:
    return abs(p - 1.0) <= DELTA_LIMIT


def shannon_entropy(f: DensityField) -> float:
    v = f.values
    pos = v > 0
    return -f.grid.integrate(np.where(pos, v * np.log(np.where(pos, v, 1.0)), 0.0))


def renyi_entropy(f: DensityField, p: float) -> float:
    _check_order(p)
    if is_shannon(p):
        return shannon_entropy(f)
    return math.log(integrate_power(f, p)) / (1.0 - p)


def tsallis_entropy(f: DensityField, p: float) -> float:
    _check_order(p)
    if is_shannon(p):
        return shannon_entropy(f)
    return (integrate_power(f, p) - f.mass) / (1.0 - p)


def power_exponent(n: int, p: float) -> float:
    """The exponent 2/n + p - 1 of the entropy power."""
    return 2.0 / n + p - 1.0


def entropy_power(f: DensityField, p: float) -> float:
    _check_order(p)
    n = f.n
    if not p > (n - 2) / n:
        raise ValueError(f"entropy power needs p > (n-2)/n = {(n - 2) / n:g}, got {p}")
    if is_shannon(p):
        return math.exp(2.0 / n * shannon_entropy(f))
    return math.exp(power_exponent(n, p) * renyi_entropy(f, p))


def fisher_numerator(f: DensityField, p: float) -> float:
    """Integral of |grad f^p|^2 / f over {f > EPS_POS}."""
    v = f.values
    w = v if is_shannon(p) else v**p
    dw = radial_gradient(f.grid, w)
    mask = v > EPS_POS
    integrand = np.where(mask, dw * dw / np.where(mask, v, 1.0), 0.0)
    return f.grid.integrate(integrand)


def fisher_information(f: DensityField, p: float) -> float:
    _check_order(p)
    if is_shannon(p):
        return fisher_numerator(f, 1.0)
    return fisher_numerator(f, p) / integrate_power(f, p)


def lambda_invariant(f: DensityField, p: float) -> float:
    """Lambda_p(f) = R_p(f) - (n/2) log E(f)."""
    _check_order(p)
    n = f.n
    if not p > n / (n + 2):
        raise ValueError(f"Lambda_p needs p > n/(n+2) = {n / (n + 2):g}, got {p}")
    energy = second_moment(f)
    if not energy > 0:
        raise ValueError("second moment vanishes")
    return renyi_entropy(f, p) - 0.5 * n * math.log(energy)


@dataclass(frozen=True)
class FunctionalReport:
    p: float
    mass: float
    renyi: float
    power: float
    fisher: float
    lam: float
    second_moment: float
    tsallis: float
    power_integral: float


def evaluate(f: DensityField, p: float) -> FunctionalReport:
    """All functionals at once; undefined entries (out-of-range p) are NaN."""
    _check_order(p)
    n = f.n
    renyi = renyi_entropy(f, p)
    energy = second_moment(f)
    power = entropy_power(f, p) if p > (n - 2) / n else math.nan
    lam = renyi - 0.5 * n * math.log(energy) if p > n / (n + 2) and energy > 0 else math.nan
    return FunctionalReport(
        p=p,
        mass=f.mass,
        renyi=renyi,
        power=power,
        fisher=fisher_information(f, p),
        lam=lam,
        second_moment=energy,
        tsallis=tsallis_entropy(f, p),
        power_integral=integrate_power(f, p),
    )
