import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from renyiflow.barenblatt import (
    barenblatt_exponents, barenblatt_mixture, barenblatt_profile, barenblatt_spec,
    check_tail_budget, constants_row, exact_normalization, gamma_constant,
    gamma_constant_by_quadrature, gamma_constant_printed, gaussian_profile, reference_grid,
    self_similar_snapshot, sobolev_consistency, sobolev_constant, sobolev_constant_from_gamma,
    two_shell, uniform_ball,
)
from renyiflow.core import EPS_MASS, build_radial_grid, integrate_power, second_moment
from renyiflow.functionals import fisher_information

# (n, p) -> (C, E, int f^p) of the unit-mass profile, from mpmath quadrature and
# findroot at 30 digits on the defining integrals (no Beta-function identities)
ORACLE = {
    (1, "1/2"): (1.948888544860377, 5.8466656345811309, 3.897777089720754),
    (1, "2/3"): (1.5604656184807867, 3.4677013744017481, 2.0806208246410489),
    (1, "3/4"): (1.3918692527699899, 2.9229254308169788, 1.6702431033239879),
    (1, "3/2"): (0.5669832888165136, 1.2149641903211006, 0.48598567612844023),
    (1, "2"): (0.3605623925768521, 0.86534974218444503, 0.28844991406148168),
    (1, "3"): (0.18377629847393068, 0.55132889542179205, 0.13783222385544801),
    (2, "2/3"): (2.8944050182330706, 15.43682676390971, 5.7888100364661413),
    (2, "3/4"): (2.1123070205113231, 9.5053815923009539, 3.1684605307669846),
    (2, "3/2"): (0.37575055059560887, 1.6908774776802399, 0.28181291294670665),
    (2, "2"): (0.19947114020071634, 1.0638460810704871, 0.13298076013381089),
    (2, "3"): (0.088943166629406809, 0.64039079973172902, 0.053365899977644085),
    (3, "2/3"): (7.3038721193751092, 87.64646543250131, 29.215488477500437),
    (3, "3/4"): (3.6435158354313996, 27.326368765735497, 7.2870316708627993),
    (3, "3/2"): (0.27461962712381598, 1.9223373898667118, 0.18307975141587732),
    (3, "2"): (0.13481014081935863, 1.1555154927373597, 0.077034366182490644),
    (3, "3"): (0.058711299316911389, 0.70453559180293667, 0.029355649658455694),
    (4, "3/4"): (7.6952989809711846, 92.343587771654215, 23.085896942913554),
    (4, "3/2"): (0.21434568952624793, 2.0577186194519801, 0.12860741371574876),
    (4, "2"): (0.1018145096184762, 1.2217741154217144, 0.050907254809238099),
    (4, "3"): (0.044688482264907159, 0.76608826739840844, 0.019152206684960211),
}
CASES = [(n, float(Fraction(p)), vals) for (n, p), vals in ORACLE.items()]
IDS = [f"n{n}-p{p}" for (n, p) in ORACLE]


def test_exponents():
    assert barenblatt_exponents(1, 2.0) == pytest.approx((3.0, 1 / 12))
    assert barenblatt_exponents(1, 0.5) == pytest.approx((1.5, -1 / 3))


def test_closed_form_normalizations():
    assert exact_normalization(1, 2.0) == pytest.approx((math.sqrt(3) / 8) ** (2 / 3), rel=1e-13)
    assert exact_normalization(1, 2.0) == pytest.approx(0.360562, abs=1e-6)
    assert exact_normalization(1, 0.5) == pytest.approx((math.pi * math.sqrt(3) / 2) ** (2 / 3), rel=1e-13)
    assert exact_normalization(1, 0.5) == pytest.approx(1.94889, abs=1e-5)


@pytest.mark.parametrize("n, p, vals", CASES, ids=IDS)
def test_normalization_matches_oracle(n, p, vals):
    assert exact_normalization(n, p) == pytest.approx(vals[0], rel=1e-12)


@pytest.mark.parametrize("n, p, vals", CASES, ids=IDS)
def test_sampled_profile_matches_oracle(n, p, vals):
    spec, f = barenblatt_profile(n, p, reference_grid(n, p))
    assert f.mass == pytest.approx(1.0, abs=1e-12)
    assert spec.C == pytest.approx(vals[0], rel=1e-4)
    assert second_moment(f) == pytest.approx(vals[1], rel=1e-4)
    assert integrate_power(f, p) == pytest.approx(vals[2], rel=1e-4)


@pytest.mark.parametrize("n, p", [(1, 2.0), (3, 1.5), (1, 0.5), (2, 0.75)])
def test_fisher_equals_n_over_mu(n, p):
    # |grad f^p|^2 / f integrates to E / mu^2 and E = n mu int f^p at the extremal
    spec, f = barenblatt_profile(n, p, reference_grid(n, p))
    assert fisher_information(f, p) == pytest.approx(n / spec.mu, rel=2e-4)


def test_mass_map_direction():
    """Mass grows with C for p > 1 and shrinks for p < 1 (tails thin out as C grows)."""
    for p, sign in ((2.0, 1), (0.5, -1)):
        spec = barenblatt_spec(1, p)
        grid = reference_grid(1, p)
        lo = type(spec)(1, p, spec.mu, spec.lam, 0.9 * spec.C)
        hi = type(spec)(1, p, spec.mu, spec.lam, 1.1 * spec.C)
        m_lo, m_hi = (grid.integrate(s.profile(grid.r)) for s in (lo, hi))
        assert sign * (m_hi - m_lo) > 0


def test_support_and_positivity():
    spec, f = barenblatt_profile(1, 2.0, reference_grid(1, 2.0))
    assert spec.support_radius == pytest.approx(math.sqrt(spec.C * 12))
    assert np.all(f.values[f.grid.r > spec.support_radius] == 0)
    _, g = barenblatt_profile(1, 0.75, reference_grid(1, 0.75))
    assert np.all(g.values > 0)


def test_profile_preconditions():
    with pytest.raises(ValueError):
        barenblatt_spec(3, 1 / 3)  # p <= (n-2)/n
    with pytest.raises(ValueError):
        barenblatt_spec(1, 1.0)
    with pytest.raises(ValueError, match="second-moment"):
        barenblatt_profile(1, 1 / 3, build_radial_grid(1, 10.0, 100))
    # the profile itself still exists below the moment threshold
    spec, f = barenblatt_profile(1, 1 / 3, reference_grid(1, 1 / 3, moments=False), moments=False)
    assert f.mass == pytest.approx(1.0, abs=EPS_MASS)


def test_grid_rejections():
    with pytest.raises(ValueError, match="support"):
        barenblatt_profile(1, 2.0, build_radial_grid(1, 1.0, 1000))
    with pytest.raises(ValueError, match="tail"):
        barenblatt_profile(1, 0.75, build_radial_grid(1, 10.0, 1000))
    with pytest.raises(ValueError):
        barenblatt_profile(2, 2.0, build_radial_grid(1, 10.0, 1000))


def test_tail_budget_is_met_by_reference_grids():
    for n, p in ((1, 0.5), (2, 2 / 3), (3, 0.75)):
        spec = barenblatt_spec(n, p)
        check_tail_budget(spec, reference_grid(n, p).r_max)


# -- self-similar solution ---------------------------------------------------

def test_snapshot_at_unit_time_is_the_profile():
    grid = reference_grid(1, 2.0, margin=2.5)
    spec, f = barenblatt_profile(1, 2.0, grid)
    assert np.allclose(self_similar_snapshot(spec, 1.0, grid).values, f.values, rtol=1e-12)


@pytest.mark.parametrize("t", [0.5, 2.0, 3.0])
def test_snapshot_mass_and_moment(t):
    grid = build_radial_grid(1, 6.0, 4000)
    spec, f = barenblatt_profile(1, 2.0, grid)
    ft = self_similar_snapshot(spec, t, grid)
    assert ft.mass == pytest.approx(1.0, abs=EPS_MASS)
    assert second_moment(ft) == pytest.approx(t ** (2 / spec.mu) * second_moment(f), rel=1e-4)


def test_snapshot_rejections():
    grid = build_radial_grid(1, 3.0, 1000)
    spec = barenblatt_spec(1, 2.0)
    with pytest.raises(ValueError):
        self_similar_snapshot(spec, 0.0, grid)
    with pytest.raises(ValueError, match="support"):
        self_similar_snapshot(spec, 10.0, grid)


def test_mixture_is_normalized():
    grid = build_radial_grid(1, 20.0, 800)
    f = barenblatt_mixture(barenblatt_spec(1, 0.75), 0.01, 0.1, grid)
    assert f.mass == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        barenblatt_mixture(barenblatt_spec(1, 0.75), 0.01, 0.1, grid, weight=1.0)


# -- Gaussians and stress densities ---------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3])
def test_gaussian_closed_forms(n):
    sigma = 0.7
    f = gaussian_profile(n, sigma, build_radial_grid(n, 10.0, 4000))
    assert f.mass == pytest.approx(1.0, abs=1e-12)
    assert second_moment(f) == pytest.approx(n * sigma, rel=1e-6)
    assert fisher_information(f, 1.0) == pytest.approx(n / sigma, rel=1e-5)


def test_gaussian_rejections():
    with pytest.raises(ValueError):
        gaussian_profile(1, 0.0, build_radial_grid(1, 10.0, 100))
    with pytest.raises(ValueError, match="too small"):
        gaussian_profile(1, 1.0, build_radial_grid(1, 3.0, 100))


def test_stress_densities():
    g = build_radial_grid(2, 8.0, 2000)
    assert uniform_ball(g, 1.5).mass == pytest.approx(1.0, abs=1e-12)
    assert two_shell(g).mass == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        uniform_ball(g, 9.0)
    with pytest.raises(ValueError):
        two_shell(g, r1=3.0, r2=1.0)
    with pytest.raises(ValueError):
        two_shell(g, r2=6.0)


# -- constants ------------------------------------------------------------------

def test_gamma_closed_forms():
    assert gamma_constant(1, 0.5) == pytest.approx(4 * math.pi**2, rel=1e-12)
    assert gamma_constant(1, 2.0) == pytest.approx(125 / 9, rel=1e-12)
    assert gamma_constant_printed(1, 2.0) == pytest.approx(125 * math.pi**2 / 64, rel=1e-12)
    assert gamma_constant_printed(1, 0.5) == gamma_constant(1, 0.5)
    for n in (1, 2, 3):
        assert gamma_constant(n, 1.0) == pytest.approx(2 * math.pi * math.e * n, rel=1e-15)
    mpmath.mp.dps = 30
    oracle = 48 * mpmath.pi * (mpmath.gamma(1.5) / mpmath.gamma(3)) ** (mpmath.mpf(2) / 3)
    assert gamma_constant(3, 2 / 3) == pytest.approx(float(oracle), rel=1e-12)


def test_gamma_rejects_low_orders():
    with pytest.raises(ValueError):
        gamma_constant(1, 1 / 3)
    with pytest.raises(ValueError):
        gamma_constant(3, 0.6)


LATTICE = [(n, p) for n in (1, 2, 3, 4) for p in (0.5, 2 / 3, 0.75, 1.5, 2.0, 3.0) if p > n / (n + 2)]


@pytest.mark.parametrize("n, p", LATTICE)
def test_gamma_equals_quadrature(n, p):
    assert gamma_constant_by_quadrature(n, p) == pytest.approx(gamma_constant(n, p), rel=1e-3)


def test_sobolev_values():
    assert sobolev_constant(3) == pytest.approx(5.4779040895313318736, rel=1e-12)
    assert sobolev_constant(4) == pytest.approx(8 * math.pi / math.sqrt(6), rel=1e-12)
    with pytest.raises(ValueError):
        sobolev_constant(2)
    for n in (3, 4, 5, 6):
        assert sobolev_constant_from_gamma(n) == pytest.approx(sobolev_constant(n), rel=1e-12)
        assert sobolev_consistency(n)[2] <= 1e-12


def test_constants_rows_flag_the_printed_branch():
    row = constants_row(1, 2.0)
    assert row.flag == "spread"
    assert row.quadrature_error < 1e-3
    half = constants_row(1, 0.5)
    assert half.flag == "ok"
    assert half.printed == half.corrected
