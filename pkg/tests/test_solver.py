import numpy as np
import pytest

from renyiflow.barenblatt import barenblatt_profile, gaussian_profile, self_similar_snapshot
from renyiflow.core import DensityField, build_radial_grid, l1_distance
from renyiflow.solver import SolverConfig, SolverError, _power_kind, _powers, evolve


@pytest.mark.parametrize("kwargs", [
    dict(snapshot_times=()),
    dict(snapshot_times=(0.2, 0.1)),
    dict(snapshot_times=(0.1, 0.1)),
    dict(snapshot_times=(0.0, 0.1)),
    dict(snapshot_times=(0.1,), kappa=0.0),
    dict(snapshot_times=(0.1,), cfl_safety=0.0),
    dict(snapshot_times=(0.1,), cfl_safety=1.5),
    dict(snapshot_times=(0.1,), floor=0.0),
    dict(snapshot_times=(0.5,), t0=1.0),
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SolverConfig(**kwargs)


def test_snapshot_may_coincide_with_start():
    f0 = gaussian_profile(1, 0.5, build_radial_grid(1, 8.0, 200))
    traj = evolve(f0, 1.0, SolverConfig((1.0, 1.1), t0=1.0))
    assert np.array_equal(traj.fields[0].values, f0.values)


def test_evolve_preconditions():
    g = build_radial_grid(3, 8.0, 200)
    f0 = gaussian_profile(3, 0.5, g)
    with pytest.raises(ValueError):
        evolve(f0, 1 / 3, SolverConfig((0.1,)))
    with pytest.raises(ValueError, match="unit mass"):
        evolve(DensityField(g, 2 * f0.values), 1.0, SolverConfig((0.1,)))


@pytest.mark.parametrize("p", [0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 1.7])
def test_power_kernel_matches_numpy(p):
    v = np.linspace(0.0, 3.0, 101)
    w = np.empty_like(v)
    _powers(v, w, _power_kind(p), p, 0.0, 0.0)
    assert np.allclose(w, v**p, rtol=1e-14, atol=0)


def test_heat_kernel_oracle():
    """sigma(t) = sigma0 + 2 t for the heat equation."""
    g = build_radial_grid(1, 10.0, 1000)
    traj = evolve(gaussian_profile(1, 0.5, g), 1.0, SolverConfig((0.125, 0.25)))
    assert traj.times == (0.125, 0.25)
    for t, fld in zip(traj.times, traj.fields):
        assert l1_distance(fld, gaussian_profile(1, 0.5 + 2 * t, g)) < 5e-4


@pytest.mark.parametrize("n", [2, 3])
def test_heat_kernel_in_higher_dimensions(n):
    g = build_radial_grid(n, 10.0, 1000)
    traj = evolve(gaussian_profile(n, 0.5, g), 1.0, SolverConfig((0.25,)))
    assert l1_distance(traj.fields[-1], gaussian_profile(n, 1.0, g)) < 1e-3
    assert abs(traj.fields[-1].mass - 1.0) < 1e-8


def _pme_error(cells):
    g = build_radial_grid(1, 3.0, cells)
    spec, _ = barenblatt_profile(1, 2.0, g)
    traj = evolve(self_similar_snapshot(spec, 1.0, g), 2.0, SolverConfig((2.0,), t0=1.0))
    return l1_distance(traj.fields[-1], self_similar_snapshot(spec, 2.0, g))


def test_barenblatt_is_tracked_and_converges():
    coarse, fine = _pme_error(250), _pme_error(500)
    assert fine < 1e-3
    assert coarse / fine >= 2.0  # order >= 1 in h


def test_kappa_rescales_time():
    g = build_radial_grid(1, 8.0, 400)
    f0 = gaussian_profile(1, 0.3, g)
    fast = evolve(f0, 2.0, SolverConfig((0.2,), kappa=2.0))
    slow = evolve(f0, 2.0, SolverConfig((0.4,), kappa=1.0))
    assert l1_distance(fast.fields[-1], slow.fields[-1]) < 1e-4


def test_runs_are_deterministic():
    g = build_radial_grid(1, 8.0, 300)
    f0 = gaussian_profile(1, 0.3, g)
    a = evolve(f0, 1.5, SolverConfig((0.1, 0.2)))
    b = evolve(f0, 1.5, SolverConfig((0.1, 0.2)))
    assert a.steps == b.steps
    for fa, fb in zip(a.fields, b.fields):
        assert np.array_equal(fa.values, fb.values)


def test_step_budget():
    g = build_radial_grid(1, 8.0, 300)
    with pytest.raises(SolverError, match="steps"):
        evolve(gaussian_profile(1, 0.3, g), 1.0, SolverConfig((1.0,), max_steps=10))


def test_fast_diffusion_step_underflow():
    # Gaussian tail values just above a tiny floor make v^(p-1) explode
    g = build_radial_grid(1, 12.0, 400)
    with pytest.raises(SolverError, match="underflow"):
        evolve(gaussian_profile(1, 1.0, g), 0.4, SolverConfig((0.1,), floor=1e-30))


def test_trajectory_accessors():
    g = build_radial_grid(1, 8.0, 200)
    traj = evolve(gaussian_profile(1, 0.5, g), 1.0, SolverConfig((0.1, 0.2, 0.3)))
    assert len(traj) == 3
    assert traj.n == 1 and traj.grid == g
    assert np.allclose(traj.series("second_moment"), 0.5 + 2 * np.array(traj.times), rtol=1e-5)


@pytest.mark.parametrize("name", ["heat", "pme2", "pme3_2", "fd3_4"])
def test_flow_invariants(flows, name):
    traj = flows(name)
    assert np.max(np.abs(traj.series("mass") - 1.0)) <= 1e-8
    assert np.all(np.diff(traj.series("second_moment")) > 0)
    assert np.all(np.diff(traj.series("renyi")) > 0)
    assert all(np.all(f.values >= 0) for f in traj.fields)


def test_fast_diffusion_below_floor_is_linearized():
    v = np.array([0.0, 1e-14, 1e-12, 1e-6])
    w = np.empty_like(v)
    floor, p = 1e-12, 0.5
    _powers(v, w, _power_kind(p), p, floor, floor ** (p - 1))
    assert np.allclose(w, [0.0, 1e-14 * floor ** (p - 1), floor**p, 1e-3], rtol=1e-14)


def test_fast_diffusion_from_gaussian():
    g = build_radial_grid(1, 12.0, 400)
    traj = evolve(gaussian_profile(1, 1.0, g), 0.75, SolverConfig((0.01, 0.03)))
    assert abs(traj.fields[-1].mass - 1.0) < 1e-8


def test_scheme_failure_is_reported():
    # tails of order 1e-30 at p = 0.3 outrun the explicit step: abort, not garbage
    g = build_radial_grid(1, 12.0, 400)
    with pytest.raises(SolverError, match="negative density"):
        evolve(gaussian_profile(1, 1.0, g), 0.3, SolverConfig((0.01,)))
