"""Shared solver runs. Each flow is computed once per session."""

from dataclasses import dataclass

import numpy as np
import pytest

from renyiflow.barenblatt import barenblatt_mixture, barenblatt_spec, two_shell
from renyiflow.core import build_radial_grid
from renyiflow.solver import SolverConfig, evolve
from renyiflow.verify import refined_schedule


@dataclass(frozen=True)
class FlowCase:
    """A non-self-similar test flow in n = 1 and the recipe to refine it."""

    name: str
    p: float
    r_max: float
    cells: int
    times: tuple

    def datum(self, cells):
        grid = build_radial_grid(1, self.r_max, cells)
        if self.p < 1:
            # two Barenblatt snapshots superposed: algebraic tails, not self-similar
            return barenblatt_mixture(barenblatt_spec(1, self.p), 0.01, 0.1, grid)
        return two_shell(grid, r1=1.0, r2=3.0, width=0.4, weight=0.5)

    def run(self, refined=False):
        cells = 2 * self.cells if refined else self.cells
        times = refined_schedule(self.times) if refined else self.times
        return evolve(self.datum(cells), self.p, SolverConfig(times))


def _schedule(start, stop, count):
    return tuple(float(t) for t in np.linspace(start, stop, count))


FLOW_CASES = {
    "heat": FlowCase("heat", 1.0, 14.0, 1000, _schedule(0.3, 1.3, 21)),
    "pme2": FlowCase("pme2", 2.0, 8.0, 1000, _schedule(0.3, 1.3, 21)),
    "pme3_2": FlowCase("pme3_2", 1.5, 8.0, 1000, _schedule(0.3, 1.3, 21)),
    "fd3_4": FlowCase("fd3_4", 0.75, 20.0, 800, _schedule(0.05, 0.3, 11)),
}

_cache = {}


def flow(name, refined=False):
    key = (name, refined)
    if key not in _cache:
        _cache[key] = FLOW_CASES[name].run(refined)
    return _cache[key]


@pytest.fixture(scope="session")
def flows():
    """Accessor ``flows(name, refined=False)`` over the cached test flows."""
    return flow
