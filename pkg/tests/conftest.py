import math

import pytest

from conic_surfaces.datatypes import ConicSurfaceSpec
from conic_surfaces.datatypes import SolverOptions


@pytest.fixture
def football_spec():
    return ConicSurfaceSpec(
        genus=0, betas=[-0.5, -0.5], positions=[(0.0, 0.0, 1.0), (0.0, 0.0, -1.0)]
    )


@pytest.fixture
def equilateral_spec():
    positions = [
        (math.cos(2.0 * math.pi * i / 3.0), math.sin(2.0 * math.pi * i / 3.0), 0.0)
        for i in range(3)
    ]
    return ConicSurfaceSpec(genus=0, betas=[-0.5] * 3, positions=positions)


@pytest.fixture
def outside_troyanov_spec():
    return ConicSurfaceSpec(
        genus=0,
        betas=["-4/5", "-1/10", "-1/10"],
        positions=[(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)],
    )


@pytest.fixture
def torus_spec():
    return ConicSurfaceSpec(genus=1, betas=[-0.5, -0.5], positions=[(0.25, 0.25), (0.75, 0.75)])


@pytest.fixture
def coarse_options():
    return SolverOptions(mesh_level=2, grading_rings=8)
