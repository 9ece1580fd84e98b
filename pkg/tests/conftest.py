# conftest.py
import numpy as np
import pytest
from fastapi.testclient import TestClient

from app import app  # The FastAPI app instance
from stokes.cases import build_case
from stokes.geometry import Domain, Segment
from stokes.pipeline import solve_domain
from utils.validation import COUETTE_PARAMS, POISEUILLE_PARAMS


@pytest.fixture(scope="session", autouse=True)
def test_app_client():
    """Create a TestClient for the FastAPI app."""
    with TestClient(app) as client:
        yield client


@pytest.fixture
def rng():
    """Seeded generator so random points are reproducible."""
    return np.random.default_rng(20240617)


@pytest.fixture(scope="session")
def winding_oracle():
    """Independent point-in-polygon test by winding number (nonzero means inside)."""

    def is_left(p, a, b):
        return (b.real - a.real) * (p.imag - a.imag) - (p.real - a.real) * (b.imag - a.imag)

    def inside(point: complex, polygon) -> bool:
        pts = list(polygon) + [polygon[0]]
        winding = 0
        for a, b in zip(pts[:-1], pts[1:]):
            if a.imag <= point.imag:
                if b.imag > point.imag and is_left(point, a, b) > 0:
                    winding += 1
            elif b.imag <= point.imag and is_left(point, a, b) < 0:
                winding -= 1
        return winding != 0

    return inside


@pytest.fixture(scope="session")
def unit_square() -> Domain:
    """Counterclockwise unit square without boundary conditions."""
    vertices = [0, 1, 1 + 1j, 1j]
    return Domain(tuple(Segment.line(vertices[k], vertices[(k + 1) % 4], 20, name=f"edge {k}")
                        for k in range(4)))


@pytest.fixture(scope="session")
def uniform_flow_solved():
    setup = build_case("uniform-flow")
    return setup, solve_domain(setup.domain, setup.options)


@pytest.fixture(scope="session")
def poiseuille_solved():
    setup = build_case("constricted-channel", POISEUILLE_PARAMS)
    return setup, solve_domain(setup.domain, setup.options)


@pytest.fixture(scope="session")
def couette_solved():
    setup = build_case("two-cylinder", COUETTE_PARAMS)
    return setup, solve_domain(setup.domain, setup.options)


@pytest.fixture(scope="session")
def two_cylinder_solved():
    """Two-cylinder case d."""
    setup = build_case("two-cylinder", {"case": "d"})
    return setup, solve_domain(setup.domain, setup.options)
