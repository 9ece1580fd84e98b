import pytest
from fastapi import status

from stokes.cases import CASES, elt_pressure_drop


def test_health_check(test_app_client):
    """Test the health check endpoint."""
    response = test_app_client.get("/health")
    assert response.status_code == status.HTTP_200_OK
    data = response.json()
    assert data["application_status"] == 'healthy'
    assert data["solver_status"] == 'healthy'


def test_openapi_schema(test_app_client):
    """Test that the OpenAPI schema is correctly generated."""
    response = test_app_client.get("/openapi.json")
    assert response.status_code == status.HTTP_200_OK
    schema = response.json()

    assert schema["info"]["title"] == "Stokes Flow Solver API"
    assert schema["info"]["version"] == "0.1.0"
    assert schema["openapi"].startswith("3.1")

    expected_endpoints = {"/cases": ["get"], "/elt": ["get"], "/solve": ["post"], "/health": ["get"]}
    for path, methods in expected_endpoints.items():
        assert path in schema["paths"], f"Path {path} missing in OpenAPI schema"
        for method in methods:
            assert method in schema["paths"][path], f"Method {method} for path {path} missing in schema"


def test_list_cases(test_app_client):
    """Every built-in case is listed with its default parameters."""
    response = test_app_client.get("/cases")
    assert response.status_code == status.HTTP_200_OK
    cases = {c["name"]: c for c in response.json()}
    assert set(cases) == set(CASES)
    assert cases["constricted-channel"]["parameters"]["lam"] == 0.4


@pytest.mark.parametrize("query,status_code", [
    ("lam=0.5&order=0", 200),
    ("lam=0.4", 200),
    ("lam=1.0", 400),
    ("lam=0.4&order=3", 400),
    ("lam=-0.1", 422),
    ("delta=1.0", 422),
])
def test_elt_endpoint(test_app_client, query, status_code):
    """Lubrication pressure drops, with errors for values outside the series' range."""
    response = test_app_client.get(f"/elt?{query}")
    assert response.status_code == status_code
    if status_code == 200:
        data = response.json()
        assert data["pressure_drop"] == pytest.approx(elt_pressure_drop(data["lam"], data["delta"], data["order"]))
        assert len(data["terms"]) == 3


def test_solve_uniform_flow(test_app_client):
    """A small case is solved and reported without artifacts."""
    payload = {"case": "uniform-flow", "parameters": {"polynomial_degree": 6}}
    response = test_app_client.post("/solve", json=payload)
    assert response.status_code == status.HTTP_200_OK
    report = response.json()
    assert report["case"] == "uniform-flow"
    assert report["max_residual"] < 1e-10
    assert report["n_unknowns"] == 4 * 7
    assert report["target_met"] is True
    assert [s["name"] for s in report["segments"]] == [f"edge {k}" for k in range(4)]


def test_solve_polygon_domain(test_app_client):
    """Explicit polygons with edge conditions are accepted."""
    payload = {
        "domain": {
            "vertices": [[0, 0], [1, 0], [1, 1], [0, 1]],
            "edges": [{"kind": "velocity", "u": 1.0}] * 4,
            "lightning_poles": 0,
            "samples_per_edge": 30,
            "polynomial_degree": 5,
        },
        "output": {"accuracy_target": 8},
    }
    response = test_app_client.post("/solve", json=payload)
    assert response.status_code == status.HTTP_200_OK
    assert response.json()["accuracy_digits"] >= 8


@pytest.mark.parametrize("payload,status_code", [
    ({"case": "no-such-case"}, 400),
    ({"case": "two-cylinder", "parameters": {"A_in": 0.6, "E": 0.5}}, 400),
    ({"case": "uniform-flow", "domain": {"vertices": [[0, 0], [1, 0], [0, 1]], "edges": [{}] * 3}}, 422),
    ({"case": "uniform-flow", "solver": {"weighting": "random"}}, 422),
    ({"domain": {"vertices": [[0, 0], [1, 0], [1, 1], [0, 1]], "edges": [{}] * 4, "polynomial_degree": 200,
                 "samples_per_edge": 2, "lightning_poles": 0}}, 422),
])
def test_solve_errors(test_app_client, payload, status_code):
    """Bad cases are 400, malformed documents and solver failures are 422."""
    response = test_app_client.post("/solve", json=payload)
    assert response.status_code == status_code


def test_elt_performance(benchmark, test_app_client):
    """Benchmark the lubrication endpoint."""

    def target_api_call(client):
        response = client.get("/elt?lam=0.6&delta=0.5")
        assert response.status_code == status.HTTP_200_OK

    benchmark(target_api_call, test_app_client)
