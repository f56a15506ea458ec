from __future__ import annotations

import pytest
from api.main import app
from fastapi.testclient import TestClient

KEY = {"X-API-Key": "test-key"}


@pytest.fixture
def client(monkeypatch):
    monkeypatch.setenv("API_KEY", "test-key")
    return TestClient(app)


def test_healthz_needs_no_key(client):
    assert client.get("/healthz").json() == {"status": "ok"}


def test_models_listing(client):
    body = client.get("/models").json()
    names = [m["name"] for m in body]
    assert names == sorted(names)
    assert "unscaled_crosstalk" in names
    assert client.get("/models/tq_depolarizing/max-eps").json()["max_eps"] == pytest.approx(0.93)
    assert client.get("/models/thermal/max-eps").status_code == 404


def test_estimate_requires_key(client):
    payload = {"model": "tq_depolarizing", "n": 4, "eps": 1e-3, "opt": "medium"}
    assert client.post("/estimate", json=payload).status_code == 401
    assert client.post("/estimate", json=payload, headers={"X-API-Key": "wrong"}).status_code == 401
    resp = client.post("/estimate", json=payload, headers=KEY)
    assert resp.status_code == 200
    body = resp.json()
    assert body["passed"] is True
    assert body["gates_per_block"] == 3.0


def test_estimate_validation(client):
    bad_n = {"model": "tq_depolarizing", "n": 1, "eps": 1e-3}
    assert client.post("/estimate", json=bad_n, headers=KEY).status_code == 422
    unknown = {"model": "thermal", "n": 3, "eps": 1e-3, "opt": "medium"}
    assert client.post("/estimate", json=unknown, headers=KEY).status_code == 422


def test_threshold_endpoint(client):
    payload = {"model": "tq_depolarizing", "n": [3, 5], "opt": "medium"}
    body = client.post("/threshold", json=payload, headers=KEY).json()
    thresholds = {int(k): v for k, v in body["thresholds"].items()}
    assert thresholds[5] < thresholds[3]


def test_ci_endpoint(client):
    payload = {"heavy_counts": [75] * 100, "shots": [100] * 100, "method": "original"}
    body = client.post("/ci", json=payload, headers=KEY).json()
    assert body["lower"] == pytest.approx(0.663397459621556, abs=1e-10)
    assert body["passed"] is False
    boot = client.post("/ci", json=payload | {"method": "bootstrap", "n_b": 200}, headers=KEY)
    assert boot.status_code == 200
    mismatched = {"heavy_counts": [1, 2], "shots": [10]}
    assert client.post("/ci", json=mismatched, headers=KEY).status_code == 422
    uneven = {"heavy_counts": [1, 2], "shots": [10, 20], "method": "original"}
    assert client.post("/ci", json=uneven, headers=KEY).status_code == 422
