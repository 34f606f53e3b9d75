"""Endpoint tests for the command service."""

import pytest
from fastapi.testclient import TestClient

from residua.commands import _HANDLERS, random_gamma_instance, run_command
from residua.errors import NotHolomorphic
from residua.reports import FailureRecord, ReportRecord, canonical_json
from residua.service import create_app

import random


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


def test_health(client):
    response = client.get("/v1/health")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "ok"
    assert body["version"] == "0.1.0"


def test_gamma_check_endpoint(client):
    response = client.post(
        "/v1/gamma-check",
        json={"alpha": [[1, 0], [1, 1]], "p": 2, "sigma": "id", "mu": [3, 1]},
    )
    assert response.status_code == 200
    body = response.json()
    assert body["pass"] is True
    assert body["report"]["curve_value"] == "0/1"
    assert body["report"]["iterated_value"] == "0/1"


def test_gamma_check_random_mode(client):
    response = client.post("/v1/gamma-check", json={"random": 10, "seed": 4})
    body = response.json()
    assert body["pass"] is True
    assert body["report"]["instances"] == 10
    assert body["report"]["failures"] == []
    assert len(body["report"]["samples"]) == 3


def test_ch_eval_endpoint(client):
    response = client.post(
        "/v1/ch-eval",
        json={"factors": ["z", "z*w"], "weights": [3, 1], "testform": "z|dz^dw"},
    )
    assert response.status_code == 200
    body = response.json()
    assert body["pass"] is True
    assert body["report"]["equal"] is True
    assert body["report"]["iterated"]["q"] == "0/1"


def test_ch_eval_nonzero_value(client):
    response = client.post(
        "/v1/ch-eval", json={"factors": ["z", "w"], "testform": "1|dz^dw"}
    )
    body = response.json()
    # -4 pi^2 from the two-residue pairing
    assert body["report"]["iterated"] == {"q": "-4/1", "pi": 2, "i": 0}


def test_product_eval_endpoint(client):
    response = client.post(
        "/v1/product-eval",
        json={"factors": ["U:z:3"], "testform": "1|vol"},
    )
    body = response.json()
    assert response.status_code == 200
    assert body["report"]["spec"]["factors"][0]["unit"] == "3/1"
    assert body["report"]["equal"] is True


def test_m_eval_endpoint(client):
    response = client.post(
        "/v1/m-eval",
        json={"factors": ["z^2*w"], "testform": "1|vol2", "profile": 2},
    )
    body = response.json()
    assert response.status_code == 200
    assert body["pass"] is True
    assert body["notes"]
    assert "vanishes" in body["notes"][0]


def test_duality_endpoint(client):
    response = client.post("/v1/duality", json={"ci": ["z^2", "w"], "g": "z"})
    assert response.status_code == 200
    body = response.json()
    assert body["pass"] is False
    assert body["report"]["annihilated"] is False

    response = client.post("/v1/duality", json={"ci": ["z^2", "w"], "g": "z*w"})
    assert response.json()["pass"] is True


def test_quad_compare_endpoint(client):
    response = client.post(
        "/v1/quad-compare",
        json={
            "factors": ["z"],
            "testform": "1|dz",
            "nu": [2],
            "deltas": [0.1, 0.01],
            "lambdas": [[2.0]],
        },
    )
    assert response.status_code == 200
    body = response.json()
    assert body["pass"] is True
    study = body["report"]["study"]
    assert study["converged"] is True
    assert len(study["rows"]) == 2
    assert body["report"]["lambdaSamples"][0]["relError"] <= 1e-8


def test_usage_failures_return_400(client):
    response = client.post(
        "/v1/ch-eval", json={"factors": ["x1^0"], "testform": "z|dz"}
    )
    assert response.status_code == 400
    body = response.json()
    assert body["pass"] is False
    assert body["usage"] is True
    assert body["error"]["type"] == "ParseError"

    response = client.post("/v1/duality", json={"ci": ["z*w", "w"], "g": "z"})
    assert response.status_code == 400
    assert response.json()["error"]["type"] == "NotCompleteIntersection"


def test_validation_errors_return_422(client):
    response = client.post("/v1/ch-eval", json={"testform": "z|dz"})
    assert response.status_code == 422
    response = client.post(
        "/v1/duality", json={"ci": ["z"], "g": "z", "bogus": 1}
    )
    assert response.status_code == 422


def test_response_is_deterministic(client):
    payload = {"factors": ["z", "w"], "testform": "1|dz^dw"}
    first = client.post("/v1/ch-eval", json=payload)
    second = client.post("/v1/ch-eval", json=payload)
    assert canonical_json(first.json()) == canonical_json(second.json())


# -- command layer -----------------------------------------------------------


def test_run_command_unknown():
    record = run_command("no-such", {})
    assert isinstance(record, FailureRecord)
    assert record.usage is True


def test_run_command_math_failure_is_not_usage(monkeypatch):
    def boom(payload):
        raise NotHolomorphic("surviving pure-variable factor")

    monkeypatch.setitem(_HANDLERS, "ch-eval", boom)
    record = run_command("ch-eval", {})
    assert isinstance(record, FailureRecord)
    assert record.usage is False
    assert record.error_type == "NotHolomorphic"


def test_run_command_success_shape():
    record = run_command("duality", {"ci": ["z"], "g": "z"})
    assert isinstance(record, ReportRecord)
    assert record.passed is True
    assert record.report["annihilated"] is True


def test_random_instances_stay_in_bounds():
    rng = random.Random(11)
    for _ in range(200):
        inst = random_gamma_instance(rng)
        rows = inst["alpha"]
        assert 1 <= len(rows) <= 4
        assert all(1 <= len(row) <= 4 for row in rows)
        assert all(0 <= v <= 3 for row in rows for v in row)
        assert sorted(inst["sigma"]) == list(range(1, len(rows) + 1))
        mu = inst["mu"]
        assert all(a > b for a, b in zip(mu, mu[1:]))
        assert all(1 <= m <= 9 for m in mu)
        assert 0 <= inst["p"] <= min(len(rows), len(rows[0]))
