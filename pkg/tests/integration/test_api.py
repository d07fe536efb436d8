import os

import pytest
from fastapi.testclient import TestClient

from src.main import app


@pytest.fixture
def client():
    return TestClient(app)


@pytest.fixture
def ratings_file(tmp_path):
    path = tmp_path / "u.data"
    rows = [f"{i}\t{j}\t{1 + (i * j) % 5}\t0" for i in range(1, 11) for j in range(1, 9)]
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return str(path)


def test_root_lists_endpoints(client):
    body = client.get("/").json()
    assert body["run"] == "/experiments/run"
    assert body["health"] == "/experiments/health"


def test_health(client):
    assert client.get("/experiments/health").json() == {"status": "healthy", "service": "experiments"}


def test_builtin_scenario(client):
    response = client.get("/simulation/scenarios/7")
    assert response.status_code == 200
    body = response.json()
    assert (body["k"], body["n_users"], body["n_items"], body["S"]) == (7, 300, 200, 5)
    assert len(body["mu"]) == 7 and len(body["mu"][0][0]) == 5


def test_unknown_scenario(client):
    assert client.get("/simulation/scenarios/6").status_code == 404


def test_run_fit(client, tmp_path, ratings_file):
    out = str(tmp_path / "fit")
    response = client.post("/experiments/run", json={
        "command": "fit", "data_path": ratings_file, "K": 2, "L": 2, "max_iters": 10,
        "train_fraction": 0.5, "output_dir": out,
    })
    assert response.status_code == 200
    body = response.json()
    assert body["success"] is True
    assert "BM2" in body["metrics"]
    assert body["details"]["n_train"] == 40
    assert os.path.exists(os.path.join(out, "mu.txt"))


def test_missing_data_is_404(client, tmp_path):
    response = client.post("/experiments/run", json={
        "command": "fit", "data_path": str(tmp_path / "none.data"), "output_dir": str(tmp_path / "o"),
    })
    assert response.status_code == 404


def test_user_error_is_400(client, tmp_path, ratings_file):
    response = client.post("/experiments/run", json={
        "command": "fit", "data_path": ratings_file, "informative_prior": True,
        "output_dir": str(tmp_path / "o"),
    })
    assert response.status_code == 400
    assert "prior informativo" in response.json()["detail"]


def test_invalid_body_is_422(client):
    assert client.post("/experiments/run", json={"command": "cv", "scenario": 5}).status_code == 422
    assert client.post("/experiments/run", json={"command": "teleport"}).status_code == 422
