"""HTTP service tests via the in-process ASGI test client."""

import warnings

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")  # the test client import warns about httpx pinning
    from starlette.testclient import TestClient

import sfqclock
from sfqclock.service import create_app

from conftest import bench_text


@pytest.fixture(scope="module")
def client():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DeprecationWarning)
        with TestClient(create_app(), raise_server_exceptions=False) as c:
            yield c


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json() == {"status": "ok", "version": sfqclock.__version__}


def test_compile_returns_report_and_netlist(client):
    r = client.post(
        "/compile",
        json={
            "source": bench_text("s27"),
            "name": "s27",
            "n_phases": 2,
            "verify_vectors": 30,
        },
    )
    assert r.status_code == 200, r.text
    body = r.json()
    assert body["report"]["circuit"]["name"] == "s27"
    assert body["report"]["verify"]["ok"] is True
    assert body["report"]["assignment"]["inserted"] >= 0
    assert "PHASES 2" in body["netlist"]
    assert body["lp_text"] is None


def test_compile_can_export_the_program(client):
    r = client.post(
        "/compile",
        json={
            "source": bench_text("c17"),
            "name": "c17",
            "n_phases": 2,
            "verify_vectors": None,
            "include_netlist": False,
            "export_lp": True,
        },
    )
    assert r.status_code == 200, r.text
    body = r.json()
    assert body["netlist"] is None
    assert body["lp_text"].startswith("\\")
    assert "Minimize" in body["lp_text"]
    assert body["lp_text"].rstrip().endswith("End")


def test_compile_rejects_bad_netlist_as_user_error(client):
    r = client.post("/compile", json={"source": "INPUT(a\n"})
    assert r.status_code == 422
    assert "line 1" in r.json()["detail"]


def test_compile_rejects_bad_mode_as_user_error(client):
    r = client.post("/compile", json={"source": bench_text("c17"), "mode": "warp"})
    assert r.status_code == 422


def test_compile_validates_parameter_types(client):
    r = client.post("/compile", json={"source": bench_text("c17"), "n_phases": 0})
    assert r.status_code == 422  # pydantic bound, never reaches the flow


def test_compile_then_verify_round_trip(client):
    compiled = client.post(
        "/compile",
        json={
            "source": bench_text("s27"),
            "name": "s27",
            "n_phases": 2,
            "verify_vectors": None,
        },
    )
    assert compiled.status_code == 200
    r = client.post(
        "/verify",
        json={
            "source": bench_text("s27"),
            "annotated": compiled.json()["netlist"],
            "name": "s27",
            "vectors_per_thread": 40,
        },
    )
    assert r.status_code == 200, r.text
    body = r.json()
    assert body["ok"] is True
    assert body["mismatches"] == 0
    assert body["compared_bits"] == body["threads"] * 40 * 1  # s27 has one output


def test_verify_flags_tampered_netlist(client):
    compiled = client.post(
        "/compile",
        json={
            "source": bench_text("c17"),
            "name": "c17",
            "n_phases": 2,
            "verify_vectors": None,
        },
    )
    text = compiled.json()["netlist"]
    tampered = text.replace("NAND", "NOR", 1)
    r = client.post(
        "/verify",
        json={
            "source": bench_text("c17"),
            "annotated": tampered,
            "vectors_per_thread": 30,
        },
    )
    assert r.status_code == 200
    body = r.json()
    assert body["ok"] is False
    assert body["mismatches"] > 0
    assert body["first_mismatch"]


def test_verify_rejects_unannotated_text(client):
    r = client.post(
        "/verify",
        json={"source": bench_text("c17"), "annotated": bench_text("c17")},
    )
    assert r.status_code == 422


def test_batch_endpoint(client):
    r = client.post(
        "/batch",
        json={
            "circuits": [
                {"name": "c17", "source": bench_text("c17")},
                {"name": "s27", "source": bench_text("s27")},
            ],
            "n_phases": 2,
            "verify_vectors": 20,
        },
    )
    assert r.status_code == 200, r.text
    report = r.json()["report"]
    assert len(report["circuits"]) == 2
    assert report["totals"]["verified_ok"] is True
    assert report["totals"]["inserted"] == sum(
        c["assignment"]["inserted"] for c in report["circuits"]
    )


def test_batch_requires_at_least_one_circuit(client):
    r = client.post("/batch", json={"circuits": []})
    assert r.status_code == 422
