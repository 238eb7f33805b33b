import numpy as np
import pytest
from fastapi.testclient import TestClient

from delayprop.inference import posterior
from delayprop.jsonio import dump_network
from delayprop.network import (ConditionalTable, NetworkSpec, NodeSpec,
                               build_network, train_network)
from delayprop.service import create_app
from delayprop.synth import default_scenario, generate


@pytest.fixture(scope="module")
def setup(tmp_path_factory):
    gt = default_scenario()
    data = generate(gt, 400, 3)
    trained = train_network(build_network(gt.network.spec), data.cases, 30.0)
    doc_bytes = (dump_network(trained) + "\n").encode()
    model_dir = tmp_path_factory.mktemp("models")
    client = TestClient(create_app(str(model_dir)))
    resp = client.post("/models", files={
        "model": ("model.json", doc_bytes, "application/json")})
    assert resp.status_code == 201
    model_id = resp.json()["id"]
    return client, model_id, trained


def test_upload_and_list(setup):
    client, model_id, _ = setup
    listing = client.get("/models").json()
    assert any(m["id"] == model_id for m in listing["models"])


def test_upload_is_idempotent(setup):
    client, model_id, trained = setup
    doc_bytes = (dump_network(trained) + "\n").encode()
    again = client.post("/models", files={
        "model": ("model.json", doc_bytes, "application/json")})
    assert again.json()["id"] == model_id


def test_bad_model_document_422(setup):
    client, _, _ = setup
    resp = client.post("/models", files={
        "model": ("bad.json", b'{"nodes": "garbage"}', "application/json")})
    assert resp.status_code == 422


def test_graph_endpoint(setup):
    client, model_id, trained = setup
    graph = client.get(f"/models/{model_id}/graph").json()
    nodes = {n["name"]: n for n in graph["nodes"]}
    assert set(nodes) == set(trained.node_names)
    gid = nodes["gate_in_dest"]
    assert gid["kind"] == "binned"
    assert "[15,30)" in gid["states"]
    assert nodes["weather_dest"]["kind"] == "categorical"
    assert nodes["taxi_out"]["parents"] == ["gate_out", "dep_queue"]


def test_graph_unknown_model_404(setup):
    client, _, _ = setup
    assert client.get("/models/nope/graph").status_code == 404


class TestQuery:
    def test_empty_evidence_prior_marginals(self, setup):
        client, model_id, trained = setup
        resp = client.post(f"/models/{model_id}/query", json={"evidence": {}})
        assert resp.status_code == 200
        got = resp.json()
        want = posterior(trained, {}, None)
        for node in trained.node_names:
            assert np.allclose(got["posteriors"][node],
                               want.posteriors[node], atol=1e-12)

    def test_interval_evidence_matches_direct_call(self, setup):
        client, model_id, trained = setup
        body = {"evidence": {"gate_in_dest": ["[15,30)"]}}
        got = client.post(f"/models/{model_id}/query", json=body).json()
        want = posterior(trained, {"gate_in_dest": ["[15,30)"]}, None)
        for node in trained.node_names:
            assert np.allclose(got["posteriors"][node],
                               want.posteriors[node], atol=1e-12)
        assert set(got["expected"]) == {
            n for n in trained.node_names if trained.node(n).is_binned}

    def test_repeated_query_byte_identical(self, setup):
        client, model_id, _ = setup
        body = {"evidence": {"weather_dest": ["storm"]}}
        a = client.post(f"/models/{model_id}/query", json=body)
        b = client.post(f"/models/{model_id}/query", json=body)
        assert a.content == b.content

    def test_unknown_node_422(self, setup):
        client, model_id, _ = setup
        resp = client.post(f"/models/{model_id}/query",
                           json={"evidence": {"wat": [0]}})
        assert resp.status_code == 422

    def test_unknown_state_422(self, setup):
        client, model_id, _ = setup
        resp = client.post(f"/models/{model_id}/query",
                           json={"evidence": {"weather_dest": ["sunny-ish"]}})
        assert resp.status_code == 422

    def test_unknown_model_404(self, setup):
        client, _, _ = setup
        assert client.post("/models/zzz/query", json={}).status_code == 404

    def test_zero_probability_evidence_409(self, setup):
        client, _, _ = setup
        spec = NetworkSpec(nodes=[NodeSpec("A", states=("0", "1"))])
        net = build_network(spec).with_tables({
            "A": ConditionalTable("A", (), (), np.array([[1.0, 0.0]]))})
        resp = client.post("/models", files={
            "model": ("m.json", dump_network(net).encode(), "application/json")})
        mid = resp.json()["id"]
        resp = client.post(f"/models/{mid}/query",
                           json={"evidence": {"A": ["1"]}})
        assert resp.status_code == 409

    def test_latency_budget(self, setup):
        import time
        client, model_id, _ = setup
        body = {"evidence": {"gate_in_dest": ["[60,inf)"]}}
        start = time.perf_counter()
        resp = client.post(f"/models/{model_id}/query", json=body)
        elapsed = time.perf_counter() - start
        assert resp.status_code == 200
        assert elapsed < 0.2


class TestScenarios:
    def test_create_list_delete(self, setup):
        client, model_id, _ = setup
        base = f"/models/{model_id}/scenarios"
        resp = client.post(base, json={
            "name": "light", "evidence": {"gate_in_dest": ["[15,30)"]}})
        assert resp.status_code == 201
        listing = client.get(base).json()
        assert any(s["id"] == "light" for s in listing["scenarios"])
        assert client.delete(f"{base}/light").status_code == 200
        listing = client.get(base).json()
        assert not any(s["id"] == "light" for s in listing["scenarios"])

    def test_create_with_bad_evidence_422(self, setup):
        client, model_id, _ = setup
        resp = client.post(f"/models/{model_id}/scenarios", json={
            "name": "bad", "evidence": {"gate_in_dest": ["[1,2)"]}})
        assert resp.status_code == 422

    def test_compare_equals_independent_queries(self, setup):
        client, model_id, trained = setup
        base = f"/models/{model_id}/scenarios"
        scenarios = {
            "s1": {"gate_in_dest": ["[15,30)"]},
            "s2": {"gate_in_dest": ["[30,60)"]},
            "s3": {"gate_in_dest": ["[60,inf)"]},
        }
        for name, ev in scenarios.items():
            assert client.post(base, json={"name": name, "evidence": ev}
                               ).status_code == 201
        resp = client.post(f"{base}/compare",
                           json={"scenarios": ["s1", "s2", "s3"]})
        assert resp.status_code == 200
        comparison = resp.json()["comparison"]
        assert [c["id"] for c in comparison] == ["s1", "s2", "s3"]
        for entry in comparison:
            direct = client.post(f"/models/{model_id}/query",
                                 json={"evidence": scenarios[entry["id"]]}).json()
            assert entry["posteriors"] == direct["posteriors"]

    def test_compare_missing_scenario_404(self, setup):
        client, model_id, _ = setup
        resp = client.post(f"/models/{model_id}/scenarios/compare",
                           json={"scenarios": ["ghost"]})
        assert resp.status_code == 404

    def test_compare_deleted_scenario_404(self, setup):
        client, model_id, _ = setup
        base = f"/models/{model_id}/scenarios"
        client.post(base, json={"name": "doomed",
                                "evidence": {"weather_dest": ["clear"]}})
        client.delete(f"{base}/doomed")
        resp = client.post(f"{base}/compare", json={"scenarios": ["doomed"]})
        assert resp.status_code == 404

    def test_compare_limit_five(self, setup):
        client, model_id, _ = setup
        resp = client.post(f"/models/{model_id}/scenarios/compare",
                           json={"scenarios": ["a", "b", "c", "d", "e", "f"]})
        assert resp.status_code == 422


def test_http_answer_is_bitwise_canonical_json_of_direct_call(setup):
    client, model_id, trained = setup
    from delayprop.jsonio import canonical_json, dump_network, load_network

    # The service answers from the uploaded document, so the direct call
    # must use the same serialized model, not the pre-serialization object.
    loaded = load_network(dump_network(trained))
    body = {"evidence": {"gate_in_dest": ["[15,30)"]},
            "query": ["taxi_out", "gate_out"]}
    resp = client.post(f"/models/{model_id}/query", json=body)
    want = posterior(loaded, body["evidence"], body["query"])
    doc = {"posteriors": {n: list(p) for n, p in want.posteriors.items()},
           "expected": want.expected,
           "evidence_logprob": want.evidence_logprob}
    assert resp.content == (canonical_json(doc) + "\n").encode()


def test_cli_query_and_http_query_agree(setup, tmp_path):
    import json as jsonlib

    from delayprop.cli import main
    from delayprop.jsonio import dump_network

    client, model_id, trained = setup
    model_path = tmp_path / "model.json"
    model_path.write_text(dump_network(trained) + "\n")
    q = tmp_path / "q.json"
    body = {"evidence": {"weather_dest": ["storm"]}, "query": ["taxi_out"]}
    q.write_text(jsonlib.dumps(body))
    out = tmp_path / "out.json"
    assert main(["query", "--model", str(model_path), "--query", str(q),
                 "--out", str(out)]) == 0
    http = client.post(f"/models/{model_id}/query", json=body)
    assert out.read_bytes() == http.content


def test_model_dir_persistence(tmp_path):
    gt = default_scenario()
    net = build_network(gt.network.spec)
    doc = dump_network(net).encode()
    first = TestClient(create_app(str(tmp_path)))
    model_id = first.post("/models", files={
        "model": ("m.json", doc, "application/json")}).json()["id"]
    # A new service instance picks the model up from the directory.
    second = TestClient(create_app(str(tmp_path)))
    listing = second.get("/models").json()
    assert any(m["id"] == model_id for m in listing["models"])
