"""HTTP service backing the what-if explorer.

Models are immutable once loaded; uploading a document registers a fresh id
derived from its bytes, so retraining never mutates an existing model and
concurrent readers need no locking. Responses are canonical JSON (sorted
keys, fixed float formatting), which makes a repeated query byte-identical
and lets clients diff scenario comparisons directly.

Error mapping: 404 unknown model or scenario, 422 invalid evidence node or
state, 409 evidence with probability zero.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request, Response, UploadFile
from fastapi.responses import JSONResponse

from .inference import (EvidenceError, InconsistentEvidenceError,
                        normalize_evidence, posterior)
from .jsonio import FormatError, canonical_json, load_network, sha256_hex
from .network import Network


@dataclass
class LoadedModel:
    model_id: str
    network: Network
    config_hash: str
    created: float
    scenarios: dict[str, dict[str, list]] = field(default_factory=dict)


class ModelRegistry:
    def __init__(self, model_dir: Optional[str] = None):
        self.model_dir = Path(model_dir) if model_dir else None
        self.models: dict[str, LoadedModel] = {}
        if self.model_dir is not None and self.model_dir.is_dir():
            for path in sorted(self.model_dir.glob("*.json")):
                try:
                    self.register(path.read_bytes())
                except FormatError:
                    continue

    def register(self, data: bytes, persist: bool = False) -> LoadedModel:
        network = load_network(data.decode())
        digest = sha256_hex(data)
        model_id = digest[:12]
        if model_id not in self.models:
            self.models[model_id] = LoadedModel(
                model_id=model_id, network=network, config_hash=digest,
                created=time.time())
            if persist and self.model_dir is not None:
                self.model_dir.mkdir(parents=True, exist_ok=True)
                (self.model_dir / f"{model_id}.json").write_bytes(data)
        return self.models[model_id]

    def get(self, model_id: str) -> Optional[LoadedModel]:
        return self.models.get(model_id)


def _json(payload, status_code: int = 200) -> Response:
    return Response(content=canonical_json(payload) + "\n",
                    status_code=status_code, media_type="application/json")


def _error(status_code: int, message: str) -> Response:
    return _json({"error": message}, status_code=status_code)


def create_app(model_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="delayprop what-if service")
    registry = ModelRegistry(model_dir)
    app.state.registry = registry

    @app.get("/models")
    def list_models() -> Response:
        items = [{"id": m.model_id, "config_hash": m.config_hash,
                  "created": m.created, "n_scenarios": len(m.scenarios)}
                 for m in registry.models.values()]
        items.sort(key=lambda d: d["id"])
        return _json({"models": items})

    @app.post("/models")
    async def upload_model(model: UploadFile) -> Response:
        data = await model.read()
        try:
            loaded = registry.register(data, persist=True)
        except FormatError as exc:
            return _error(422, f"bad model document: {exc}")
        return _json({"id": loaded.model_id,
                      "config_hash": loaded.config_hash}, status_code=201)

    @app.get("/models/{model_id}/graph")
    def graph(model_id: str) -> Response:
        loaded = registry.get(model_id)
        if loaded is None:
            return _error(404, f"unknown model {model_id}")
        net = loaded.network
        nodes = []
        for name in net.node_names:
            node = net.node(name)
            entry = {"name": name, "parents": net.spec.parent_list(name),
                     "states": node.labels,
                     "kind": "binned" if node.is_binned else "categorical"}
            if node.is_binned:
                entry["bins"] = {"edges": list(node.bins.edges),
                                 "lower_open": node.bins.lower_open,
                                 "upper_open": node.bins.upper_open,
                                 "midpoints": list(node.bins.midpoints())}
            nodes.append(entry)
        return _json({"id": model_id, "nodes": nodes})

    def _run_query(net: Network, evidence, query_nodes):
        result = posterior(net, evidence, query_nodes)
        return {
            "posteriors": {n: list(p) for n, p in result.posteriors.items()},
            "expected": result.expected,
            "evidence_logprob": result.evidence_logprob,
        }

    @app.post("/models/{model_id}/query")
    async def query(model_id: str, request: Request) -> Response:
        loaded = registry.get(model_id)
        if loaded is None:
            return _error(404, f"unknown model {model_id}")
        try:
            body = await request.json()
        except json.JSONDecodeError as exc:
            return _error(422, f"body is not JSON: {exc}")
        if not isinstance(body, dict):
            return _error(422, "body must be a JSON object")
        try:
            payload = _run_query(loaded.network, body.get("evidence", {}),
                                 body.get("query"))
        except EvidenceError as exc:
            return _error(422, str(exc))
        except InconsistentEvidenceError as exc:
            return _error(409, str(exc))
        return _json(payload)

    @app.get("/models/{model_id}/scenarios")
    def list_scenarios(model_id: str) -> Response:
        loaded = registry.get(model_id)
        if loaded is None:
            return _error(404, f"unknown model {model_id}")
        items = [{"id": sid, "evidence": ev}
                 for sid, ev in sorted(loaded.scenarios.items())]
        return _json({"scenarios": items})

    @app.post("/models/{model_id}/scenarios")
    async def create_scenario(model_id: str, request: Request) -> Response:
        loaded = registry.get(model_id)
        if loaded is None:
            return _error(404, f"unknown model {model_id}")
        try:
            body = await request.json()
        except json.JSONDecodeError as exc:
            return _error(422, f"body is not JSON: {exc}")
        name = body.get("name")
        if not name or not isinstance(name, str):
            return _error(422, "scenario needs a string 'name'")
        evidence = body.get("evidence", {})
        try:
            normalize_evidence(loaded.network, evidence)
        except EvidenceError as exc:
            return _error(422, str(exc))
        loaded.scenarios[name] = {n: list(s) for n, s in evidence.items()}
        return _json({"id": name, "evidence": loaded.scenarios[name]},
                     status_code=201)

    @app.delete("/models/{model_id}/scenarios/{scenario_id}")
    def delete_scenario(model_id: str, scenario_id: str) -> Response:
        loaded = registry.get(model_id)
        if loaded is None:
            return _error(404, f"unknown model {model_id}")
        if scenario_id not in loaded.scenarios:
            return _error(404, f"unknown scenario {scenario_id}")
        del loaded.scenarios[scenario_id]
        return _json({"deleted": scenario_id})

    @app.post("/models/{model_id}/scenarios/compare")
    async def compare(model_id: str, request: Request) -> Response:
        loaded = registry.get(model_id)
        if loaded is None:
            return _error(404, f"unknown model {model_id}")
        try:
            body = await request.json()
        except json.JSONDecodeError as exc:
            return _error(422, f"body is not JSON: {exc}")
        ids = body.get("scenarios")
        if not isinstance(ids, list) or not ids:
            return _error(422, "body needs a nonempty 'scenarios' list")
        if len(ids) > 5:
            return _error(422, "compare supports at most 5 scenarios")
        missing = [s for s in ids if s not in loaded.scenarios]
        if missing:
            return _error(404, f"unknown scenarios: {', '.join(missing)}")
        query_nodes = body.get("query")
        results = []
        for sid in ids:
            try:
                payload = _run_query(loaded.network, loaded.scenarios[sid],
                                     query_nodes)
            except EvidenceError as exc:
                return _error(422, f"scenario {sid}: {exc}")
            except InconsistentEvidenceError as exc:
                return _error(409, f"scenario {sid}: {exc}")
            results.append({"id": sid, "evidence": loaded.scenarios[sid],
                            **payload})
        return _json({"comparison": results})

    @app.exception_handler(Exception)
    async def fallback(request: Request, exc: Exception) -> JSONResponse:
        return JSONResponse(status_code=500, content={"error": str(exc)})

    return app
