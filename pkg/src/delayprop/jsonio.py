"""Canonical JSON and the network-config / trained-model document format.

One document carries both the configuration and the learned state:

    {
      "nodes": [{"name", "bins"|"states", "parents", "prior"}],
      "case_weight": w,
      "tables": [{"node", "rows": [[pseudo-counts]]}]
    }

Row order inside a table is lexicographic over parent states with the first
parent most significant; that ordering is part of the format. Canonical
serialization (sorted keys, floats at 12 significant digits) makes equal
models byte-equal, which the CLI determinism and service contracts rely on.
"""

from __future__ import annotations

import hashlib
import json
import math

import numpy as np

from .discretize import BinScheme
from .network import (ConditionalTable, Network, NetworkSpec, NodeSpec,
                      build_network)
from .regression import PiecewiseRegression, RegressionTerm


class FormatError(ValueError):
    """Document does not match the model JSON schema."""


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, 12-significant-digit floats."""
    parts: list[str] = []
    _write(obj, parts)
    return "".join(parts)


def _write(obj, parts: list[str]) -> None:
    if obj is None:
        parts.append("null")
    elif isinstance(obj, bool) or isinstance(obj, np.bool_):
        parts.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        parts.append(_fmt_float(float(obj)))
    elif isinstance(obj, str):
        parts.append(_quote(obj))
    elif isinstance(obj, dict):
        parts.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                parts.append(",")
            if not isinstance(key, str):
                raise TypeError(f"non-string key {key!r}")
            parts.append(_quote(key))
            parts.append(":")
            _write(obj[key], parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        parts.append("[")
        for i, item in enumerate(obj):
            if i:
                parts.append(",")
            _write(item, parts)
        parts.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite float in canonical JSON")
    if x == int(x) and abs(x) < 1e15:
        return f"{int(x)}.0"
    return f"{x:.12g}"


def _quote(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


# --- bin schemes ---

def bins_to_doc(s: BinScheme) -> dict:
    return {"edges": list(s.edges), "lower_open": s.lower_open,
            "upper_open": s.upper_open, "tail_halfwidth": s.tail_halfwidth}


def bins_from_doc(doc: dict) -> BinScheme:
    try:
        return BinScheme(edges=tuple(doc["edges"]),
                         lower_open=bool(doc["lower_open"]),
                         upper_open=bool(doc["upper_open"]),
                         tail_halfwidth=float(doc["tail_halfwidth"]))
    except (KeyError, ValueError, TypeError) as exc:
        raise FormatError(f"bad bin scheme: {exc}") from exc


# --- regression models ---

def regression_to_doc(m: PiecewiseRegression) -> dict:
    terms = []
    for t in m.terms:
        d = {"var": t.var, "kind": t.kind}
        if t.kind == "categorical":
            d["levels"] = dict(t.levels)
        else:
            d["slope"] = t.slope
            if t.kind == "hinge":
                d["breakpoint"] = t.breakpoint
                d["hinge_slope"] = t.hinge_slope
        terms.append(d)
    return {"response": m.response, "intercept": m.intercept, "terms": terms,
            "sigma": m.sigma, "cv_score": m.cv_score}


def regression_from_doc(doc: dict) -> PiecewiseRegression:
    try:
        terms = []
        for d in doc["terms"]:
            kind = d["kind"]
            if kind == "categorical":
                terms.append(RegressionTerm(var=d["var"], kind=kind,
                                            levels={k: float(v) for k, v
                                                    in d["levels"].items()}))
            elif kind == "hinge":
                terms.append(RegressionTerm(var=d["var"], kind=kind,
                                            slope=float(d["slope"]),
                                            breakpoint=float(d["breakpoint"]),
                                            hinge_slope=float(d["hinge_slope"])))
            elif kind == "linear":
                terms.append(RegressionTerm(var=d["var"], kind=kind,
                                            slope=float(d["slope"])))
            else:
                raise FormatError(f"unknown term kind {kind!r}")
        return PiecewiseRegression(response=doc["response"],
                                   intercept=float(doc["intercept"]),
                                   terms=tuple(terms),
                                   sigma=float(doc["sigma"]),
                                   cv_score=float(doc.get("cv_score", 0.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad regression model: {exc}") from exc


# --- network spec and trained model ---

def spec_to_doc(spec: NetworkSpec) -> dict:
    nodes = []
    for n in spec.nodes:
        d: dict = {"name": n.name, "parents": spec.parent_list(n.name)}
        if n.is_binned:
            d["bins"] = bins_to_doc(n.bins)
        else:
            d["states"] = list(n.states)
        model = spec.priors.get(n.name)
        if model is not None:
            d["prior"] = {"type": "regression", "model": regression_to_doc(model)}
        else:
            d["prior"] = {"type": "uniform"}
        nodes.append(d)
    return {"nodes": nodes, "case_weight": spec.case_weight}


def spec_from_doc(doc: dict) -> NetworkSpec:
    try:
        nodes, parents, priors = [], {}, {}
        for d in doc["nodes"]:
            name = d["name"]
            if "bins" in d:
                nodes.append(NodeSpec(name=name, bins=bins_from_doc(d["bins"])))
            elif "states" in d:
                nodes.append(NodeSpec(name=name, states=tuple(d["states"])))
            else:
                raise FormatError(f"node {name}: needs bins or states")
            parents[name] = list(d.get("parents", []))
            prior = d.get("prior", {"type": "uniform"})
            if prior.get("type") == "regression":
                priors[name] = regression_from_doc(prior["model"])
            elif prior.get("type") != "uniform":
                raise FormatError(f"node {name}: unknown prior type")
        return NetworkSpec(nodes=nodes, parents=parents, priors=priors,
                           case_weight=float(doc.get("case_weight", 30.0)))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"bad network document: {exc}") from exc


def network_to_doc(network: Network) -> dict:
    doc = spec_to_doc(network.spec)
    doc["tables"] = [
        {"node": name, "rows": network.tables[name].pseudo.tolist()}
        for name in network.node_names
    ]
    return doc


def network_from_doc(doc: dict) -> Network:
    """Rebuild a network; explicit tables win over prior initialization."""
    spec = spec_from_doc(doc)
    if "tables" not in doc:
        return build_network(spec)
    spec.validate()
    by_node = {t["node"]: t for t in doc["tables"]}
    missing = {n.name for n in spec.nodes} - set(by_node)
    if missing:
        raise FormatError(f"tables missing for {sorted(missing)}")
    tables = {}
    for n in spec.nodes:
        parent_names = tuple(spec.parent_list(n.name))
        cards = tuple(spec.node(p).cardinality for p in parent_names)
        rows = np.asarray(by_node[n.name]["rows"], dtype=float)
        expected_shape = (int(np.prod(cards)) if cards else 1, n.cardinality)
        if rows.shape != expected_shape:
            raise FormatError(f"table {n.name}: shape {rows.shape} != "
                              f"{expected_shape}")
        tables[n.name] = ConditionalTable(node=n.name, parents=parent_names,
                                          parent_cards=cards, pseudo=rows)
    return Network(spec, tables)


def dump_network(network: Network) -> str:
    return canonical_json(network_to_doc(network))


def load_network(text: str) -> Network:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not valid JSON: {exc}") from exc
    return network_from_doc(doc)
