"""Exact inference over trained networks.

Queries run variable elimination with a min-fill ordering (lexicographic
tie-break, so repeated queries are bit-identical). Evidence is a map from
node to an admissible state set: a singleton pins the node, a larger set is
an interval finding applied as a 0/1 indicator factor. Forward sampling and
per-case log-likelihood use the same posterior-mean tables, so a sampled
dataset scores exactly the likelihood the tables imply.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .discretize import BinScheme
from .network import Network


class EvidenceError(ValueError):
    """Evidence references unknown nodes/states or an empty admissible set."""


class InconsistentEvidenceError(ValueError):
    """The evidence has probability zero under the model."""


@dataclass(frozen=True)
class Factor:
    vars: tuple[str, ...]
    values: np.ndarray

    def marginalize(self, var: str) -> "Factor":
        axis = self.vars.index(var)
        return Factor(self.vars[:axis] + self.vars[axis + 1:],
                      self.values.sum(axis=axis))


def factor_product(a: Factor, b: Factor) -> Factor:
    out_vars = a.vars + tuple(v for v in b.vars if v not in a.vars)
    return Factor(out_vars, _aligned(a, out_vars) * _aligned(b, out_vars))


def _aligned(f: Factor, out_vars: tuple[str, ...]) -> np.ndarray:
    """View of f.values broadcastable against the out_vars axis order."""
    present = [v for v in out_vars if v in f.vars]
    values = np.transpose(f.values, [f.vars.index(v) for v in present])
    sizes = iter(values.shape)
    shape = [next(sizes) if v in f.vars else 1 for v in out_vars]
    return values.reshape(shape)


def cpt_factor(network: Network, node: str) -> Factor:
    table = network.tables[node]
    shape = table.parent_cards + (table.n_states,)
    return Factor(table.parents + (node,),
                  table.probabilities().reshape(shape))


@dataclass
class PosteriorSet:
    """Per-node posterior vectors plus midpoint-weighted expectations."""

    posteriors: dict[str, np.ndarray]
    expected: dict[str, float]
    evidence_logprob: float


def normalize_evidence(network: Network,
                       evidence: Mapping[str, Iterable]) -> dict[str, list[int]]:
    """Resolve state labels or indices into sorted index lists, validating
    against each node's state space."""
    out: dict[str, list[int]] = {}
    for name, states in evidence.items():
        if name not in network.node_names:
            raise EvidenceError(f"unknown node {name!r}")
        labels = network.node(name).labels
        card = network.cardinality(name)
        idx: set[int] = set()
        for s in states:
            if isinstance(s, str):
                if s not in labels:
                    raise EvidenceError(f"node {name!r}: unknown state {s!r}")
                idx.add(labels.index(s))
            else:
                k = int(s)
                if not 0 <= k < card:
                    raise EvidenceError(f"node {name!r}: state index {k} out of range")
                idx.add(k)
        if not idx:
            raise EvidenceError(f"node {name!r}: empty admissible set")
        out[name] = sorted(idx)
    return out


def posterior(network: Network, evidence: Mapping[str, Iterable],
              query_nodes: Optional[Sequence[str]] = None) -> PosteriorSet:
    """Exact marginals for the query nodes given interval evidence.

    Raises InconsistentEvidenceError when the evidence has zero probability
    rather than returning NaNs.
    """
    ev = normalize_evidence(network, evidence)
    if query_nodes is None:
        query_nodes = network.node_names
    unknown = [q for q in query_nodes if q not in network.node_names]
    if unknown:
        raise EvidenceError(f"unknown query nodes {unknown}")

    base_factors = [cpt_factor(network, n) for n in network.node_names]
    for name, idx in ev.items():
        indicator = np.zeros(network.cardinality(name))
        indicator[idx] = 1.0
        base_factors.append(Factor((name,), indicator))

    posteriors: dict[str, np.ndarray] = {}
    expected: dict[str, float] = {}
    logprob: Optional[float] = None
    for q in query_nodes:
        marginal = _eliminate_to(base_factors, q, network)
        z = float(marginal.sum())
        if z <= 0.0:
            raise InconsistentEvidenceError("evidence has probability zero")
        if logprob is None:
            logprob = float(np.log(z))
        p = marginal / z
        posteriors[q] = p
        node = network.node(q)
        if node.is_binned:
            expected[q] = expected_value(p, node.bins)
    if logprob is None:
        # No query nodes: still report the evidence probability.
        first = network.node_names[0]
        z = float(_eliminate_to(base_factors, first, network).sum())
        if z <= 0.0:
            raise InconsistentEvidenceError("evidence has probability zero")
        logprob = float(np.log(z))
    return PosteriorSet(posteriors=posteriors, expected=expected,
                        evidence_logprob=logprob)


def _eliminate_to(factors: list[Factor], keep: str, network: Network) -> np.ndarray:
    """Sum out everything but ``keep``; returns its unnormalized vector."""
    order = min_fill_order([f.vars for f in factors],
                           exclude={keep})
    live = list(factors)
    for var in order:
        with_var = [f for f in live if var in f.vars]
        if not with_var:
            continue
        product = with_var[0]
        for f in with_var[1:]:
            product = factor_product(product, f)
        live = [f for f in live if var not in f.vars]
        live.append(product.marginalize(var))
    result = Factor((), np.array(1.0))
    for f in live:
        result = factor_product(result, f)
    if result.vars != (keep,):
        raise AssertionError(f"elimination left scope {result.vars}")
    return result.values


def min_fill_order(scopes: Sequence[tuple[str, ...]],
                   exclude: set[str] = frozenset()) -> list[str]:
    """Greedy min-fill elimination order with lexicographic tie-break."""
    adj: dict[str, set[str]] = {}
    for scope in scopes:
        for v in scope:
            adj.setdefault(v, set())
            for u in scope:
                if u != v:
                    adj[v].add(u)
    remaining = sorted(v for v in adj if v not in exclude)
    order: list[str] = []
    while remaining:
        best_var, best_fill = None, None
        for v in remaining:
            nbrs = [u for u in adj[v] if u in remaining or u in exclude]
            fill = sum(1 for i, a in enumerate(nbrs) for b in nbrs[i + 1:]
                       if b not in adj[a])
            if best_fill is None or fill < best_fill:
                best_var, best_fill = v, fill
        v = best_var
        nbrs = [u for u in adj[v] if u != v]
        for a in nbrs:
            for b in nbrs:
                if a != b:
                    adj[a].add(b)
            adj[a].discard(v)
        order.append(v)
        remaining.remove(v)
    return order


def expected_value(p: Sequence[float], scheme: BinScheme) -> float:
    """Midpoint-weighted mean of a posterior vector over a bin scheme."""
    p = np.asarray(p, dtype=float)
    if p.shape[0] != scheme.n_bins:
        raise ValueError(f"vector length {p.shape[0]} != bin count {scheme.n_bins}")
    return float(p @ scheme.midpoints())


def map_state(p: Sequence[float]) -> int:
    """Most probable state; ties break toward the lower index."""
    p = np.asarray(p, dtype=float)
    if p.size == 0:
        raise ValueError("empty posterior vector")
    return int(np.argmax(p))


def forward_sample(network: Network, n: int, seed: int) -> list[dict[str, int]]:
    """Ancestral sampling in topological order, reproducible per seed."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    states = sample_states(network, n, np.random.default_rng(seed))
    names = list(states)
    return [{name: int(states[name][i]) for name in names} for i in range(n)]


def sample_states(network: Network, n: int,
                  rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Vectorized ancestral sampling; returns per-node index arrays."""
    out: dict[str, np.ndarray] = {}
    for name in network.topo_order:
        table = network.tables[name]
        probs = table.probabilities()
        if table.parents:
            idx = np.stack([out[p] for p in table.parents])
            rows = np.ravel_multi_index(idx, table.parent_cards)
        else:
            rows = np.zeros(n, dtype=np.intp)
        cum = np.cumsum(probs[rows], axis=1)
        u = rng.random(n)
        idx = (u[:, None] > cum).sum(axis=1).astype(np.intp)
        out[name] = np.minimum(idx, probs.shape[1] - 1)
    return out


def log_likelihood(network: Network, case: Mapping[str, int],
                   floor: Optional[float] = None) -> float:
    """Sum of ln P(state | parent states) over all nodes.

    Zero-probability entries yield -inf, reported as-is; pass ``floor`` to
    clamp probabilities from below (plotting convenience only).
    """
    total = 0.0
    for name in network.node_names:
        table = network.tables[name]
        if name not in case:
            raise ValueError(f"case does not assign node {name!r}")
        row = table.row_index([case[p] for p in table.parents])
        counts = table.pseudo[row]
        p = counts[case[name]] / counts.sum()
        if floor is not None:
            p = max(p, floor)
        if p <= 0.0:
            return float("-inf")
        total += float(np.log(p))
    return total


def blanket_posterior(network: Network, case: Mapping[str, int],
                      node: str) -> np.ndarray:
    """P(node | its Markov blanket assignment), computed in closed form.

    Multiplies the node's own CPT row by each child's likelihood column;
    values of nodes outside the blanket never enter.
    """
    table = network.tables[node]
    for p in table.parents:
        if p not in case:
            raise ValueError(f"blanket of {node!r} needs {p!r}")
    row = table.row_index([case[p] for p in table.parents])
    weights = table.probabilities()[row].copy()

    k = network.cardinality(node)
    for child in network.children(node):
        ctab = network.tables[child]
        if child not in case:
            raise ValueError(f"blanket of {node!r} needs child {child!r}")
        probs = ctab.probabilities()
        for s in range(k):
            parent_states = []
            for p in ctab.parents:
                if p == node:
                    parent_states.append(s)
                elif p in case:
                    parent_states.append(case[p])
                else:
                    raise ValueError(f"blanket of {node!r} needs {p!r}")
            weights[s] *= probs[ctab.row_index(parent_states), case[child]]
    z = weights.sum()
    if z <= 0.0:
        raise InconsistentEvidenceError(
            f"blanket assignment around {node!r} has probability zero")
    return weights / z


def markov_blanket_mean(network: Network, case: Mapping[str, int],
                        node: str) -> float:
    """Expected value of a binned node given its Markov blanket."""
    spec = network.node(node)
    if not spec.is_binned:
        raise ValueError(f"node {node!r} is categorical, no midpoint mean")
    return expected_value(blanket_posterior(network, case, node), spec.bins)


def blanket_posteriors_batch(network: Network,
                             cases: Sequence[Mapping[str, int]],
                             node: str) -> np.ndarray:
    """Vectorized blanket_posterior over many cases.

    Returns an (n_cases, n_states) array of unnormalized-then-normalized
    posteriors; rows whose blanket assignment has probability zero come back
    as all-NaN rather than raising, so bulk evaluations can skip and count
    them.
    """
    n = len(cases)
    table = network.tables[node]
    k = table.n_states
    if n == 0:
        return np.empty((0, k))

    def column(var: str) -> np.ndarray:
        return np.array([c[var] for c in cases], dtype=np.intp)

    if table.parents:
        rows = np.ravel_multi_index([column(p) for p in table.parents],
                                    table.parent_cards)
    else:
        rows = np.zeros(n, dtype=np.intp)
    weights = table.probabilities()[rows].copy()

    for child in network.children(node):
        ctab = network.tables[child]
        probs = ctab.probabilities()
        child_states = column(child)
        parent_cols = {}
        for p in ctab.parents:
            if p != node:
                parent_cols[p] = column(p)
        for s in range(k):
            idx = [np.full(n, s, dtype=np.intp) if p == node else parent_cols[p]
                   for p in ctab.parents]
            crow = np.ravel_multi_index(idx, ctab.parent_cards)
            weights[:, s] *= probs[crow, child_states]
    z = weights.sum(axis=1, keepdims=True)
    out = np.full_like(weights, np.nan)
    good = z[:, 0] > 0.0
    out[good] = weights[good] / z[good]
    return out
