"""Model evaluation: confusion matrices, midpoint MSE, case-weight sweeps,
Markov-blanket squared error, and likelihood distribution comparison.

Predictions follow the confusion-matrix convention of the underlying BN
tools: each node is predicted by the most probable state of its posterior
given every other observed variable, which for a complete case reduces to
conditioning on the Markov blanket. The midpoint MSE scores those MAP bins
against the observed bins through the scheme's representative midpoints, so
open tail bins inherit the scheme's tail halfwidth.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .discretize import BinScheme
from .inference import (blanket_posteriors_batch, forward_sample,
                        log_likelihood, InconsistentEvidenceError)
from .network import Network, NetworkSpec, build_network, train_network

#: Approximate midpoint MSE per delay variable published for the original
#: ORD-ATL 2004 study (training, test). Not reproducible without the
#: proprietary ASPM extract; kept for side-by-side reporting only.
PUBLISHED_REFERENCE_MSE = {
    "turn_around": (267.2, 372.0),
    "taxi_out": (59.8, 77.6),
    "airborne": (86.9, 103.9),
    "taxi_in": (39.1, 37.1),
    "gate_in_dest": (170.4, 195.2),
}


def split_by_date(items: Sequence, cutoff: int,
                  key: Callable = None) -> tuple[list, list]:
    """Deterministic partition: before the cutoff trains, the rest tests."""
    if key is None:
        key = lambda item: item[0]
    train = [it for it in items if key(it) < cutoff]
    test = [it for it in items if key(it) >= cutoff]
    return train, test


def approx_mse(actual_bins: Sequence[int], predicted_bins: Sequence[int],
               scheme: BinScheme) -> float:
    """Mean squared difference of bin midpoints, in minutes squared."""
    if len(actual_bins) != len(predicted_bins):
        raise ValueError("actual and predicted sequences differ in length")
    if len(actual_bins) == 0:
        raise ValueError("approx_mse needs at least one case")
    mids = scheme.midpoints()
    a = mids[np.asarray(actual_bins, dtype=np.intp)]
    p = mids[np.asarray(predicted_bins, dtype=np.intp)]
    return float(np.mean((a - p) ** 2))


def confusion_matrix(actual_bins: Sequence[int], predicted_bins: Sequence[int],
                     n_states: int) -> np.ndarray:
    """Counts indexed (actual, predicted)."""
    m = np.zeros((n_states, n_states), dtype=int)
    for a, p in zip(actual_bins, predicted_bins):
        m[a, p] += 1
    return m


def scaled_mse(mse_by_weight: Mapping[float, float]) -> dict[float, float]:
    """Rescale a sweep's MSE values to [0, 1] over its own min and max."""
    values = list(mse_by_weight.values())
    if len(values) < 2:
        raise ValueError("scaled_mse needs at least 2 values")
    lo, hi = min(values), max(values)
    if hi == lo:
        raise ValueError("all MSE values are equal; nothing to scale")
    return {w: (v - lo) / (hi - lo) for w, v in mse_by_weight.items()}


def predict_map_bins(network: Network, cases: Sequence[Mapping[str, int]],
                     node: str) -> list[int]:
    """MAP state per case from the node's posterior given its Markov blanket.

    Ties break toward the lower state, matching map_state.
    """
    posts = blanket_posteriors_batch(network, cases, node)
    if np.isnan(posts).any():
        raise InconsistentEvidenceError(
            f"a case's blanket assignment around {node!r} has probability zero")
    return [int(i) for i in np.argmax(posts, axis=1)]


def node_mse(network: Network, cases: Sequence[Mapping[str, int]],
             node: str) -> float:
    scheme = network.node(node).bins
    actual = [case[node] for case in cases]
    predicted = predict_map_bins(network, cases, node)
    return approx_mse(actual, predicted, scheme)


@dataclass
class SweepResult:
    weights: list[float]
    nodes: list[str]
    train_mse: dict[str, dict[float, float]]   # node -> weight -> mse
    test_mse: dict[str, dict[float, float]]
    regression_only: dict[str, tuple[float, float]]  # node -> (train, test)
    counts_only: dict[str, tuple[float, float]]

    def total_train(self) -> dict[float, float]:
        return {w: float(np.mean([self.train_mse[n][w] for n in self.nodes]))
                for w in self.weights}

    def total_test(self) -> dict[float, float]:
        return {w: float(np.mean([self.test_mse[n][w] for n in self.nodes]))
                for w in self.weights}

    def scaled(self, which: str = "test") -> dict[str, dict[float, float]]:
        source = self.test_mse if which == "test" else self.train_mse
        out = {}
        for node in self.nodes:
            try:
                out[node] = scaled_mse(source[node])
            except ValueError:
                out[node] = {w: 0.0 for w in self.weights}
        return out


def weight_sweep(spec: NetworkSpec, train_cases: Sequence[Mapping[str, int]],
                 test_cases: Sequence[Mapping[str, int]],
                 weights: Sequence[float],
                 nodes: Optional[Sequence[str]] = None,
                 prior_strength: float = 1.0,
                 counts_only_weight: float = 30.0) -> SweepResult:
    """Retrain at each case weight and score midpoint MSE per binned node.

    ``prior_strength`` rescales every prior row's pseudo-count mass before
    updating. At the default 1.0 a single observed case already dominates
    its row at every grid weight, so the sweep only shows the bias/variance
    tradeoff between prior and data when the prior carries a nontrivial
    number of units per row.

    Two baselines bracket the sweep: the untouched prior tables (the zero-
    weight limit) and a uniform-prior model trained at a fixed weight, i.e.
    counting alone.
    """
    weights = [float(w) for w in weights]
    if not weights or any(w <= 0 for w in weights):
        raise ValueError("weights must be nonempty and positive")
    if prior_strength <= 0:
        raise ValueError("prior_strength must be positive")
    prior_net = build_network(spec)
    if prior_strength != 1.0:
        scaled = {name: replace(tab, pseudo=tab.pseudo * prior_strength)
                  for name, tab in prior_net.tables.items()}
        prior_net = prior_net.with_tables(scaled)
    if nodes is None:
        nodes = [n.name for n in spec.nodes if n.is_binned]
    else:
        nodes = list(nodes)

    train_mse: dict[str, dict[float, float]] = {n: {} for n in nodes}
    test_mse: dict[str, dict[float, float]] = {n: {} for n in nodes}
    for w in weights:
        model = train_network(prior_net, train_cases, w)
        for node in nodes:
            train_mse[node][w] = node_mse(model, train_cases, node)
            test_mse[node][w] = node_mse(model, test_cases, node)

    regression_only = {n: (node_mse(prior_net, train_cases, n),
                           node_mse(prior_net, test_cases, n)) for n in nodes}

    uniform_spec = NetworkSpec(
        nodes=list(spec.nodes),
        parents={k: list(v) for k, v in spec.parents.items()},
        priors={}, case_weight=spec.case_weight)
    counts_net = train_network(build_network(uniform_spec), train_cases,
                               counts_only_weight)
    counts_only = {n: (node_mse(counts_net, train_cases, n),
                       node_mse(counts_net, test_cases, n)) for n in nodes}

    return SweepResult(weights=weights, nodes=nodes, train_mse=train_mse,
                       test_mse=test_mse, regression_only=regression_only,
                       counts_only=counts_only)


def blanket_sq_error(network: Network, cases: Sequence[Mapping[str, int]],
                     nodes: Optional[Sequence[str]] = None
                     ) -> tuple[dict[str, float], dict[str, int]]:
    """Per-node mean squared gap between the observed midpoint and the
    conditional mean given the Markov blanket. Cases whose blanket
    configuration has zero probability are skipped and counted."""
    if nodes is None:
        nodes = [n for n in network.node_names if network.node(n).is_binned]
    scores: dict[str, float] = {}
    skipped: dict[str, int] = {}
    for node in nodes:
        mids = network.node(node).bins.midpoints()
        posts = blanket_posteriors_batch(network, cases, node)
        good = ~np.isnan(posts[:, 0])
        observed = mids[np.array([c[node] for c in cases], dtype=np.intp)]
        means = posts[good] @ mids
        errors = (observed[good] - means) ** 2
        scores[node] = float(errors.mean()) if errors.size else float("nan")
        skipped[node] = int((~good).sum())
    return scores, skipped


def ks_statistic(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sample Kolmogorov-Smirnov statistic (max ECDF gap)."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


@dataclass
class LikelihoodComparison:
    ll_holdout: list[float]
    ll_generated: list[float]
    ks: float
    n_holdout_neginf: int
    n_generated_neginf: int


def ll_comparison(network: Network, holdout: Sequence[Mapping[str, int]],
                  n_generated: int, seed: int) -> LikelihoodComparison:
    """Log-likelihoods of a holdout sample versus cases the model generates.

    Minus-infinity scores (zero-probability table entries) are segregated
    and counted; the KS statistic compares the finite parts.
    """
    if len(holdout) == 0:
        raise ValueError("holdout must be nonempty")
    ll_h = [log_likelihood(network, c) for c in holdout]
    generated = forward_sample(network, n_generated, seed)
    ll_g = [log_likelihood(network, c) for c in generated]
    fin_h = [v for v in ll_h if np.isfinite(v)]
    fin_g = [v for v in ll_g if np.isfinite(v)]
    ks = ks_statistic(fin_h, fin_g)
    return LikelihoodComparison(
        ll_holdout=ll_h, ll_generated=ll_g, ks=ks,
        n_holdout_neginf=len(ll_h) - len(fin_h),
        n_generated_neginf=len(ll_g) - len(fin_g))


@dataclass
class EvalReport:
    """Everything the eval pipeline produces for one trained model."""

    nodes: list[str]
    confusion: dict[str, np.ndarray] = field(default_factory=dict)
    mse: dict[str, float] = field(default_factory=dict)
    mean: dict[str, float] = field(default_factory=dict)
    std: dict[str, float] = field(default_factory=dict)
    n_cases: int = 0
    sweep: Optional[SweepResult] = None
    likelihood: Optional[LikelihoodComparison] = None
    blanket_mse: dict[str, float] = field(default_factory=dict)
    blanket_skipped: dict[str, int] = field(default_factory=dict)


def evaluate_network(network: Network, cases: Sequence[Mapping[str, int]],
                     nodes: Optional[Sequence[str]] = None) -> EvalReport:
    """Confusion matrices and midpoint MSE per binned node on ``cases``."""
    if nodes is None:
        nodes = [n for n in network.node_names if network.node(n).is_binned]
    report = EvalReport(nodes=list(nodes), n_cases=len(cases))
    for node in nodes:
        scheme = network.node(node).bins
        mids = scheme.midpoints()
        actual = [c[node] for c in cases]
        predicted = predict_map_bins(network, cases, node)
        report.confusion[node] = confusion_matrix(actual, predicted,
                                                  scheme.n_bins)
        report.mse[node] = approx_mse(actual, predicted, scheme)
        observed = mids[np.asarray(actual, dtype=np.intp)]
        report.mean[node] = float(observed.mean())
        report.std[node] = float(observed.std(ddof=1)) if len(cases) > 1 else 0.0
    blanket, skipped = blanket_sq_error(network, cases, nodes)
    report.blanket_mse = blanket
    report.blanket_skipped = skipped
    return report


def report_to_doc(report: EvalReport) -> dict:
    doc: dict = {
        "n_cases": report.n_cases,
        "nodes": report.nodes,
        "mse": report.mse,
        "mean": report.mean,
        "std": report.std,
        "blanket_mse": report.blanket_mse,
        "blanket_skipped": report.blanket_skipped,
        "confusion": {n: m.tolist() for n, m in report.confusion.items()},
        "published_reference_mse": {k: list(v) for k, v
                                    in PUBLISHED_REFERENCE_MSE.items()},
    }
    if report.sweep is not None:
        s = report.sweep
        doc["sweep"] = {
            "weights": s.weights,
            "train_mse": {n: {str(w): v for w, v in d.items()}
                          for n, d in s.train_mse.items()},
            "test_mse": {n: {str(w): v for w, v in d.items()}
                         for n, d in s.test_mse.items()},
            "train_scaled": {n: {str(w): v for w, v in d.items()}
                             for n, d in s.scaled("train").items()},
            "test_scaled": {n: {str(w): v for w, v in d.items()}
                            for n, d in s.scaled("test").items()},
            "regression_only": {n: list(v) for n, v in s.regression_only.items()},
            "counts_only": {n: list(v) for n, v in s.counts_only.items()},
            "total_train": {str(w): v for w, v in s.total_train().items()},
            "total_test": {str(w): v for w, v in s.total_test().items()},
        }
    if report.likelihood is not None:
        lc = report.likelihood
        doc["likelihood"] = {
            "ks": lc.ks,
            "n_holdout_neginf": lc.n_holdout_neginf,
            "n_generated_neginf": lc.n_generated_neginf,
            "ll_holdout": [v if np.isfinite(v) else None for v in lc.ll_holdout],
            "ll_generated": [v if np.isfinite(v) else None
                             for v in lc.ll_generated],
        }
    return doc


def sweep_rows(sweep: SweepResult) -> list[dict]:
    """Flat rows (node x weight) for the sweep CSV."""
    rows = []
    scaled_tr = sweep.scaled("train")
    scaled_te = sweep.scaled("test")
    for node in sweep.nodes:
        for w in sweep.weights:
            rows.append({
                "node": node,
                "weight": w,
                "train_mse": sweep.train_mse[node][w],
                "test_mse": sweep.test_mse[node][w],
                "train_scaled": scaled_tr[node][w],
                "test_scaled": scaled_te[node][w],
            })
    return rows


def baseline_rows(sweep: SweepResult) -> list[dict]:
    rows = []
    for node in sweep.nodes:
        r_tr, r_te = sweep.regression_only[node]
        c_tr, c_te = sweep.counts_only[node]
        rows.append({"node": node, "baseline": "regression_only",
                     "train_mse": r_tr, "test_mse": r_te})
        rows.append({"node": node, "baseline": "counts_only",
                     "train_mse": c_tr, "test_mse": c_te})
    return rows


def confusion_rows(report: EvalReport) -> list[dict]:
    rows = []
    for node in report.nodes:
        m = report.confusion.get(node)
        if m is None:
            continue
        for a in range(m.shape[0]):
            for p in range(m.shape[1]):
                if m[a, p]:
                    rows.append({"node": node, "actual_bin": a,
                                 "predicted_bin": p, "count": int(m[a, p])})
    return rows
