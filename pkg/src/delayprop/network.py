"""Discrete network over binned delay variables and categorical causes.

Each node carries a conditional table whose rows are Dirichlet pseudo-count
vectors, one row per parent configuration in lexicographic order (first
parent most significant). Prior rows are built at strength 1, either uniform
or by pushing a fitted regression's normal through the child's bin scheme;
observed cases then add ``case_weight`` pseudo-counts apiece, so the data-to-
prior ratio is ``case_weight : 1`` per prior row unit. Rows that training
never touches keep their prior untouched.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.special import ndtr

from .discretize import BinScheme
from .regression import PiecewiseRegression, predict_mean

DEFAULT_CASE_WEIGHT = 30.0
DEFAULT_MAX_ROWS = 100_000


class SpecError(ValueError):
    """The network specification violates an invariant (cycle, bad parent,
    oversized table...)."""


class CaseError(ValueError):
    """A training case is unusable; carries the offending case index."""

    def __init__(self, index: int, message: str):
        super().__init__(f"case {index}: {message}")
        self.index = index


@dataclass(frozen=True)
class NodeSpec:
    """A discrete node: either binned-continuous or categorical."""

    name: str
    bins: Optional[BinScheme] = None
    states: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        if (self.bins is None) == (self.states is None):
            raise SpecError(f"node {self.name}: exactly one of bins/states required")
        if self.states is not None:
            object.__setattr__(self, "states", tuple(self.states))
            if len(self.states) < 2:
                raise SpecError(f"node {self.name}: needs at least 2 states")

    @property
    def cardinality(self) -> int:
        return self.bins.n_bins if self.bins is not None else len(self.states)

    @property
    def labels(self) -> list[str]:
        return self.bins.labels() if self.bins is not None else list(self.states)

    @property
    def is_binned(self) -> bool:
        return self.bins is not None


@dataclass
class NetworkSpec:
    nodes: list[NodeSpec]
    parents: dict[str, list[str]] = field(default_factory=dict)
    priors: dict[str, PiecewiseRegression] = field(default_factory=dict)
    case_weight: float = DEFAULT_CASE_WEIGHT

    def node(self, name: str) -> NodeSpec:
        for n in self.nodes:
            if n.name == name:
                return n
        raise KeyError(name)

    def parent_list(self, name: str) -> list[str]:
        return list(self.parents.get(name, []))

    def validate(self) -> None:
        names = [n.name for n in self.nodes]
        if len(set(names)) != len(names):
            raise SpecError("duplicate node names")
        if self.case_weight <= 0:
            raise SpecError("case_weight must be positive")
        known = set(names)
        for child, ps in self.parents.items():
            if child not in known:
                raise SpecError(f"parent map references unknown node {child}")
            for p in ps:
                if p not in known:
                    raise SpecError(f"node {child}: unknown parent {p}")
            if len(set(ps)) != len(ps):
                raise SpecError(f"node {child}: duplicate parents")
        for name, model in self.priors.items():
            if name not in known:
                raise SpecError(f"prior for unknown node {name}")
            extra = set(model.predictors) - set(self.parent_list(name))
            if extra:
                raise SpecError(
                    f"node {name}: prior predictors {sorted(extra)} are not parents")
            if not self.node(name).is_binned:
                raise SpecError(f"node {name}: regression prior needs a binned node")
        topological_order(self)  # raises on cycles


def topological_order(spec: NetworkSpec) -> list[str]:
    """Kahn's algorithm with declaration-order tie-breaking (stable)."""
    names = [n.name for n in spec.nodes]
    indeg = {n: len(spec.parent_list(n)) for n in names}
    children: dict[str, list[str]] = {n: [] for n in names}
    for child in names:
        for p in spec.parent_list(child):
            children[p].append(child)
    order: list[str] = []
    ready = [n for n in names if indeg[n] == 0]
    while ready:
        node = ready.pop(0)
        order.append(node)
        for c in children[node]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
        ready.sort(key=names.index)
    if len(order) != len(names):
        cyclic = sorted(n for n in names if indeg[n] > 0)
        raise SpecError(f"parent graph has a cycle involving {cyclic}")
    return order


@dataclass(frozen=True)
class ConditionalTable:
    """Pseudo-count rows for one node, one row per parent configuration."""

    node: str
    parents: tuple[str, ...]
    parent_cards: tuple[int, ...]
    pseudo: np.ndarray  # shape (n_rows, n_states)

    def __post_init__(self) -> None:
        object.__setattr__(self, "pseudo", np.asarray(self.pseudo, dtype=float))
        rows = int(np.prod(self.parent_cards)) if self.parent_cards else 1
        if self.pseudo.shape[0] != rows:
            raise SpecError(f"table {self.node}: expected {rows} rows, "
                            f"got {self.pseudo.shape[0]}")
        if np.any(self.pseudo < 0):
            raise SpecError(f"table {self.node}: negative pseudo-counts")
        if np.any(self.pseudo.sum(axis=1) <= 0):
            raise SpecError(f"table {self.node}: a row has zero total pseudo-count")

    @property
    def n_states(self) -> int:
        return self.pseudo.shape[1]

    @property
    def n_rows(self) -> int:
        return self.pseudo.shape[0]

    def row_index(self, parent_states: Sequence[int]) -> int:
        if not self.parents:
            return 0
        return int(np.ravel_multi_index(tuple(parent_states), self.parent_cards))

    def probabilities(self) -> np.ndarray:
        """Posterior-mean probabilities: normalized pseudo-counts per row."""
        return self.pseudo / self.pseudo.sum(axis=1, keepdims=True)


class Network:
    """Immutable bundle of a validated spec plus one table per node."""

    def __init__(self, spec: NetworkSpec, tables: Mapping[str, ConditionalTable]):
        self.spec = spec
        self.tables = dict(tables)
        self.topo_order = topological_order(spec)
        self._nodes = {n.name: n for n in spec.nodes}
        missing = set(self._nodes) - set(self.tables)
        if missing:
            raise SpecError(f"missing tables for {sorted(missing)}")

    def node(self, name: str) -> NodeSpec:
        return self._nodes[name]

    @property
    def node_names(self) -> list[str]:
        return [n.name for n in self.spec.nodes]

    def cardinality(self, name: str) -> int:
        return self._nodes[name].cardinality

    def children(self, name: str) -> list[str]:
        return [n.name for n in self.spec.nodes
                if name in self.spec.parent_list(n.name)]

    def markov_blanket(self, name: str) -> set[str]:
        blanket = set(self.spec.parent_list(name))
        for c in self.children(name):
            blanket.add(c)
            blanket.update(self.spec.parent_list(c))
        blanket.discard(name)
        return blanket

    def with_tables(self, tables: Mapping[str, ConditionalTable]) -> "Network":
        merged = dict(self.tables)
        merged.update(tables)
        return Network(self.spec, merged)


def build_network(spec: NetworkSpec, max_rows: int = DEFAULT_MAX_ROWS) -> Network:
    """Validate the spec and initialize strength-1 prior tables."""
    spec.validate()
    tables: dict[str, ConditionalTable] = {}
    for node in spec.nodes:
        parents = spec.parent_list(node.name)
        parent_specs = [spec.node(p) for p in parents]
        cards = tuple(p.cardinality for p in parent_specs)
        n_rows = int(np.prod(cards)) if cards else 1
        if n_rows > max_rows:
            raise SpecError(f"node {node.name}: {n_rows} parent configurations "
                            f"exceed the {max_rows}-row limit")
        model = spec.priors.get(node.name)
        if model is not None:
            table = regression_to_cpt(model, node.bins, parent_specs,
                                      strength=1.0, node_name=node.name)
        else:
            k = node.cardinality
            pseudo = np.full((n_rows, k), 1.0 / k)
            table = ConditionalTable(node=node.name, parents=tuple(parents),
                                     parent_cards=cards, pseudo=pseudo)
        tables[node.name] = table
    return Network(spec, tables)


def regression_to_cpt(model: PiecewiseRegression, child: BinScheme,
                      parents: Sequence[NodeSpec], strength: float = 1.0,
                      node_name: str = "") -> ConditionalTable:
    """Discretize the regression's normal into a conditional table.

    For every parent configuration the regression mean is evaluated at the
    parent bin midpoints (categorical parents pass their state label), and
    the child-bin masses are normal CDF differences with the extreme bin
    boundaries pushed to +-infinity so each row sums to exactly 1.
    """
    if model.sigma <= 0:
        raise ValueError("regression sigma must be positive")
    if strength <= 0:
        raise ValueError("strength must be positive")
    name = node_name or model.response
    cards = tuple(p.cardinality for p in parents)
    n_rows = int(np.prod(cards)) if cards else 1

    mus = np.empty(n_rows)
    parent_values = [_parent_values(p) for p in parents]
    for row, combo in enumerate(itertools.product(*parent_values)):
        values = {p.name: v for p, v in zip(parents, combo)}
        mus[row] = predict_mean(model, values)

    bounds = _absorbing_bounds(child)
    z = (bounds[None, :] - mus[:, None]) / model.sigma
    cdf = ndtr(z)
    probs = np.diff(cdf, axis=1)
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum(axis=1, keepdims=True)
    return ConditionalTable(node=name, parents=tuple(p.name for p in parents),
                            parent_cards=cards, pseudo=strength * probs)


def _parent_values(p: NodeSpec) -> list:
    if p.is_binned:
        return [p.bins.midpoint(k) for k in range(p.cardinality)]
    return list(p.states)


def _absorbing_bounds(scheme: BinScheme) -> np.ndarray:
    bounds = [scheme.bounds(k)[0] for k in range(scheme.n_bins)]
    bounds.append(scheme.bounds(scheme.n_bins - 1)[1])
    bounds[0] = -np.inf
    bounds[-1] = np.inf
    return np.array(bounds)


def dirichlet_update(table: ConditionalTable, cases: Sequence[Mapping[str, int]],
                     case_weight: float) -> ConditionalTable:
    """Add ``case_weight`` pseudo-counts per observed (parent config, state).

    Every case must assign the node and all of its parents; otherwise the
    whole batch is rejected (CaseError with the offending index) and the
    table is left untouched. Updating with one batch and then another is
    exactly the same as updating with their concatenation.
    """
    if case_weight <= 0:
        raise ValueError("case_weight must be positive")
    n = len(cases)
    rows = np.empty(n, dtype=np.intp)
    states = np.empty(n, dtype=np.intp)
    needed = (table.node, *table.parents)
    cards = (table.n_states, *table.parent_cards)
    for i, case in enumerate(cases):
        for var, card in zip(needed, cards):
            if var not in case or case[var] is None:
                raise CaseError(i, f"missing state for {var}")
            s = case[var]
            if not 0 <= s < card:
                raise CaseError(i, f"state {s} out of range for {var}")
        states[i] = case[table.node]
        rows[i] = table.row_index([case[p] for p in table.parents])
    pseudo = table.pseudo.copy()
    np.add.at(pseudo, (rows, states), case_weight)
    return replace(table, pseudo=pseudo)


def train_network(network: Network, cases: Sequence[Mapping[str, int]],
                  case_weight: Optional[float] = None) -> Network:
    """Dirichlet-multinomial update of every node table; returns a new network."""
    w = network.spec.case_weight if case_weight is None else case_weight
    tables = {name: dirichlet_update(tab, cases, w)
              for name, tab in network.tables.items()}
    return network.with_tables(tables)
