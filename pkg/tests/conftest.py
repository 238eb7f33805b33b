import sys
from pathlib import Path

import hypothesis
import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

hypothesis.settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[hypothesis.HealthCheck.too_slow])
hypothesis.settings.load_profile("default")

from delayprop.network import (ConditionalTable, Network, NetworkSpec,
                               NodeSpec, build_network)


@pytest.fixture
def chain_ab() -> Network:
    """A (3 states) -> B (2 states) with fixed hand-set tables."""
    spec = NetworkSpec(
        nodes=[NodeSpec("A", states=("a0", "a1", "a2")),
               NodeSpec("B", states=("b0", "b1"))],
        parents={"B": ["A"]})
    net = build_network(spec)
    tables = {
        "A": ConditionalTable("A", (), (), np.array([[0.5, 0.3, 0.2]])),
        "B": ConditionalTable("B", ("A",), (3,),
                              np.array([[0.9, 0.1], [0.4, 0.6], [0.2, 0.8]])),
    }
    return net.with_tables(tables)


def random_network(rng: np.random.Generator, max_nodes: int = 6,
                   max_states: int = 5) -> Network:
    """Random small DAG with Dirichlet-ish random tables."""
    n = int(rng.integers(2, max_nodes + 1))
    names = [f"X{i}" for i in range(n)]
    nodes = [NodeSpec(nm, states=tuple(f"s{j}" for j in
                                       range(int(rng.integers(2, max_states + 1)))))
             for nm in names]
    parents = {}
    for i in range(1, n):
        choices = names[:i]
        k = int(rng.integers(0, min(2, len(choices)) + 1))
        if k:
            picks = sorted(rng.choice(len(choices), size=k, replace=False))
            parents[names[i]] = [choices[int(j)] for j in picks]
    spec = NetworkSpec(nodes=nodes, parents=parents)
    net = build_network(spec)
    tables = {}
    for node in nodes:
        base = net.tables[node.name]
        raw = rng.gamma(1.0, 1.0, size=base.pseudo.shape) + 1e-3
        tables[node.name] = ConditionalTable(
            node=base.node, parents=base.parents,
            parent_cards=base.parent_cards,
            pseudo=raw / raw.sum(axis=1, keepdims=True))
    return net.with_tables(tables)


ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" in nodeid:
                name = nodeid.split("::")[-1]
                lines.append((name, status.upper()))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, status in sorted(lines):
            terminalreporter.write_line(f"{status:6s}  {name}")
