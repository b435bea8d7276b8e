import hypothesis
import numpy as np
import pytest

from netcontagion.graph import Graph

hypothesis.settings.register_profile("default", max_examples=60, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile("default")

_ACCEPTANCE = []


def from_nx(h):
    import networkx as nx

    h = nx.convert_node_labels_to_integers(h)
    return Graph.from_edges(h.number_of_nodes(), list(h.edges()))


def connected_catalog(max_n=8):
    """All connected graphs on 1..6 nodes (graph atlas) plus seeded random connected 7- and 8-node graphs."""
    import networkx as nx
    from networkx.generators.atlas import graph_atlas_g

    out = [h for h in graph_atlas_g() if 0 < h.number_of_nodes() <= min(max_n, 6) and nx.is_connected(h)]
    rng = np.random.default_rng(2024)
    for n in (7, 8):
        if n > max_n:
            break
        got = 0
        while got < 10:
            h = nx.gnp_random_graph(n, rng.uniform(0.25, 0.6), seed=int(rng.integers(1 << 31)))
            if nx.is_connected(h):
                out.append(h)
                got += 1
    return out


@pytest.fixture(scope="session")
def catalog():
    return [from_nx(h) for h in connected_catalog()]


@pytest.fixture
def record_criterion():
    def record(number, name, passed, detail=""):
        _ACCEPTANCE.append((number, name, passed, detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        mark = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{mark}] criterion {number:>2}: {name}  {detail}")
