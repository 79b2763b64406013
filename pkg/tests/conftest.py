"""Shared fixtures and independent oracle implementations.

The oracles recompute every quantity from first principles (loops over
dyads, exhaustive enumeration) so the library's incremental/vectorized
implementations are tested against straight-line code.
"""

import numpy as np
import pytest

import ergm_sampled as es


# ---------------------------------------------------------------------------
# oracle statistics: direct loops, no shared code with the package
# ---------------------------------------------------------------------------

def oracle_edges(adj, directed=False):
    total = int(adj.sum())
    return total if directed else total // 2


def oracle_gwesp(adj, decay):
    """Geometrically weighted edgewise shared partners, by direct loops."""
    n = adj.shape[0]
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            if adj[i, j]:
                shared = sum(1 for k in range(n)
                             if k != i and k != j and adj[i, k] and adj[j, k])
                total += 1.0 - (1.0 - np.exp(-decay)) ** shared
    return float(np.exp(decay) * total)


def oracle_nodal(adj, x, directed=False):
    n = adj.shape[0]
    total = 0.0
    for i in range(n):
        for j in range(n):
            if i != j and adj[i, j]:
                total += x[i] + x[j]
    return total if directed else total / 2.0


def oracle_match(adj, x, directed=False):
    n = adj.shape[0]
    total = 0
    for i in range(n):
        for j in range(n):
            if i != j and adj[i, j] and x[i] == x[j]:
                total += 1
    return float(total if directed else total // 2)


def oracle_stats(adj, statistics, attrs=None, directed=False):
    out = []
    for stat in statistics:
        if isinstance(stat, es.Edges):
            out.append(float(oracle_edges(adj, directed)))
        elif isinstance(stat, es.Gwesp):
            out.append(oracle_gwesp(adj, stat.decay))
        elif isinstance(stat, es.NodalMain):
            out.append(oracle_nodal(adj, attrs[stat.attr], directed))
        elif isinstance(stat, es.HomophilyMatch):
            out.append(oracle_match(adj, attrs[stat.attr], directed))
        else:  # pragma: no cover
            raise TypeError(stat)
    return np.array(out)


def all_adjacencies(n, directed=False):
    """Yield every labelled graph on n nodes, ordered by graph code: free
    dyads in row-major order, dyad k on bit k."""
    if directed:
        dyads = [(i, j) for i in range(n) for j in range(n) if i != j]
    else:
        dyads = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for code in range(2 ** len(dyads)):
        adj = np.zeros((n, n), dtype=np.int8)
        for b, (i, j) in enumerate(dyads):
            if (code >> b) & 1:
                adj[i, j] = 1
                if not directed:
                    adj[j, i] = 1
        yield adj


def random_adjacency(rng, n, p=0.4, directed=False):
    adj = (rng.random((n, n)) < p).astype(np.int8)
    np.fill_diagonal(adj, 0)
    if not directed:
        adj = np.triu(adj, 1)
        adj = adj + adj.T
    return adj


# ---------------------------------------------------------------------------
# fixtures
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def lazega():
    y, attrs = es.load_lazega()
    return y, attrs


@pytest.fixture(scope="session")
def lazega_statistics():
    return (es.Edges(), es.Gwesp(), es.NodalMain("seniority"),
            es.NodalMain("practice"), es.HomophilyMatch("practice"),
            es.HomophilyMatch("gender"), es.HomophilyMatch("office"))


@pytest.fixture
def small_attrs():
    return es.NodeAttributes({
        "group": np.array([0.0, 0.0, 1.0, 1.0, 0.0]),
        "score": np.array([0.1, 0.5, 0.3, 0.9, 0.7]),
    })
