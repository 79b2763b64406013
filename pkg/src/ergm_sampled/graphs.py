"""Binary networks, observation patterns and partial observations.

Everything downstream (statistics, samplers, designs, likelihoods) operates
on the three structures defined here: a fully observed :class:`Network`, an
:class:`ObservationPattern` saying which dyads were recorded, and a
:class:`PartialNetwork` combining a pattern with the recorded values.
Instances are immutable after construction; samplers work on private mutable
copies and re-wrap retained states.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "Network",
    "ObservationPattern",
    "PartialNetwork",
    "NodeAttributes",
    "make_network",
    "restrict",
    "overlay",
    "completions_count",
    "isolates",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class Network:
    """A complete binary network on ``n`` nodes.

    The adjacency matrix is stored dense with a structural-zero diagonal.
    Undirected networks are stored symmetrically but counted over unordered
    pairs throughout the package.
    """

    __slots__ = ("n", "directed", "_adj")

    def __init__(self, adj, directed: bool = False, *, copy: bool = True):
        adj = np.array(adj, dtype=np.uint8, copy=copy)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be a square matrix")
        n = adj.shape[0]
        if np.any(np.diagonal(adj) != 0):
            raise ValueError("self-ties are not allowed (diagonal must be zero)")
        off = adj[~np.eye(n, dtype=bool)]
        if off.size and not np.all((off == 0) | (off == 1)):
            raise ValueError("dyad states must be 0 or 1")
        if not directed and not np.array_equal(adj, adj.T):
            raise ValueError("undirected network requires a symmetric adjacency matrix")
        self.n = n
        self.directed = directed
        self._adj = _freeze(adj)

    @property
    def adj(self) -> np.ndarray:
        """Read-only adjacency matrix (uint8)."""
        return self._adj

    def edge_count(self) -> int:
        total = int(self._adj.sum())
        return total if self.directed else total // 2

    def degrees(self) -> np.ndarray:
        """Undirected degree, or out-degree for directed networks."""
        return self._adj.sum(axis=1).astype(int)

    def neighbor_sets(self) -> list[set[int]]:
        """Neighbor sets per node (out-neighbors when directed)."""
        return [set(np.flatnonzero(self._adj[i]).tolist()) for i in range(self.n)]

    def edges(self) -> list[tuple[int, int]]:
        """Edge list: unordered pairs ``i < j`` or ordered arcs when directed."""
        if self.directed:
            ii, jj = np.nonzero(self._adj)
            return list(zip(ii.tolist(), jj.tolist()))
        ii, jj = np.nonzero(np.triu(self._adj, 1))
        return list(zip(ii.tolist(), jj.tolist()))

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self._adj[i, j])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Network)
            and self.directed == other.directed
            and np.array_equal(self._adj, other._adj)
        )

    def __hash__(self):
        return hash((self.directed, self._adj.tobytes()))

    def __repr__(self):
        kind = "directed" if self.directed else "undirected"
        return f"Network(n={self.n}, {kind}, edges={self.edge_count()})"


def make_network(n: int, directed: bool = False,
                 edges: Iterable[tuple[int, int]] = ()) -> Network:
    """Build a network from an edge list; symmetrizes when undirected.

    Raises ``ValueError`` on self-loops or out-of-range indices.
    """
    adj = np.zeros((n, n), dtype=np.uint8)
    for i, j in edges:
        if i == j:
            raise ValueError(f"self-loop ({i},{i}) is not a valid dyad")
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"edge ({i},{j}) out of range for n={n}")
        adj[i, j] = 1
        if not directed:
            adj[j, i] = 1
    return Network(adj, directed, copy=False)


class ObservationPattern:
    """Which dyads of a network were sampled.

    ``mask[i, j] = 1`` means the ordered dyad ``(i, j)`` was observed.  When
    the pattern arises from a node-determined design the originating node
    waves are kept alongside the mask; hand-built dyad masks carry no waves.
    """

    __slots__ = ("n", "directed", "_mask", "waves")

    def __init__(self, mask, directed: bool = False,
                 waves: Sequence[np.ndarray] | None = None, *, copy: bool = True):
        mask = np.array(mask, dtype=np.uint8, copy=copy)
        if mask.ndim != 2 or mask.shape[0] != mask.shape[1]:
            raise ValueError("mask must be a square matrix")
        n = mask.shape[0]
        mask[np.diag_indices(n)] = 0
        off = mask[~np.eye(n, dtype=bool)]
        if off.size and not np.all((off == 0) | (off == 1)):
            raise ValueError("mask entries must be 0 or 1")
        if not directed and not np.array_equal(mask, mask.T):
            raise ValueError("undirected pattern requires a symmetric mask")
        if waves is not None:
            waves = tuple(_freeze(np.array(w, dtype=np.uint8)) for w in waves)
            stacked = np.array([w for w in waves])
            if stacked.shape[1] != n:
                raise ValueError("wave vectors must have length n")
            if np.any(stacked.sum(axis=0) > 1):
                raise ValueError("waves must be disjoint node sets")
        self.n = n
        self.directed = directed
        self._mask = _freeze(mask)
        self.waves = waves

    @classmethod
    def from_selected(cls, selected, directed: bool = False,
                      waves: Sequence[np.ndarray] | None = None) -> "ObservationPattern":
        """Node-determined mask: incident dyads (undirected) or out-dyads (directed)."""
        s = np.asarray(selected, dtype=np.uint8)
        n = s.shape[0]
        if directed:
            mask = np.repeat(s[:, None], n, axis=1)
        else:
            mask = np.maximum.outer(s, s)
        if waves is None:
            waves = (s.copy(),)
        return cls(mask, directed, waves, copy=False)

    @property
    def mask(self) -> np.ndarray:
        return self._mask

    @property
    def selected(self) -> np.ndarray | None:
        """Union of the waves, or ``None`` for a hand-built dyad mask."""
        if self.waves is None:
            return None
        return np.array([w for w in self.waves]).sum(axis=0).astype(np.uint8)

    def dyads(self) -> list[tuple[int, int]]:
        """All free-dyad slots of the space: ordered pairs, or pairs ``i < j``."""
        n = self.n
        if self.directed:
            return [(i, j) for i in range(n) for j in range(n) if i != j]
        return [(i, j) for i in range(n) for j in range(i + 1, n)]

    def observed_dyads(self) -> list[tuple[int, int]]:
        return [(i, j) for (i, j) in self.dyads() if self._mask[i, j]]

    def free_dyads(self) -> list[tuple[int, int]]:
        """Unobserved dyads, in canonical order."""
        return [(i, j) for (i, j) in self.dyads() if not self._mask[i, j]]

    def n_observed_dyads(self) -> int:
        return len(self.observed_dyads())

    def n_free_dyads(self) -> int:
        return len(self.free_dyads())

    def is_complete(self) -> bool:
        return self.n_free_dyads() == 0

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ObservationPattern)
            and self.directed == other.directed
            and np.array_equal(self._mask, other._mask)
        )

    def __hash__(self):
        return hash((self.directed, self._mask.tobytes()))

    def __repr__(self):
        return (f"ObservationPattern(n={self.n}, observed={self.n_observed_dyads()}, "
                f"free={self.n_free_dyads()})")


class PartialNetwork:
    """Observed dyad values on the masked part of the dyad space."""

    __slots__ = ("pattern", "_values")

    def __init__(self, pattern: ObservationPattern, values, *, copy: bool = True):
        values = np.array(values, dtype=np.uint8, copy=copy)
        if values.shape != pattern.mask.shape:
            raise ValueError("values must match mask shape")
        values = values * pattern.mask  # unmasked dyads carry no value
        if not pattern.directed and not np.array_equal(values, values.T):
            raise ValueError("undirected observations must be symmetric")
        self.pattern = pattern
        self._values = _freeze(values)

    @property
    def n(self) -> int:
        return self.pattern.n

    @property
    def directed(self) -> bool:
        return self.pattern.directed

    @property
    def values(self) -> np.ndarray:
        """Observed dyad values, zero off the mask."""
        return self._values

    def observed_edge_count(self) -> int:
        total = int(self._values.sum())
        return total if self.directed else total // 2

    def __repr__(self):
        return (f"PartialNetwork(n={self.n}, observed_dyads="
                f"{self.pattern.n_observed_dyads()}, observed_edges="
                f"{self.observed_edge_count()})")


def restrict(network: Network, pattern: ObservationPattern) -> PartialNetwork:
    """Observe ``network`` through ``pattern``."""
    if network.n != pattern.n or network.directed != pattern.directed:
        raise ValueError("network and pattern disagree on n or directedness")
    return PartialNetwork(pattern, network.adj * pattern.mask, copy=False)


def overlay(partial: PartialNetwork, completion) -> Network:
    """Fill the unobserved dyads of ``partial`` with ``completion``.

    ``completion`` is either a mapping from free dyads (canonical order,
    ``i < j`` when undirected) to 0/1 values, or a flat 0/1 sequence aligned
    with ``partial.pattern.free_dyads()``.  A value supplied for an observed
    dyad is an error.
    """
    pattern = partial.pattern
    free = pattern.free_dyads()
    adj = np.array(partial.values, dtype=np.uint8)
    if isinstance(completion, Mapping):
        for (i, j), v in completion.items():
            key = (i, j)
            if not pattern.directed and i > j:
                key = (j, i)
            if pattern.mask[key[0], key[1]]:
                raise ValueError(f"completion assigns observed dyad {key}")
            if key[0] == key[1]:
                raise ValueError("completion assigns a diagonal entry")
            adj[key[0], key[1]] = v
            if not pattern.directed:
                adj[key[1], key[0]] = v
        filled = set()
        for (i, j) in completion:
            filled.add((i, j) if (pattern.directed or i < j) else (j, i))
        missing = [d for d in free if d not in filled]
        if missing:
            raise ValueError(f"completion leaves {len(missing)} free dyads unset")
    else:
        values = np.asarray(completion, dtype=np.uint8).ravel()
        if values.shape[0] != len(free):
            raise ValueError(
                f"completion has {values.shape[0]} values for {len(free)} free dyads")
        for (i, j), v in zip(free, values):
            adj[i, j] = v
            if not pattern.directed:
                adj[j, i] = v
    return Network(adj, pattern.directed, copy=False)


def completions_count(partial: PartialNetwork) -> int:
    """Number of full networks concordant with the observed data (2^free)."""
    return 1 << partial.pattern.n_free_dyads()


def isolates(network: Network) -> set[int]:
    """Nodes with no incident dyads (no in- or out-arcs when directed)."""
    deg = network.adj.sum(axis=1) + network.adj.sum(axis=0)
    return set(np.flatnonzero(deg == 0).tolist())


class NodeAttributes:
    """Per-node covariate columns addressed by name."""

    __slots__ = ("n", "_cols")

    def __init__(self, columns: Mapping[str, Sequence]):
        cols = {}
        n = None
        for name, vals in columns.items():
            arr = _freeze(np.asarray(vals, dtype=float).copy())
            if n is None:
                n = arr.shape[0]
            elif arr.shape[0] != n:
                raise ValueError(f"attribute '{name}' has length {arr.shape[0]}, expected {n}")
            cols[name] = arr
        if n is None:
            raise ValueError("at least one attribute column is required")
        self.n = n
        self._cols = cols

    @property
    def names(self) -> list[str]:
        return list(self._cols)

    def __contains__(self, name: str) -> bool:
        return name in self._cols

    def __getitem__(self, name: str) -> np.ndarray:
        if name not in self._cols:
            raise KeyError(f"unknown node attribute '{name}'")
        return self._cols[name]

    def __repr__(self):
        return f"NodeAttributes(n={self.n}, columns={self.names})"
