"""Sufficient statistics for exponential-family network models.

Four statistic families are provided: edge count, geometrically weighted
edgewise shared partners (fixed decay), nodal covariate main effects and
covariate matching (homophily).  Each statistic knows its full value on a
network and its change score (value with a dyad set to 1 minus value with it
set to 0), which is what the Metropolis sampler and the pseudolikelihood
need.

Linear statistics -- every one except GWESP -- have change scores that do not
depend on the rest of the network, so a :class:`StatisticSet` exposes them as
precomputed per-dyad delta matrices.  GWESP change scores are computed from
neighbor sets on the fly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import Network, NodeAttributes

__all__ = [
    "Edges",
    "Gwesp",
    "NodalMain",
    "HomophilyMatch",
    "StatisticSet",
    "compute_stats",
    "change_stats",
    "esp_histogram",
]


@dataclass(frozen=True)
class Edges:
    """Number of edges (unordered pairs; arcs when directed)."""

    @property
    def label(self) -> str:
        return "edges"

    @property
    def dyadic(self) -> bool:
        return True

    def delta_matrix(self, n: int, attributes: NodeAttributes | None) -> np.ndarray:
        d = np.ones((n, n))
        np.fill_diagonal(d, 0.0)
        return d


@dataclass(frozen=True)
class Gwesp:
    """Geometrically weighted edgewise shared partners, fixed decay.

    With decay ``tau``, the statistic is
    ``e^tau * sum_k [1 - (1 - e^-tau)^k] * EP_k`` where ``EP_k`` counts edges
    whose endpoints have exactly ``k`` common neighbors.  Undirected only.
    """

    decay: float = 0.7781

    @property
    def label(self) -> str:
        return f"gwesp({self.decay:g})"

    @property
    def dyadic(self) -> bool:
        return False

    def delta_matrix(self, n, attributes):  # pragma: no cover - interface symmetry
        raise ValueError("GWESP change scores depend on the full network state")


@dataclass(frozen=True)
class NodalMain:
    """Main effect of a node covariate: sum over edges of the endpoint values."""

    attr: str

    @property
    def label(self) -> str:
        return f"nodal.{self.attr}"

    @property
    def dyadic(self) -> bool:
        return True

    def delta_matrix(self, n: int, attributes: NodeAttributes) -> np.ndarray:
        x = attributes[self.attr]
        d = np.add.outer(x, x)
        np.fill_diagonal(d, 0.0)
        return d


@dataclass(frozen=True)
class HomophilyMatch:
    """Count of edges whose endpoints share the same covariate value."""

    attr: str

    @property
    def label(self) -> str:
        return f"match.{self.attr}"

    @property
    def dyadic(self) -> bool:
        return True

    def delta_matrix(self, n: int, attributes: NodeAttributes) -> np.ndarray:
        x = attributes[self.attr]
        d = (x[:, None] == x[None, :]).astype(float)
        np.fill_diagonal(d, 0.0)
        return d


def esp_histogram(network: Network) -> np.ndarray:
    """Edgewise shared-partner counts: entry ``k`` is ``EP_k``.

    Returned array has length ``max shared partners + 1`` (length 1 for an
    empty network).
    """
    if network.directed:
        raise ValueError("shared-partner statistics are defined for undirected networks")
    a = network.adj.astype(np.int64)
    common = a @ a
    ii, jj = np.nonzero(np.triu(a, 1))
    if ii.size == 0:
        return np.zeros(1, dtype=np.int64)
    return np.bincount(common[ii, jj])


def _gwesp_value(network: Network, decay: float) -> float:
    ep = esp_histogram(network)
    k = np.arange(ep.shape[0])
    w = 1.0 - math.exp(-decay)
    return float(math.exp(decay) * np.sum((1.0 - w ** k) * ep))


class StatisticSet:
    """A model's statistics bound to a node set and its attributes.

    Splits the statistics into a stack of per-dyad delta matrices (the linear
    ones) and GWESP terms, so callers can score dyad toggles cheaply.
    """

    def __init__(self, statistics, attributes: NodeAttributes | None,
                 n: int, directed: bool = False):
        self.statistics = tuple(statistics)
        if not self.statistics:
            raise ValueError("at least one statistic is required")
        self.attributes = attributes
        self.n = n
        self.directed = directed
        for s in self.statistics:
            if isinstance(s, (NodalMain, HomophilyMatch)):
                if attributes is None:
                    raise ValueError(f"statistic {s.label} needs node attributes")
                if s.attr not in attributes:
                    raise KeyError(f"unknown node attribute '{s.attr}'")
                if attributes.n != n:
                    raise ValueError(
                        f"attributes are for {attributes.n} nodes, model has {n}")
            if isinstance(s, Gwesp) and directed:
                raise ValueError("GWESP is only defined for undirected networks")
        self.labels = [s.label for s in self.statistics]
        self.p = len(self.statistics)
        self._dyadic_idx = [k for k, s in enumerate(self.statistics) if s.dyadic]
        self._gwesp_idx = [k for k, s in enumerate(self.statistics) if isinstance(s, Gwesp)]
        self._delta_stack = np.stack(
            [self.statistics[k].delta_matrix(n, attributes) for k in self._dyadic_idx]
        ) if self._dyadic_idx else np.zeros((0, n, n))

    @property
    def gwesp_indices(self) -> list[int]:
        return list(self._gwesp_idx)

    @property
    def dyadic_indices(self) -> list[int]:
        return list(self._dyadic_idx)

    def dyadic_delta_stack(self) -> np.ndarray:
        """Delta matrices for the linear statistics, stacked along axis 0."""
        return self._delta_stack

    def compute(self, network: Network) -> np.ndarray:
        """Full statistic vector of a network."""
        if network.n != self.n or network.directed != self.directed:
            raise ValueError("network does not match this statistic set")
        z = np.empty(self.p)
        if self._dyadic_idx:
            if self.directed:
                vals = np.tensordot(self._delta_stack, network.adj, axes=([1, 2], [0, 1]))
                # delta matrix holds the per-arc contribution for (i, j) only,
                # so no triangularization is needed
                z[self._dyadic_idx] = vals
            else:
                triu = np.triu(network.adj, 1).astype(float)
                vals = np.tensordot(self._delta_stack, triu, axes=([1, 2], [0, 1]))
                z[self._dyadic_idx] = vals
        for k in self._gwesp_idx:
            z[k] = _gwesp_value(network, self.statistics[k].decay)
        return z

    def change(self, neighbor_sets: list[set[int]], adj: np.ndarray,
               i: int, j: int) -> np.ndarray:
        """Change score for dyad ``(i, j)``: value at 1 minus value at 0.

        ``neighbor_sets`` and ``adj`` describe the current state; the score
        is the same whichever value the dyad currently holds.
        """
        d = np.empty(self.p)
        if self._dyadic_idx:
            d[self._dyadic_idx] = self._delta_stack[:, i, j]
        for k in self._gwesp_idx:
            d[k] = self.gwesp_change(neighbor_sets, adj, i, j, self.statistics[k].decay)
        return d

    @staticmethod
    def gwesp_change(neighbor_sets: list[set[int]], adj: np.ndarray,
                     i: int, j: int, decay: float) -> float:
        """GWESP change score for toggling undirected dyad ``(i, j)``.

        The new edge contributes its own shared-partner term, and each common
        neighbor ``k`` bumps the shared-partner count of the existing edges
        ``(i, k)`` and ``(j, k)`` by one.
        """
        ni, nj = neighbor_sets[i], neighbor_sets[j]
        common = ni & nj
        w = 1.0 - math.exp(-decay)
        delta = math.exp(decay) * (1.0 - w ** len(common))
        present = 1 if adj[i, j] else 0
        for k in common:
            nk = neighbor_sets[k]
            # shared partners of (i,k) and (j,k) evaluated with y_ij = 0
            delta += w ** (len(ni & nk) - present) + w ** (len(nj & nk) - present)
        return delta


def compute_stats(network: Network, statistics,
                  attributes: NodeAttributes | None = None) -> np.ndarray:
    """Statistic vector of ``network`` for the given statistics."""
    bound = StatisticSet(statistics, attributes, network.n, network.directed)
    return bound.compute(network)


def change_stats(network: Network, dyad: tuple[int, int], statistics,
                 attributes: NodeAttributes | None = None) -> np.ndarray:
    """Change score of all statistics for toggling ``dyad`` on ``network``."""
    i, j = dyad
    if i == j:
        raise ValueError("a dyad joins two distinct nodes")
    bound = StatisticSet(statistics, attributes, network.n, network.directed)
    return bound.change(network.neighbor_sets(), network.adj, i, j)
