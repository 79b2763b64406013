"""Design-based (Horvitz-Thompson) estimation of network totals.

Under an ego-centric design every dyad's sampling probability is known, so
the edge total ``tau = sum_{i<j} y_ij`` has an inverse-probability-weighted
unbiased estimator with a computable variance.  Under link-tracing designs
the dyadic sampling probabilities depend on unobserved parts of the network
and the machinery refuses with :class:`UnobservableProbabilityError` rather
than returning a number; :func:`observability_report` classifies which
probabilities each design family admits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .designs import DesignSpec, EgoCentricDesign, LinkTracingDesign
from .graphs import Network, PartialNetwork

__all__ = [
    "UnobservableProbabilityError",
    "ObservabilityReport",
    "InclusionProbs",
    "egocentric_dyad_prob",
    "pairwise_inclusion_prob",
    "egocentric_pairwise_prob",
    "inclusion_probs",
    "ht_edge_total",
    "ht_variance",
    "ht_variance_estimate",
    "dyad_neighborhood",
    "one_wave_dyad_prob",
    "one_wave_nodal_prob",
    "saturated_nodal_prob",
    "observability_report",
]


class UnobservableProbabilityError(Exception):
    """The requested sampling probability cannot be computed from observed data."""


def _check_psi(psi: float, allow_zero: bool = True) -> float:
    if not 0.0 <= psi <= 1.0:
        raise ValueError("psi must lie in [0, 1]")
    if not allow_zero and psi == 0.0:
        raise ValueError("psi must be positive for inverse-probability weighting")
    return float(psi)


def egocentric_dyad_prob(psi: float) -> float:
    """Probability a given undirected dyad is observed: ``1 - (1 - psi)^2``."""
    psi = _check_psi(psi)
    return 1.0 - (1.0 - psi) ** 2


def pairwise_inclusion_prob(psi: float, dyad1: tuple[int, int],
                            dyad2: tuple[int, int]) -> float:
    """Joint probability that two undirected dyads are both observed.

    Under independent Bernoulli(psi) node selection with incident-dyad
    observation there are three cases: the same dyad, dyads sharing no node,
    and dyads sharing exactly one node.  The shared-node value is
    ``psi + psi^2 - psi^3``: with shared node ``m`` and distinct others
    ``a, b``, condition on ``m`` -- selected (probability ``psi``, both dyads
    observed) or not (both ``a`` and ``b`` must be selected):
    ``psi + (1-psi) psi^2 = psi + psi^2 - psi^3``.
    """
    psi = _check_psi(psi)
    a = frozenset(dyad1)
    b = frozenset(dyad2)
    if len(a) != 2 or len(b) != 2:
        raise ValueError("a dyad joins two distinct nodes")
    pi = egocentric_dyad_prob(psi)
    if a == b:
        return pi
    shared = a & b
    if not shared:
        return pi * pi
    return psi + psi * psi - psi ** 3


# alias emphasizing which design the formula belongs to
egocentric_pairwise_prob = pairwise_inclusion_prob


@dataclass(frozen=True)
class ObservabilityReport:
    """Which sampling probabilities a design family admits (computable from
    observed data alone)."""

    scheme: str
    directed: bool
    nodal_observable: bool
    dyadic_observable: bool


def observability_report(spec: DesignSpec) -> ObservabilityReport:
    """Classify a design's nodal and dyadic sampling-probability observability.

    Ego-centric designs admit both.  Undirected one-wave and saturated
    tracing admit nodal probabilities only (a sampled node's degree, or
    component, is fully observed); multi-wave tracing with a finite bound
    above one admits neither, and no link-tracing design admits dyadic
    probabilities.
    """
    if isinstance(spec, EgoCentricDesign):
        return ObservabilityReport("ego-centric", spec.directed, True, True)
    if isinstance(spec, LinkTracingDesign):
        if spec.waves == 0:
            # zero-wave tracing observes exactly the initial sample's dyads,
            # which is the ego-centric design
            return ObservabilityReport("link-tracing", spec.directed, True, True)
        if spec.waves == 1:
            nodal = not spec.directed
            return ObservabilityReport("link-tracing", spec.directed, nodal, False)
        if spec.saturated:
            nodal = not spec.directed
            return ObservabilityReport("link-tracing", spec.directed, nodal, False)
        return ObservabilityReport("link-tracing", spec.directed, False, False)
    raise TypeError(f"unknown design family: {spec!r}")


def _require_dyadic(spec: DesignSpec | None):
    if spec is None:
        return
    report = observability_report(spec)
    if not report.dyadic_observable:
        raise UnobservableProbabilityError(
            f"dyadic sampling probabilities are not observable under a "
            f"{report.scheme} design with "
            f"{'directed' if report.directed else 'undirected'} observation; "
            "Horvitz-Thompson estimation of dyad totals is unavailable")


@dataclass(frozen=True)
class InclusionProbs:
    """Sampling probabilities under an ego-centric design.

    ``nodal[i]`` is the probability node ``i`` enters the sample, ``dyadic``
    the common probability any dyad is observed; ``pairwise`` gives the
    joint observation probability of two dyads.
    """

    psi: float
    nodal: np.ndarray
    dyadic: float
    directed: bool

    def pairwise(self, dyad1: tuple[int, int], dyad2: tuple[int, int]) -> float:
        if self.directed:
            if dyad1 == dyad2:
                return self.psi
            return self.psi if dyad1[0] == dyad2[0] else self.psi ** 2
        return pairwise_inclusion_prob(self.psi, dyad1, dyad2)


def inclusion_probs(spec: DesignSpec, n: int, psi: float | None = None) -> InclusionProbs:
    """All sampling probabilities of an ego-centric design; typed refusal
    for designs where they are unobservable."""
    _require_dyadic(spec)
    if psi is None:
        psi = getattr(spec.initial, "psi", None)
        if psi is None:
            raise ValueError("psi is required (the design has no Bernoulli initial)")
    psi = _check_psi(psi)
    dyadic = psi if spec.directed else egocentric_dyad_prob(psi)
    return InclusionProbs(psi, np.full(n, psi), dyadic, spec.directed)


def ht_edge_total(partial: PartialNetwork, psi: float,
                  spec: DesignSpec | None = None) -> float:
    """Horvitz-Thompson estimate of the edge total from an ego-centric sample.

    Each observed edge is weighted by the inverse of its observation
    probability.  ``spec`` (when given) is checked for dyadic-probability
    observability and a typed refusal is raised otherwise.
    """
    _require_dyadic(spec)
    psi = _check_psi(psi, allow_zero=False)
    pi = psi if partial.directed else egocentric_dyad_prob(psi)
    return partial.observed_edge_count() / pi


def _edge_pairs_weight(edges: list[tuple[int, int]], psi: float,
                       estimate: bool) -> float:
    pi = egocentric_dyad_prob(psi)
    inv2 = 1.0 / (pi * pi)
    total = 0.0
    for e1 in edges:
        for e2 in edges:
            joint = pairwise_inclusion_prob(psi, e1, e2)
            term = inv2 * joint - 1.0
            if estimate:
                term /= joint
            total += term
    return total


def ht_variance(y: Network, psi: float, spec: DesignSpec | None = None) -> float:
    """Exact design variance of the HT edge total under ego-centric sampling.

    Needs the full network (an oracle-side quantity): the double sum over
    dyad pairs keeps only terms where both dyads carry an edge.
    """
    _require_dyadic(spec)
    psi = _check_psi(psi, allow_zero=False)
    if y.directed:
        raise ValueError("the HT variance formulas cover undirected networks")
    return _edge_pairs_weight(y.edges(), psi, estimate=False)


def ht_variance_estimate(partial: PartialNetwork, psi: float,
                         spec: DesignSpec | None = None) -> float:
    """HT variance estimator from the observed dyads alone.

    The double sum runs over jointly observed edge pairs, each term divided
    by its joint observation probability; unbiased for :func:`ht_variance`
    under the ego-centric design.
    """
    _require_dyadic(spec)
    psi = _check_psi(psi, allow_zero=False)
    if partial.directed:
        raise ValueError("the HT variance formulas cover undirected networks")
    vals = np.triu(partial.values, 1)
    ii, jj = np.nonzero(vals)
    edges = list(zip(ii.tolist(), jj.tolist()))
    return _edge_pairs_weight(edges, psi, estimate=True)


def dyad_neighborhood(y: Network, dyad: tuple[int, int]) -> set[int]:
    """Nodes whose selection guarantees observation of ``dyad`` under
    one-wave tracing: the endpoints and their neighbors."""
    i, j = dyad
    if i == j:
        raise ValueError("a dyad joins two distinct nodes")
    out = {i, j}
    out.update(np.flatnonzero(y.adj[i]).tolist())
    out.update(np.flatnonzero(y.adj[j]).tolist())
    return out


def one_wave_dyad_prob(y: Network, dyad: tuple[int, int], psi: float) -> float:
    """One-wave dyadic probability ``1 - (1-psi)^|N(i,j)|`` (oracle-side:
    the neighborhood size needs the full network, which is why this
    probability is unobservable from a one-wave sample)."""
    psi = _check_psi(psi)
    return 1.0 - (1.0 - psi) ** len(dyad_neighborhood(y, dyad))


def one_wave_nodal_prob(psi: float, degree: int) -> float:
    """Probability a node of the given degree enters an undirected one-wave
    sample: itself or any neighbor must be selected."""
    psi = _check_psi(psi)
    return 1.0 - (1.0 - psi) ** (degree + 1)


def saturated_nodal_prob(psi: float, component_size: int) -> float:
    """Probability a node enters a saturated undirected sample: anyone in
    its connected component must be selected."""
    psi = _check_psi(psi)
    return 1.0 - (1.0 - psi) ** component_size


def component_sizes(y: Network) -> np.ndarray:
    """Size of each node's connected component (undirected)."""
    if y.directed:
        raise ValueError("component sizes are defined here for undirected networks")
    k, labels = connected_components(y.adj, directed=False)
    counts = np.bincount(labels, minlength=k)
    return counts[labels]
