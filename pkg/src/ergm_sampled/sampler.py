"""Metropolis sampling of exponential-family network distributions.

The sampler proposes single-dyad toggles uniformly over the toggleable dyads
and accepts with probability ``min(1, exp(sign * eta . change))``.  Two entry
points share the engine: :func:`sample_full` walks the whole dyad space and
:func:`sample_constrained` holds the observed dyads of a partial observation
fixed, walking only the free ones (a draw from the model conditional on the
observed data).

Defaults scale with the dyad count: ``burn_in`` of ``10 * n**2`` proposals
and ``thin`` of ``n**2`` proposals between retained draws.

Neighborhoods are kept as integer bitmasks (one machine word for n <= 64),
which makes the shared-partner change score a handful of popcounts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import Network, PartialNetwork
from .stats import StatisticSet

__all__ = ["ErgmModel", "McmcConfig", "SampleResult", "sample_full", "sample_constrained"]

_RNG_BLOCK = 8192


@dataclass(frozen=True)
class ErgmModel:
    """An ERGM: statistics, natural parameters and the node set they live on."""

    n: int
    statistics: tuple
    eta: np.ndarray
    attributes: object = None
    directed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "statistics", tuple(self.statistics))
        eta = np.asarray(self.eta, dtype=float)
        if eta.shape != (len(self.statistics),):
            raise ValueError(
                f"eta has {eta.shape} entries for {len(self.statistics)} statistics")
        object.__setattr__(self, "eta", eta)
        # validates statistic/attribute compatibility up front
        object.__setattr__(self, "_statset",
                           StatisticSet(self.statistics, self.attributes,
                                        self.n, self.directed))

    @property
    def statset(self) -> StatisticSet:
        return self._statset

    @property
    def labels(self) -> list[str]:
        return list(self._statset.labels)

    def stats(self, network: Network) -> np.ndarray:
        return self._statset.compute(network)

    def log_unnormalized(self, network: Network) -> float:
        """``eta . Z(y)``, the log of the unnormalized probability."""
        return float(self.eta @ self.stats(network))

    def with_eta(self, eta) -> "ErgmModel":
        return ErgmModel(self.n, self.statistics, np.asarray(eta, dtype=float),
                         self.attributes, self.directed)


@dataclass(frozen=True)
class McmcConfig:
    """Chain controls; ``None`` means the per-model default."""

    burn_in: int | None = None
    thin: int | None = None

    def resolved(self, n: int) -> tuple[int, int]:
        burn = self.burn_in if self.burn_in is not None else 10 * n * n
        thin = self.thin if self.thin is not None else n * n
        if burn < 0 or thin < 1:
            raise ValueError("burn_in must be >= 0 and thin >= 1")
        return burn, thin


@dataclass
class SampleResult:
    """Retained draws: statistic matrix, optional networks, chain diagnostics."""

    stats: np.ndarray
    networks: list[Network] | None
    acceptance_rate: float
    final: Network

    @property
    def size(self) -> int:
        return self.stats.shape[0]


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


class _Chain:
    """Mutable chain state with incremental statistic updates."""

    def __init__(self, model: ErgmModel, dyads: list[tuple[int, int]],
                 start: np.ndarray):
        statset = model.statset
        self.model = model
        self.n = model.n
        self.directed = model.directed
        self.dyads = dyads
        self.adj = np.array(start, dtype=np.uint8)
        self.nbr = [0] * self.n
        for i in range(self.n):
            row = 0
            for j in np.flatnonzero(self.adj[i]):
                row |= 1 << int(j)
            self.nbr[i] = row

        delta = statset.dyadic_delta_stack()
        self.dyadic_idx = statset.dyadic_indices
        self.lin_deltas = [tuple(float(delta[q, i, j]) for q in range(delta.shape[0]))
                           for (i, j) in dyads]
        eta = model.eta
        self.eta_lin = [sum(eta[k] * d for k, d in zip(self.dyadic_idx, row))
                        for row in self.lin_deltas]
        self.gwesp = [(int(k), float(eta[k]), float(statset.statistics[k].decay))
                      for k in statset.gwesp_indices]
        self.gw_tables = {}
        for _, _, decay in self.gwesp:
            w = 1.0 - math.exp(-decay)
            self.gw_tables[decay] = ([w ** k for k in range(self.n + 1)],
                                     math.exp(decay))
        self.z = statset.compute(Network(self.adj, self.directed))
        self.p = statset.p

    def gwesp_delta(self, i: int, j: int, decay: float) -> float:
        wpow, exp_tau = self.gw_tables[decay]
        nbr = self.nbr
        ni, nj = nbr[i], nbr[j]
        common = ni & nj
        present = (ni >> j) & 1
        delta = exp_tau * (1.0 - wpow[common.bit_count()])
        c = common
        while c:
            k = (c & -c).bit_length() - 1
            c &= c - 1
            nk = nbr[k]
            delta += (wpow[(ni & nk).bit_count() - present]
                      + wpow[(nj & nk).bit_count() - present])
        return delta

    def run(self, steps: int, rng: np.random.Generator) -> int:
        """Advance the chain ``steps`` proposals; returns acceptances."""
        dyads = self.dyads
        nbr = self.nbr
        adj = self.adj
        eta_lin = self.eta_lin
        gwesp = self.gwesp
        z = self.z
        dyadic_idx = self.dyadic_idx
        lin_deltas = self.lin_deltas
        directed = self.directed
        accepted = 0
        done = 0
        while done < steps:
            blk = min(_RNG_BLOCK, steps - done)
            picks = rng.integers(0, len(dyads), size=blk)
            logu = np.log(rng.random(blk))
            for t in range(blk):
                d = int(picks[t])
                i, j = dyads[d]
                present = (nbr[i] >> j) & 1
                sign = -1.0 if present else 1.0
                logr = eta_lin[d]
                gw_deltas = None
                if gwesp:
                    gw_deltas = []
                    for k, eta_k, decay in gwesp:
                        gd = self.gwesp_delta(i, j, decay)
                        gw_deltas.append((k, gd))
                        logr += eta_k * gd
                if sign * logr >= logu[t]:
                    accepted += 1
                    bit_i, bit_j = 1 << i, 1 << j
                    if present:
                        adj[i, j] = 0
                        nbr[i] &= ~bit_j
                        if not directed:
                            adj[j, i] = 0
                            nbr[j] &= ~bit_i
                    else:
                        adj[i, j] = 1
                        nbr[i] |= bit_j
                        if not directed:
                            adj[j, i] = 1
                            nbr[j] |= bit_i
                    for q, k in enumerate(dyadic_idx):
                        z[k] += sign * lin_deltas[d][q]
                    if gw_deltas:
                        for k, gd in gw_deltas:
                            z[k] += sign * gd
            done += blk
        return accepted

    def network(self) -> Network:
        return Network(self.adj, self.directed, copy=True)


def _run_sampler(model: ErgmModel, dyads, start, size, config, rng,
                 keep_networks) -> SampleResult:
    if size < 1:
        raise ValueError("size must be positive")
    if not dyads:
        # nothing to toggle: the conditional distribution is a point mass
        fixed = Network(start, directed=model.directed)
        z = model.stats(fixed)
        out = np.tile(z, (size, 1))
        networks = [fixed] * size if keep_networks else None
        return SampleResult(out, networks, 0.0, fixed)
    config = config or McmcConfig()
    burn_in, thin = config.resolved(model.n)
    rng = _as_rng(rng)
    chain = _Chain(model, dyads, start)
    accepted = chain.run(burn_in, rng)
    out = np.empty((size, chain.p))
    networks = [] if keep_networks else None
    for s in range(size):
        accepted += chain.run(thin, rng)
        out[s] = chain.z
        if keep_networks:
            networks.append(chain.network())
    total = burn_in + size * thin
    return SampleResult(out, networks, accepted / total, chain.network())


def sample_full(model: ErgmModel, size: int, config: McmcConfig | None = None,
                rng=None, initial: Network | None = None,
                keep_networks: bool = False) -> SampleResult:
    """Draws from the model over the full dyad space."""
    n = model.n
    if initial is not None:
        if initial.n != n or initial.directed != model.directed:
            raise ValueError("initial network does not match the model")
        start = initial.adj
    else:
        start = np.zeros((n, n), dtype=np.uint8)
    if model.directed:
        dyads = [(i, j) for i in range(n) for j in range(n) if i != j]
    else:
        dyads = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return _run_sampler(model, dyads, start, size, config, rng, keep_networks)


def sample_constrained(model: ErgmModel, partial: PartialNetwork, size: int,
                       config: McmcConfig | None = None, rng=None,
                       initial: Network | None = None,
                       keep_networks: bool = False) -> SampleResult:
    """Draws from the model conditional on the observed dyads of ``partial``.

    Only the free dyads are proposed; observed dyads stay at their observed
    values.  ``initial`` (when given) must agree with the observations.
    """
    if partial.n != model.n or partial.directed != model.directed:
        raise ValueError("partial observation does not match the model")
    mask = partial.pattern.mask
    if initial is not None:
        if initial.n != model.n or initial.directed != model.directed:
            raise ValueError("initial network does not match the model")
        if not np.array_equal(initial.adj * mask, partial.values):
            raise ValueError("initial network disagrees with the observed dyads")
        start = initial.adj
    else:
        start = partial.values
    dyads = partial.pattern.free_dyads()
    return _run_sampler(model, dyads, start, size, config, rng, keep_networks)
