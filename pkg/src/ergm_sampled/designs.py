"""Network sampling designs: realization and exact design probabilities.

Two design families are covered, each in an undirected and a directed
variant:

* **ego-centric** -- nodes enter the sample independently with probability
  ``psi``; every dyad incident to a sampled node is observed (out-dyads only
  when directed).
* **link-tracing** -- an initial sample is drawn, then for ``k`` waves every
  node with an observed tie from the current sample is enrolled with
  probability one.  ``waves=SATURATED`` traces until a wave adds nobody.

A design is *realized* against a fixed network ``y``: given the initial
sample the rest is deterministic, so exact design probabilities
``P(D = d | Y = y; psi)`` follow by enumerating initial samples and adding
up the probabilities of those whose realization produces ``d``.  Several
initial samples can yield the same observation pattern, which the
enumeration handles automatically (in particular the ego-centric all-ones
pattern, which arises from every selection of ``n-1`` or ``n`` nodes).

:func:`is_adaptive` tests the missing-at-random property that makes a design
ignorable for likelihood inference: the probability of the realized pattern
must be the same under every completion of the observed data.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .graphs import Network, ObservationPattern, PartialNetwork, overlay

__all__ = [
    "SATURATED",
    "BernoulliInitial",
    "FixedSeeds",
    "DesignSpec",
    "EgoCentricDesign",
    "LinkTracingDesign",
    "DesignRealization",
    "AdaptivityWitness",
    "EnumerationBoundExceeded",
    "draw_initial",
    "trace",
    "design_distribution",
    "design_probability",
    "design_probability_mc",
    "is_adaptive",
    "all_seed_pair_samples",
]

SATURATED = math.inf

_DEFAULT_BOUND = 20


class EnumerationBoundExceeded(ValueError):
    """Exact design-probability enumeration was asked for too many nodes."""


@dataclass(frozen=True)
class BernoulliInitial:
    """Each node enters the initial sample independently with probability psi."""

    psi: float

    def __post_init__(self):
        if not 0.0 <= self.psi <= 1.0:
            raise ValueError("psi must lie in [0, 1]")


@dataclass(frozen=True)
class FixedSeeds:
    """Initial sample is a uniform random m-subset, drawn without replacement."""

    m: int

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("seed count must be nonnegative")


@dataclass(frozen=True)
class DesignSpec:
    """Base of the design family hierarchy; use the concrete subclasses."""

    initial: BernoulliInitial | FixedSeeds
    directed: bool = False

    @property
    def family(self) -> str:
        raise NotImplementedError

    def realize(self, y: Network, s0: np.ndarray) -> "DesignRealization":
        raise NotImplementedError


@dataclass(frozen=True)
class EgoCentricDesign(DesignSpec):
    """Observe all dyads incident to an initial probability sample of nodes."""

    @property
    def family(self) -> str:
        return "ego-centric"

    def realize(self, y: Network, s0: np.ndarray) -> "DesignRealization":
        s0 = np.asarray(s0, dtype=np.uint8)
        pattern = ObservationPattern.from_selected(s0, self.directed, waves=(s0,))
        return DesignRealization(pattern, exhausted=False)


@dataclass(frozen=True)
class LinkTracingDesign(DesignSpec):
    """Enroll observed partners of the current sample for ``waves`` rounds.

    ``waves`` is a nonnegative integer or ``SATURATED``; zero waves means the
    initial sample is used as-is (useful for re-tracing a merged sample).
    """

    waves: int | float = 1

    def __post_init__(self):
        w = self.waves
        if w != SATURATED and (w != int(w) or w < 0):
            raise ValueError("waves must be a nonnegative integer or SATURATED")

    @property
    def family(self) -> str:
        return "link-tracing"

    @property
    def saturated(self) -> bool:
        return self.waves == SATURATED

    def realize(self, y: Network, s0: np.ndarray) -> "DesignRealization":
        if y.directed != self.directed:
            raise ValueError("network directedness does not match the design")
        s0 = np.asarray(s0, dtype=np.uint8)
        n = y.n
        adj = y.adj
        waves = [s0.copy()]
        cum = s0.astype(bool).copy()
        # a wave recursion adds at least one node per nonempty wave, so it
        # cannot run for more than n rounds even when saturated
        bound = n if self.saturated else min(int(self.waves), n)
        exhausted = False
        for m in range(1, bound + 1):
            prev = waves[-1]
            reached = (prev @ adj) > 0  # follow (out-)ties of the last wave
            new = reached & ~cum
            if not new.any():
                exhausted = bool(self.saturated or m < self.waves)
                break
            waves.append(new.astype(np.uint8))
            cum |= new
        else:
            if self.saturated:
                exhausted = True
        selected = cum.astype(np.uint8)
        pattern = ObservationPattern.from_selected(selected, self.directed,
                                                   waves=tuple(waves))
        return DesignRealization(pattern, exhausted=exhausted)


@dataclass(frozen=True)
class DesignRealization:
    """Observation pattern produced by one run of a design.

    ``exhausted`` records that some wave added no nodes before the design's
    wave bound (always true for saturated tracing, which runs to exhaustion).
    """

    pattern: ObservationPattern
    exhausted: bool

    @property
    def sample(self) -> np.ndarray:
        return self.pattern.selected

    @property
    def n_sampled(self) -> int:
        return int(self.pattern.selected.sum())


def draw_initial(spec: DesignSpec, n: int, rng) -> np.ndarray:
    """Draw the initial node sample ``S_0`` as a 0/1 vector of length n."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    init = spec.initial
    if isinstance(init, BernoulliInitial):
        return (rng.random(n) < init.psi).astype(np.uint8)
    if isinstance(init, FixedSeeds):
        if init.m > n:
            raise ValueError(f"cannot draw {init.m} seeds from {n} nodes")
        s0 = np.zeros(n, dtype=np.uint8)
        s0[rng.choice(n, size=init.m, replace=False)] = 1
        return s0
    raise TypeError(f"unknown initial sample spec: {init!r}")


def trace(spec: DesignSpec, y: Network, s0) -> DesignRealization:
    """Run the design deterministically from the initial sample ``s0``."""
    s0 = np.asarray(s0, dtype=np.uint8)
    if s0.shape != (y.n,):
        raise ValueError("s0 must be a 0/1 vector of length n")
    return spec.realize(y, s0)


def _initial_weights(spec: DesignSpec, n: int):
    """Yield ``(s0 vector, probability)`` over the whole initial-sample space."""
    init = spec.initial
    if isinstance(init, BernoulliInitial):
        psi = init.psi
        for code in range(1 << n):
            s0 = np.fromiter(((code >> b) & 1 for b in range(n)), dtype=np.uint8,
                             count=n)
            k = int(s0.sum())
            yield s0, psi ** k * (1.0 - psi) ** (n - k)
    elif isinstance(init, FixedSeeds):
        if init.m > n:
            raise ValueError(f"cannot draw {init.m} seeds from {n} nodes")
        w = 1.0 / math.comb(n, init.m)
        for seeds in itertools.combinations(range(n), init.m):
            s0 = np.zeros(n, dtype=np.uint8)
            s0[list(seeds)] = 1
            yield s0, w
    else:
        raise TypeError(f"unknown initial sample spec: {init!r}")


def design_distribution(spec: DesignSpec, y: Network,
                        bound: int = _DEFAULT_BOUND) -> list[tuple[ObservationPattern, float]]:
    """Exact distribution of the observation pattern given ``y``.

    Enumerates every initial sample, so ``n`` must not exceed ``bound``.
    Patterns reachable from several initial samples appear once with their
    probabilities merged.
    """
    n = y.n
    if n > bound:
        raise EnumerationBoundExceeded(
            f"n={n} exceeds the exact enumeration bound ({bound})")
    acc: dict[bytes, tuple[ObservationPattern, float]] = {}
    for s0, w in _initial_weights(spec, n):
        if w == 0.0:
            continue
        pattern = spec.realize(y, s0).pattern
        key = pattern.mask.tobytes()
        if key in acc:
            acc[key] = (acc[key][0], acc[key][1] + w)
        else:
            acc[key] = (pattern, w)
    return list(acc.values())


def _egocentric_probability(spec: EgoCentricDesign, d: ObservationPattern,
                            psi: float) -> float:
    """Closed-form ego-centric pattern probability, preimage-corrected.

    The node-selection vector is read off the mask.  Undirected masks with
    every dyad observed arise from any selection of at least ``n - 1`` nodes,
    so that pattern aggregates those selection probabilities.
    """
    n = d.n
    mask = d.mask
    off = ~np.eye(n, dtype=bool)
    if spec.directed:
        rows = mask.sum(axis=1)
        s = rows == n - 1
        if not np.array_equal(mask, (np.repeat(s[:, None], n, axis=1) & off).astype(np.uint8)):
            return 0.0
        k = int(s.sum())
        return psi ** k * (1.0 - psi) ** (n - k)
    if mask[off].all():
        # all-ones pattern: every selection leaving at most one node out
        return psi ** n + n * psi ** (n - 1) * (1.0 - psi)
    rows = mask.sum(axis=1)
    s = rows == n - 1
    expect = np.maximum.outer(s, s) & off
    if not np.array_equal(mask, expect.astype(np.uint8)):
        return 0.0
    k = int(s.sum())
    return psi ** k * (1.0 - psi) ** (n - k)


def design_probability(spec: DesignSpec, d: ObservationPattern,
                       y: Network | None = None,
                       bound: int = _DEFAULT_BOUND) -> float:
    """Exact ``P(D = d | Y = y; psi)``.

    Ego-centric designs use the closed form (no network needed); link-tracing
    designs require ``y`` and enumerate the ``2^n`` (or ``C(n, m)``) initial
    samples, so they are limited to ``n <= bound``.
    """
    if isinstance(spec, EgoCentricDesign) and isinstance(spec.initial, BernoulliInitial):
        if d.directed != spec.directed:
            raise ValueError("pattern directedness does not match the design")
        return _egocentric_probability(spec, d, spec.initial.psi)
    if y is None:
        raise ValueError("link-tracing design probabilities need the full network")
    if d.n != y.n or d.directed != y.directed:
        raise ValueError("pattern and network disagree on n or directedness")
    n = y.n
    if n > bound:
        raise EnumerationBoundExceeded(
            f"n={n} exceeds the exact enumeration bound ({bound}); "
            "use design_probability_mc for a Monte Carlo estimate")
    target = d.mask.tobytes()
    total = 0.0
    for s0, w in _initial_weights(spec, n):
        if w == 0.0:
            continue
        if spec.realize(y, s0).pattern.mask.tobytes() == target:
            total += w
    return total


def design_probability_mc(spec: DesignSpec, d: ObservationPattern, y: Network,
                          draws: int = 10000, rng=None) -> tuple[float, float]:
    """Monte Carlo estimate of ``P(D = d | Y = y; psi)`` with its standard error.

    For networks beyond the exact enumeration bound.
    """
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    target = d.mask.tobytes()
    hits = 0
    for _ in range(draws):
        s0 = draw_initial(spec, y.n, rng)
        if spec.realize(y, s0).pattern.mask.tobytes() == target:
            hits += 1
    p = hits / draws
    se = math.sqrt(max(p * (1.0 - p), 0.0) / draws)
    return p, se


@dataclass(frozen=True)
class AdaptivityWitness:
    """Two completions of the observed data with different design probabilities."""

    network_a: Network
    network_b: Network
    prob_a: float
    prob_b: float


def is_adaptive(spec: DesignSpec, partial: PartialNetwork,
                tol: float = 1e-12,
                bound: int = _DEFAULT_BOUND) -> tuple[bool, AdaptivityWitness | None]:
    """Check the missing-at-random property of a design at observed data.

    The design is adaptive at ``partial`` when ``P(D = d | Y = y)`` is the
    same for every completion ``y`` of the observed dyads, ``d`` being the
    observed pattern.  Returns ``(True, None)`` or ``(False, witness)`` with
    a differing pair of completions.
    """
    pattern = partial.pattern
    n_free = pattern.n_free_dyads()
    if n_free > bound:
        raise EnumerationBoundExceeded(
            f"{n_free} free dyads exceed the completion enumeration bound ({bound})")
    reference: tuple[Network, float] | None = None
    for code in range(1 << n_free):
        bits = [(code >> b) & 1 for b in range(n_free)]
        y = overlay(partial, bits)
        p = design_probability(spec, pattern, y, bound=bound)
        if reference is None:
            reference = (y, p)
        elif abs(p - reference[1]) > tol * max(1.0, abs(reference[1])):
            return False, AdaptivityWitness(reference[0], y, reference[1], p)
    return True, None


def all_seed_pair_samples(y: Network, waves: int | float
                          ) -> list[tuple[tuple[int, int], DesignRealization]]:
    """Deterministic link-tracing realization from every unordered seed pair.

    Returns ``n(n-1)/2`` entries ``((i, j), realization)`` ordered by pair.
    """
    if y.directed:
        raise ValueError("seed-pair sweeps are defined for undirected networks")
    spec = LinkTracingDesign(initial=FixedSeeds(2), waves=waves, directed=False)
    out = []
    for i in range(y.n):
        for j in range(i + 1, y.n):
            s0 = np.zeros(y.n, dtype=np.uint8)
            s0[i] = s0[j] = 1
            out.append(((i, j), spec.realize(y, s0)))
    return out
