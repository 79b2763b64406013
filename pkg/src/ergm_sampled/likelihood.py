"""Likelihood-based estimation for fully and partially observed networks.

The complete-data MLE solves the moment equation ``E_eta[Z] = Z(y)``.  For a
partial observation the face-value likelihood is proportional to
``exp[kappa(eta | y_obs) - kappa(eta)]``, the ratio of the normalizing
constant restricted to completions of the observed data to the full one; for
amenable (adaptive, parameter-distinct) designs this is also the
full-information likelihood for ``eta``.

Both are maximized by the same machinery (``mle_complete`` is the special
case where the completion space is a single network): draw one chain over
the completions and one over all networks at an anchor parameter, build the
importance-sampled log-likelihood-ratio surface

    l(eta) - l(eta0) = log E^_c[exp((eta-eta0).Z)] - log E^_f[exp((eta-eta0).Z)],

climb it with a safeguarded Newton method that refuses to leave the region
where the tilted effective sample size stays above a floor, then re-anchor
and repeat until the two chains' statistic means agree to within Monte Carlo
error.  Degeneracy (an MLE on the convex-hull boundary, as for a sample with
no observed edges) is detected by a parameter-norm bound and by linear
programming on the sampled hull.

Also here: exact small-network log-likelihoods (enumeration), the mean-value
parameterization, bridged Kullback-Leibler divergence between fits, the
closed-form design-parameter MLE, and the numerical amenability check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.special import logsumexp

from . import enumeration
from .designs import DesignRealization, DesignSpec, BernoulliInitial, design_probability
from .graphs import Network, NodeAttributes, ObservationPattern, PartialNetwork, overlay
from .sampler import ErgmModel, McmcConfig, sample_constrained, sample_full
from .stats import Edges, StatisticSet

__all__ = [
    "FitConfig",
    "FitResult",
    "MeanValue",
    "KlEstimate",
    "AmenabilityReport",
    "exact_loglik",
    "pseudolikelihood_eta",
    "mle_complete",
    "mle_missing",
    "mean_value_params",
    "kl_divergence",
    "design_parameter_mle",
    "amenability_check",
]

_EXACT_BOUND = 22  # max free dyads enumerated by the exact log-likelihood


@dataclass(frozen=True)
class FitConfig:
    """Monte Carlo and optimizer controls shared by the fitting routines.

    ``draws`` is the retained sample size per chain per anchor; ``burn_in``
    and ``thin`` default to the sampler's ``10 n^2`` and ``n^2``.  The
    anchor parameter is re-set at most ``max_anchors`` times; within one
    anchor the surface is climbed only while both chains' tilted effective
    sample sizes stay above ``ess_floor * draws``.  ``eta_bound`` is the
    degeneracy cutoff on any single coordinate, and ``bridge_steps`` the
    number of geometric path segments for normalizing-constant differences.
    """

    draws: int = 1024
    burn_in: int | None = None
    thin: int | None = None
    max_anchors: int = 20
    ess_floor: float = 0.10
    eta_bound: float = 20.0
    bridge_steps: int = 8

    def mcmc(self) -> McmcConfig:
        return McmcConfig(burn_in=self.burn_in, thin=self.thin)


@dataclass
class FitResult:
    """Outcome of a maximum-likelihood fit.

    ``eta_hat`` is ``None`` when the fit is degenerate (the likelihood has no
    finite maximizer); such results are excluded from downstream summaries.
    ``mean_value`` is the estimated mean-value parameterization
    ``E_eta_hat[Z]`` with Monte Carlo standard errors ``mean_value_se``.
    """

    labels: list[str]
    eta_hat: np.ndarray | None
    mean_value: np.ndarray | None
    mean_value_se: np.ndarray | None
    converged: bool
    degenerate: bool
    std_errors: np.ndarray | None
    acceptance_rate: float
    effective_sample_size: float
    anchors_used: int


@dataclass(frozen=True)
class MeanValue:
    """Monte Carlo estimate of ``E_eta[Z]`` with standard errors."""

    value: np.ndarray
    se: np.ndarray
    acceptance_rate: float


@dataclass(frozen=True)
class KlEstimate:
    """Estimated Kullback-Leibler divergence with Monte Carlo standard error."""

    value: float
    se: float
    mean_term: float
    kappa_term: float


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def _batch_se(draws: np.ndarray) -> np.ndarray:
    """Batch-means standard error of the column means of a chain."""
    s = draws.shape[0]
    if s < 4:
        return np.zeros(draws.shape[1])
    length = max(1, int(math.sqrt(s)))
    nb = s // length
    batches = draws[: nb * length].reshape(nb, length, -1).mean(axis=1)
    return batches.std(axis=0, ddof=1) / math.sqrt(nb)


def exact_loglik(eta, partial: PartialNetwork, statistics,
                 attributes: NodeAttributes | None = None) -> float:
    """Exact face-value log-likelihood by enumeration (small networks only).

    ``log sum_{completions} exp(eta . Z) - log sum_{all networks} exp(eta . Z)``;
    for a fully observed network this is the ordinary log-likelihood.
    """
    n = partial.n
    statset = StatisticSet(statistics, attributes, n, partial.directed)
    m_total = n * (n - 1) if partial.directed else n * (n - 1) // 2
    if m_total > _EXACT_BOUND:
        raise ValueError(
            f"exact log-likelihood needs the full network space; {m_total} dyads "
            f"exceed the enumeration bound ({_EXACT_BOUND})")
    eta = np.asarray(eta, dtype=float)
    comp = enumeration.completion_stats(partial, statset)
    full = enumeration.all_graph_stats(statset)
    return float(logsumexp(comp @ eta) - logsumexp(full @ eta))


def pseudolikelihood_eta(partial: PartialNetwork, statset: StatisticSet,
                         clip: float = 10.0) -> np.ndarray:
    """Independent-dyad (pseudo-likelihood) estimate, used as a starting value.

    Logistic regression of each observed dyad's state on its change score,
    holding the rest of the data fixed (free dyads at zero).  Separable
    configurations are clipped rather than allowed to run off to infinity.
    """
    state = Network(partial.values, partial.directed)
    nbrs = state.neighbor_sets()
    dyads = partial.pattern.observed_dyads()
    if not dyads:
        raise ValueError("pseudo-likelihood needs at least one observed dyad")
    x = np.array([statset.change(nbrs, state.adj, i, j) for (i, j) in dyads])
    r = np.array([state.adj[i, j] for (i, j) in dyads], dtype=float)
    eta = np.zeros(statset.p)
    for _ in range(30):
        mu = 1.0 / (1.0 + np.exp(-np.clip(x @ eta, -35, 35)))
        grad = x.T @ (r - mu)
        w = mu * (1.0 - mu)
        hess = (x * w[:, None]).T @ x + 1e-8 * np.eye(statset.p)
        step = np.linalg.solve(hess, grad)
        eta = np.clip(eta + step, -clip, clip)
        if np.max(np.abs(step)) < 1e-8:
            break
    return eta


class _Tilt:
    """Exponentially tilted summaries of a statistic sample."""

    __slots__ = ("lse", "mean", "cov", "ess")

    def __init__(self, z: np.ndarray, delta: np.ndarray):
        s = z @ delta
        m = float(s.max())
        w = np.exp(s - m)
        sw = float(w.sum())
        size = z.shape[0]
        self.lse = m + math.log(sw / size)
        wn = w / sw
        self.mean = wn @ z
        centered = z - self.mean
        self.cov = centered.T @ (centered * wn[:, None])
        self.ess = 1.0 / float(wn @ wn)


def _climb_surface(zc: np.ndarray, zf: np.ndarray, eta0: np.ndarray,
                   ess_floor: float, eta_bound: float,
                   max_inner: int = 60) -> np.ndarray:
    """Maximize the importance-sampled log-likelihood-ratio surface.

    Newton ascent with backtracking; a step is accepted only if it improves
    the surface while keeping both tilted effective sample sizes above their
    floors and the parameter inside the degeneracy bound.
    """
    floor_c = ess_floor * zc.shape[0]
    floor_f = ess_floor * zf.shape[0]
    eta = eta0.astype(float).copy()
    for _ in range(max_inner):
        tc = _Tilt(zc, eta - eta0)
        tf = _Tilt(zf, eta - eta0)
        obj = tc.lse - tf.lse
        grad = tc.mean - tf.mean
        if np.max(np.abs(grad)) < 1e-9:
            break
        hess = tc.cov - tf.cov
        try:
            step = np.linalg.solve(hess, -grad)
        except np.linalg.LinAlgError:
            step = grad.copy()
        if not np.all(np.isfinite(step)) or float(step @ grad) <= 0.0:
            step = grad.copy()
        norm = np.max(np.abs(step))
        if norm > 5.0:  # keep single moves modest; re-anchoring does the rest
            step *= 5.0 / norm
        scale = 1.0
        moved = False
        for _ in range(40):
            cand = eta + scale * step
            if np.max(np.abs(cand)) <= eta_bound:
                c2 = _Tilt(zc, cand - eta0)
                f2 = _Tilt(zf, cand - eta0)
                if (c2.ess >= floor_c and f2.ess >= floor_f
                        and c2.lse - f2.lse > obj + 1e-13):
                    eta = cand
                    moved = True
                    break
            scale *= 0.5
        if not moved:
            break
    return eta


def _in_hull(points: np.ndarray, target: np.ndarray) -> bool:
    """Is ``target`` a convex combination of the rows of ``points``?"""
    s, p = points.shape
    a_eq = np.vstack([points.T, np.ones((1, s))])
    b_eq = np.concatenate([target, [1.0]])
    res = linprog(np.zeros(s), A_eq=a_eq, b_eq=b_eq, bounds=(0, None),
                  method="highs")
    return bool(res.status == 0)


def _hull_step_target(points: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, float]:
    """Pull an out-of-hull target toward the sample mean until it is inside.

    Returns the adjusted target and the fraction ``gamma`` of the way from
    the mean to the original target that was found feasible (1 when the
    target is already interior).
    """
    center = points.mean(axis=0)
    direction = target - center
    if not np.any(direction):
        return target, 1.0
    s = points.shape[0]
    # maximize gamma subject to: points' lambda - gamma * direction = center
    c = np.zeros(s + 1)
    c[-1] = -1.0
    a_eq = np.vstack([
        np.hstack([points.T, -direction[:, None]]),
        np.hstack([np.ones((1, s)), np.zeros((1, 1))]),
    ])
    b_eq = np.concatenate([center, [1.0]])
    bounds = [(0, None)] * s + [(0, 2.0)]
    res = linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status != 0:
        return center, 0.0
    gamma = float(res.x[-1])
    if gamma >= 1.0:
        return target, 1.0
    return center + 0.95 * gamma * direction, gamma


def _draw_chains(model: ErgmModel, partial: PartialNetwork | None,
                 config: FitConfig, rng, init_full, init_cons):
    """One full-space chain and (for missing data) one constrained chain."""
    mcmc = config.mcmc()
    full = sample_full(model, config.draws, mcmc, rng, initial=init_full)
    cons = None
    if partial is not None:
        cons = sample_constrained(model, partial, config.draws, mcmc, rng,
                                  initial=init_cons)
    return full, cons


def _degenerate_result(labels, acceptance, ess, anchors) -> FitResult:
    return FitResult(labels=labels, eta_hat=None, mean_value=None,
                     mean_value_se=None, converged=False, degenerate=True,
                     std_errors=None, acceptance_rate=acceptance,
                     effective_sample_size=ess, anchors_used=anchors)


def _std_errors(cov_f: np.ndarray, cov_c: np.ndarray | None) -> np.ndarray | None:
    info = cov_f - (cov_c if cov_c is not None else 0.0)
    try:
        inv = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        return None
    diag = np.diagonal(inv)
    if np.any(diag <= 0):
        return None
    return np.sqrt(diag)


def _mcmc_mle(y_obs: Network | None, partial: PartialNetwork | None,
              statistics, attributes, config: FitConfig, rng) -> FitResult:
    """Shared anchor loop; exactly one of ``y_obs`` / ``partial`` is set."""
    config = config or FitConfig()
    rng = _as_rng(rng)
    complete = partial is None
    if complete:
        n, directed = y_obs.n, y_obs.directed
        data_partial = PartialNetwork(
            ObservationPattern(np.ones((n, n), dtype=np.uint8), directed,
                               copy=False),
            y_obs.adj)
    else:
        n, directed = partial.n, partial.directed
        if partial.pattern.n_observed_dyads() == 0:
            raise ValueError("cannot fit an entirely unobserved network")
        data_partial = partial
    statset = StatisticSet(statistics, attributes, n, directed)
    labels = list(statset.labels)
    p = statset.p

    # Exact boundary degeneracy: with an edge-count statistic in the model, a
    # sample whose observed dyads are all empty (or all full) pins the
    # likelihood supremum at the edge of the parameter space -- no finite
    # maximizer exists, whatever the unobserved dyads hold.
    if any(isinstance(s, Edges) for s in statset.statistics):
        observed_edges = data_partial.observed_edge_count()
        if observed_edges in (0, data_partial.pattern.n_observed_dyads()):
            return _degenerate_result(labels, 0.0, 0.0, 0)

    model = ErgmModel(n, statistics, np.zeros(p), attributes, directed)
    eta0 = pseudolikelihood_eta(data_partial, statset)
    z_obs = statset.compute(y_obs) if complete else None

    init_full = y_obs if complete else Network(data_partial.values, directed)
    init_cons = None if complete else Network(data_partial.values, directed)
    acceptance = 0.0
    ess = float(config.draws)

    for anchor in range(1, config.max_anchors + 1):
        full, cons = _draw_chains(model.with_eta(eta0),
                                  None if complete else data_partial,
                                  config, rng, init_full, init_cons)
        init_full = full.final
        zf = full.stats
        acceptance = full.acceptance_rate
        mean_f = zf.mean(axis=0)
        se_f = _batch_se(zf)
        if complete:
            target, se_c, cov_c = z_obs, np.zeros(p), None
        else:
            init_cons = cons.final
            zc = cons.stats
            target = zc.mean(axis=0)
            se_c = _batch_se(zc)
            centered = zc - target
            cov_c = centered.T @ centered / zc.shape[0]

        tol = np.sqrt(se_f ** 2 + se_c ** 2)
        tol = np.maximum(tol, 1e-12 * (1.0 + np.abs(target)))
        if np.all(np.abs(target - mean_f) <= tol):
            centered_f = zf - mean_f
            cov_f = centered_f.T @ centered_f / zf.shape[0]
            return FitResult(labels=labels, eta_hat=eta0, mean_value=mean_f,
                             mean_value_se=se_f, converged=True,
                             degenerate=False,
                             std_errors=_std_errors(cov_f, cov_c),
                             acceptance_rate=acceptance,
                             effective_sample_size=ess,
                             anchors_used=anchor)

        if complete:
            stepped, gamma = _hull_step_target(zf, z_obs)
            if gamma < 1e-3:
                return _degenerate_result(labels, acceptance, ess, anchor)
            zc_surface = stepped[None, :]
        else:
            zc_surface = zc
        eta1 = _climb_surface(zc_surface, zf, eta0, config.ess_floor,
                              config.eta_bound)
        ess = _Tilt(zf, eta1 - eta0).ess
        if np.max(np.abs(eta1)) >= config.eta_bound:
            return _degenerate_result(labels, acceptance, ess, anchor)
        eta0 = eta1

    # out of anchors: report the last state, flagging hull-boundary targets
    degenerate = not _in_hull(zf, target)
    return FitResult(labels=labels, eta_hat=None if degenerate else eta0,
                     mean_value=None if degenerate else mean_f,
                     mean_value_se=None if degenerate else se_f,
                     converged=False, degenerate=degenerate,
                     std_errors=None, acceptance_rate=acceptance,
                     effective_sample_size=ess,
                     anchors_used=config.max_anchors)


def mle_complete(y: Network, statistics, attributes: NodeAttributes | None = None,
                 config: FitConfig | None = None, rng=None) -> FitResult:
    """MCMC maximum-likelihood fit to a fully observed network."""
    return _mcmc_mle(y, None, statistics, attributes, config or FitConfig(), rng)


def mle_missing(partial: PartialNetwork, statistics,
                attributes: NodeAttributes | None = None,
                config: FitConfig | None = None, rng=None) -> FitResult:
    """Face-value maximum-likelihood fit to a partially observed network.

    For amenable designs this maximizes the full-information likelihood.  A
    fully observed input reduces exactly to :func:`mle_complete` (same
    random-number stream, same result).
    """
    if partial.pattern.is_complete():
        return mle_complete(overlay(partial, []), statistics, attributes,
                            config or FitConfig(), rng)
    return _mcmc_mle(None, partial, statistics, attributes,
                     config or FitConfig(), rng)


def mean_value_params(eta, statistics, attributes, n: int,
                      directed: bool = False,
                      config: FitConfig | None = None, rng=None,
                      initial: Network | None = None) -> MeanValue:
    """Mean-value parameterization ``E_eta[Z]`` by Monte Carlo."""
    config = config or FitConfig()
    model = ErgmModel(n, tuple(statistics), np.asarray(eta, dtype=float),
                      attributes, directed)
    res = sample_full(model, config.draws, config.mcmc(), _as_rng(rng),
                      initial=initial)
    return MeanValue(res.stats.mean(axis=0), _batch_se(res.stats),
                     res.acceptance_rate)


def _kappa_difference(xi: np.ndarray, eta: np.ndarray, model: ErgmModel,
                      config: FitConfig, rng,
                      initial: Network | None) -> tuple[float, float, Network | None]:
    """``kappa(eta) - kappa(xi)`` by bridged importance sampling.

    The path from ``xi`` to ``eta`` is split into ``bridge_steps`` equal
    segments; each segment contributes ``log E_theta[exp(d.Z)]`` estimated
    from a chain at the segment's start.  Returns (estimate, standard error,
    last chain state).
    """
    steps = max(1, config.bridge_steps)
    total = 0.0
    var = 0.0
    state = initial
    for t in range(steps):
        theta = xi + (eta - xi) * (t / steps)
        delta = (eta - xi) / steps
        res = sample_full(model.with_eta(theta), config.draws, config.mcmc(),
                          rng, initial=state)
        state = res.final
        s = res.stats @ delta
        m = float(s.max(initial=0.0))
        w = np.exp(s - m)
        mean_w = float(w.mean())
        total += m + math.log(mean_w)
        se_w = float(_batch_se(w[:, None])[0])
        var += (se_w / mean_w) ** 2
    return total, math.sqrt(var), state


def kl_divergence(xi, eta, statistics, attributes, n: int,
                  directed: bool = False, config: FitConfig | None = None,
                  rng=None, mean_stats=None,
                  initial: Network | None = None) -> KlEstimate:
    """Kullback-Leibler divergence ``KL(xi || eta)`` between two fits.

    ``(xi - eta) . E_xi[Z] + kappa(eta) - kappa(xi)``: the expectation comes
    from Monte Carlo under ``xi`` unless ``mean_stats`` supplies it exactly
    (as when ``xi`` is a converged MLE, where ``E_xi[Z]`` equals the observed
    statistics), and the normalizing-constant difference is estimated along a
    bridged path.
    """
    config = config or FitConfig()
    rng = _as_rng(rng)
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    model = ErgmModel(n, tuple(statistics), xi, attributes, directed)
    if mean_stats is not None:
        mean = np.asarray(mean_stats, dtype=float)
        mean_var = 0.0
        state = initial
    else:
        mv = mean_value_params(xi, statistics, attributes, n, directed,
                               config, rng, initial=initial)
        mean = mv.value
        mean_var = float(np.sum(((xi - eta) * mv.se) ** 2))
        state = initial
    kappa, kappa_se, _ = _kappa_difference(xi, eta, model, config, rng, state)
    mean_term = float((xi - eta) @ mean)
    value = mean_term + kappa
    se = math.sqrt(mean_var + kappa_se ** 2)
    return KlEstimate(value=value, se=se, mean_term=mean_term, kappa_term=kappa)


def design_parameter_mle(realization: DesignRealization,
                         spec: DesignSpec | None = None) -> float:
    """Closed-form MLE of the initial-selection probability: ``|S_0| / n``.

    Valid without reference to the network model, whatever the unobserved
    dyads are.
    """
    if spec is not None and not isinstance(spec.initial, BernoulliInitial):
        raise ValueError("the design-parameter MLE applies to Bernoulli initials")
    waves = realization.pattern.waves
    if not waves:
        raise ValueError("realization carries no initial-sample wave")
    s0 = waves[0]
    return float(s0.sum() / s0.shape[0])


@dataclass(frozen=True)
class AmenabilityReport:
    """Outcome of the numerical amenability (ignorability) check.

    ``log_ratios`` holds, per grid point, the log of the full-information to
    face-value likelihood ratio; for an amenable design it is constant in
    ``eta`` (the design factor does not depend on the model parameter).
    """

    eta_grid: np.ndarray
    log_ratios: np.ndarray
    max_deviation: float
    amenable: bool
    tol: float


def amenability_check(spec: DesignSpec, partial: PartialNetwork, statistics,
                      attributes: NodeAttributes | None = None,
                      eta_grid=None, tol: float = 1e-12,
                      bound: int = _EXACT_BOUND) -> AmenabilityReport:
    """Verify that a design is ignorable for likelihood inference at ``partial``.

    For every completion of the observed data the design probability of the
    realized pattern is combined with the model term; the log-ratio of the
    full-information likelihood to the face-value likelihood is computed on
    a grid of parameter values.  Amenable designs give a ratio constant in
    ``eta`` to numerical precision; non-adaptive designs show real variation.
    """
    statset = StatisticSet(statistics, attributes, partial.n, partial.directed)
    n_free = partial.pattern.n_free_dyads()
    if n_free > bound:
        raise ValueError(
            f"{n_free} free dyads exceed the completion enumeration bound ({bound})")
    if eta_grid is None:
        eta_grid = np.linspace(-1.0, 1.0, 21)[:, None] * np.ones(statset.p)
    eta_grid = np.atleast_2d(np.asarray(eta_grid, dtype=float))
    comp = enumeration.completion_stats(partial, statset)

    log_pd = np.empty(comp.shape[0])
    pattern = partial.pattern
    for code in range(comp.shape[0]):
        bits = [(code >> b) & 1 for b in range(n_free)]
        y = overlay(partial, bits)
        prob = design_probability(spec, pattern, y)
        log_pd[code] = -np.inf if prob == 0.0 else math.log(prob)

    ratios = np.empty(eta_grid.shape[0])
    for g, eta in enumerate(eta_grid):
        s = comp @ eta
        ratios[g] = logsumexp(s + log_pd) - logsumexp(s)
    finite = np.isfinite(ratios)
    if not finite.any():
        raise ValueError("the observed pattern has zero probability under "
                         "every completion; check the design and data")
    dev = float(ratios[finite].max() - ratios[finite].min()) if finite.all() else math.inf
    return AmenabilityReport(eta_grid=eta_grid, log_ratios=ratios,
                             max_deviation=dev, amenable=bool(dev <= tol),
                             tol=tol)
