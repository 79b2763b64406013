"""Two-wave link-tracing study harness.

Reproduces the sampling experiment on a complete network: realize the
link-tracing sample from every seed pair (or a seeded subsample of pairs),
fit the model to each partial observation, and compare the per-sample
estimates -- in natural and mean-value parameterizations -- to the
complete-data fit via bias, root-mean-squared error, efficiency loss and
Kullback-Leibler divergence.

Each seed pair owns an independent random stream derived from the master
seed, so results are reproducible and order-independent; the sweep can be
spread over worker processes (capped by the ``ERGM_SAMPLED_THREADS``
environment variable) or run inline.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .designs import FixedSeeds, LinkTracingDesign
from .graphs import Network, NodeAttributes, restrict
from .likelihood import (
    FitConfig,
    FitResult,
    KlEstimate,
    kl_divergence,
    mean_value_params,
    mle_complete,
    mle_missing,
)
from .sampler import McmcConfig, sample_full
from .stats import StatisticSet

__all__ = [
    "StudyRecord",
    "StudySummary",
    "run_study",
    "complete_sampling_sd",
    "summarize",
    "figure2_data",
]


@dataclass
class StudyRecord:
    """One seed pair's sample and fit."""

    seed_pair: tuple[int, int]
    n_sampled_nodes: int
    n_observed_dyads: int
    n_observed_edges: int
    fit: FitResult
    kl_from_complete: KlEstimate | None
    excluded: bool
    exclusion_reason: str | None


@dataclass
class StudySummary:
    """Per-parameter study summary in both parameterizations.

    Percentages are relative to the complete-data values; the efficiency
    loss is the mean squared deviation as a percentage of the complete-data
    sampling variance (``None`` when no bootstrap SDs were supplied).
    """

    labels: list[str]
    n_records: int
    n_included: int
    complete_natural: np.ndarray
    complete_mean_value: np.ndarray
    natural_bias_pct: np.ndarray
    natural_rmse_pct: np.ndarray
    natural_eff_loss_pct: np.ndarray | None
    mean_bias_pct: np.ndarray
    mean_rmse_pct: np.ndarray
    mean_eff_loss_pct: np.ndarray | None

    def table_rows(self) -> list[tuple]:
        """Rows ``(parameter, complete_value, bias_pct, rmse_pct, eff_loss_pct)``,
        natural parameters first, then mean-value parameters."""
        rows = []
        for prefix, ref, bias, rmse, eff in (
            ("natural", self.complete_natural, self.natural_bias_pct,
             self.natural_rmse_pct, self.natural_eff_loss_pct),
            ("mean", self.complete_mean_value, self.mean_bias_pct,
             self.mean_rmse_pct, self.mean_eff_loss_pct),
        ):
            for k, label in enumerate(self.labels):
                rows.append((f"{prefix}.{label}", float(ref[k]), float(bias[k]),
                             float(rmse[k]),
                             None if eff is None else float(eff[k])))
        return rows


def _pair_rng(master_seed: int, i: int, j: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, i, j]))


def _study_pair(y: Network, statistics, attributes, pair: tuple[int, int],
                complete_eta: np.ndarray, observed_stats: np.ndarray,
                config: FitConfig, master_seed: int) -> StudyRecord:
    """Realize, fit and score one seed pair (independent random stream)."""
    i, j = pair
    rng = _pair_rng(master_seed, i, j)
    design = LinkTracingDesign(initial=FixedSeeds(2), waves=2, directed=False)
    s0 = np.zeros(y.n, dtype=np.uint8)
    s0[i] = s0[j] = 1
    realization = design.realize(y, s0)
    partial = restrict(y, realization.pattern)
    n_dyads = realization.pattern.n_observed_dyads()
    n_edges = partial.observed_edge_count()

    fit = mle_missing(partial, statistics, attributes, config, rng)
    if fit.degenerate or fit.eta_hat is None:
        return StudyRecord(pair, realization.n_sampled, n_dyads, n_edges, fit,
                           None, True, "degenerate maximum likelihood estimate")

    mv = mean_value_params(fit.eta_hat, statistics, attributes, y.n,
                           y.directed, config, rng, initial=y)
    fit.mean_value = mv.value
    fit.mean_value_se = mv.se
    kl = kl_divergence(complete_eta, fit.eta_hat, statistics, attributes, y.n,
                       y.directed, config, rng, mean_stats=observed_stats,
                       initial=y)
    return StudyRecord(pair, realization.n_sampled, n_dyads, n_edges, fit, kl,
                       False, None)


def _worker_count(requested: int | None) -> int:
    cap = os.environ.get("ERGM_SAMPLED_THREADS")
    cap = int(cap) if cap else (os.cpu_count() or 1)
    if requested is None:
        return max(1, cap)
    return max(1, min(requested, cap))


def run_study(y: Network, statistics, attributes: NodeAttributes,
              complete: FitResult, config: FitConfig | None = None,
              subsample: int | None = None, master_seed: int = 0,
              workers: int | None = None) -> list[StudyRecord]:
    """Fit the model to two-wave link-tracing samples from seed pairs.

    All ``n(n-1)/2`` unordered pairs are swept unless ``subsample`` asks for
    a seeded uniform subset.  ``complete`` must be a converged complete-data
    fit; its natural parameters anchor the KL divergences, with the observed
    statistics standing in for its mean value exactly.  Degenerate fits
    become excluded records rather than errors.
    """
    if y.directed:
        raise ValueError("the study design is defined for undirected networks")
    if complete.eta_hat is None:
        raise ValueError("a non-degenerate complete-data fit is required")
    config = config or FitConfig()
    statset = StatisticSet(statistics, attributes, y.n, y.directed)
    observed = statset.compute(y)

    pairs = [(i, j) for i in range(y.n) for j in range(i + 1, y.n)]
    if subsample is not None:
        if not 1 <= subsample <= len(pairs):
            raise ValueError(f"subsample must be in [1, {len(pairs)}]")
        rng = np.random.default_rng(np.random.SeedSequence([master_seed, 2 ** 31]))
        idx = rng.choice(len(pairs), size=subsample, replace=False)
        pairs = [pairs[k] for k in sorted(idx)]

    nworkers = _worker_count(workers)
    if nworkers <= 1 or len(pairs) <= 1:
        return [_study_pair(y, statistics, attributes, pair, complete.eta_hat,
                            observed, config, master_seed)
                for pair in pairs]
    with ProcessPoolExecutor(max_workers=nworkers) as pool:
        futures = [pool.submit(_study_pair, y, statistics, attributes, pair,
                               complete.eta_hat, observed, config, master_seed)
                   for pair in pairs]
        return [f.result() for f in futures]


def complete_sampling_sd(y: Network, statistics, attributes: NodeAttributes,
                         eta_hat, b: int = 200,
                         config: FitConfig | None = None,
                         master_seed: int = 0,
                         workers: int | None = None
                         ) -> tuple[np.ndarray, np.ndarray, int]:
    """Parametric-bootstrap SD of the complete-data estimator.

    Simulates ``b`` networks from ``eta_hat``, refits each, and returns the
    per-parameter standard deviations of the natural and mean-value
    estimates plus the count of degenerate replicates (dropped).  These SDs
    are the efficiency-loss denominators.
    """
    if b < 2:
        raise ValueError("at least two bootstrap replicates are required")
    config = config or FitConfig()
    eta_hat = np.asarray(eta_hat, dtype=float)
    from .sampler import ErgmModel  # local import to keep module top light

    model = ErgmModel(y.n, tuple(statistics), eta_hat, attributes, y.directed)
    rng = np.random.default_rng(np.random.SeedSequence([master_seed, 777]))
    # replicates spaced by extra thinning so they are near-independent draws
    sim = sample_full(model, b,
                      McmcConfig(burn_in=config.mcmc().resolved(y.n)[0],
                                 thin=5 * y.n * y.n),
                      rng, initial=y, keep_networks=True)

    def _refit(k: int, net: Network) -> FitResult:
        return mle_complete(net, statistics, attributes, config,
                            np.random.default_rng(
                                np.random.SeedSequence([master_seed, 778, k])))

    nworkers = _worker_count(workers)
    if nworkers <= 1:
        fits = [_refit(k, net) for k, net in enumerate(sim.networks)]
    else:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            futures = [pool.submit(_bootstrap_refit, net, statistics,
                                   attributes, config, master_seed, k)
                       for k, net in enumerate(sim.networks)]
            fits = [f.result() for f in futures]
    naturals = [f.eta_hat for f in fits if f.eta_hat is not None]
    means = [f.mean_value for f in fits if f.eta_hat is not None]
    dropped = b - len(naturals)
    if len(naturals) < (b + 1) // 2:
        raise RuntimeError(
            f"only {len(naturals)} of {b} bootstrap replicates produced "
            "non-degenerate fits; the model is too unstable for a bootstrap SD")
    sd_nat = np.std(np.array(naturals), axis=0, ddof=1)
    sd_mean = np.std(np.array(means), axis=0, ddof=1)
    return sd_nat, sd_mean, dropped


def _bootstrap_refit(net, statistics, attributes, config, master_seed, k):
    return mle_complete(net, statistics, attributes, config,
                        np.random.default_rng(
                            np.random.SeedSequence([master_seed, 778, k])))


def summarize(records: list[StudyRecord], complete: FitResult,
              mean_reference=None, sd_natural=None,
              sd_mean=None) -> StudySummary:
    """Bias / RMSE / efficiency-loss summary over the included records.

    ``mean_reference`` is the complete-data mean-value vector used as the
    denominator (the observed statistics, by default the complete fit's
    estimate).  Efficiency losses need the bootstrap SDs and are omitted
    when they are not supplied.
    """
    included = [r for r in records if not r.excluded and r.fit.eta_hat is not None]
    if not included:
        raise ValueError("all study records are excluded; nothing to summarize")
    eta_full = np.asarray(complete.eta_hat, dtype=float)
    mean_full = (np.asarray(mean_reference, dtype=float)
                 if mean_reference is not None
                 else np.asarray(complete.mean_value, dtype=float))

    nat = np.array([r.fit.eta_hat for r in included])
    mv = np.array([r.fit.mean_value for r in included])

    def _pct(dev: np.ndarray, ref: np.ndarray, sd) -> tuple:
        bias = 100.0 * dev.mean(axis=0) / ref
        rmse = 100.0 * np.sqrt((dev ** 2).mean(axis=0)) / np.abs(ref)
        eff = None
        if sd is not None:
            eff = 100.0 * (dev ** 2).mean(axis=0) / np.asarray(sd, dtype=float) ** 2
        return bias, rmse, eff

    nb, nr, ne = _pct(nat - eta_full, eta_full, sd_natural)
    mb, mr, me = _pct(mv - mean_full, mean_full, sd_mean)
    return StudySummary(labels=list(complete.labels), n_records=len(records),
                        n_included=len(included),
                        complete_natural=eta_full,
                        complete_mean_value=mean_full,
                        natural_bias_pct=nb, natural_rmse_pct=nr,
                        natural_eff_loss_pct=ne,
                        mean_bias_pct=mb, mean_rmse_pct=mr,
                        mean_eff_loss_pct=me)


def figure2_data(records: list[StudyRecord],
                 outlier_cutoff: float = 8.0) -> list[dict]:
    """Scatter data: observed-dyad count against KL from the complete fit.

    Excluded records are omitted; records beyond ``outlier_cutoff`` carry an
    outlier flag (the plotted-region convention for the handful of very
    small samples).
    """
    rows = []
    for r in records:
        if r.excluded or r.kl_from_complete is None:
            continue
        rows.append({
            "seed_pair": list(r.seed_pair),
            "n_observed_dyads": r.n_observed_dyads,
            "kl": r.kl_from_complete.value,
            "kl_se": r.kl_from_complete.se,
            "outlier": bool(r.kl_from_complete.value > outlier_cutoff),
        })
    rows.sort(key=lambda row: (row["n_observed_dyads"], row["seed_pair"]))
    return rows
