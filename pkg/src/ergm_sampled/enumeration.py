"""Exact small-network computations by enumerating the graph space.

For small ``n`` the full space of binary networks (or of completions of a
partially observed one) can be enumerated, giving exact normalizing
constants, exact moments and exact maximum-likelihood estimates.  These are
the reference values the Monte Carlo machinery is tested against, and they
also power the exact missing-data log-likelihood for tiny problems.

Everything is vectorized over blocks of graphs: linear statistics are a
single matrix product of the dyad-state bit matrix with per-dyad change
scores, and shared-partner counts come from batched ``A @ A``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import logsumexp

from .graphs import Network, PartialNetwork
from .stats import StatisticSet

__all__ = [
    "enumeration_size",
    "all_graph_stats",
    "completion_stats",
    "exact_log_kappa",
    "exact_moments",
    "exact_distribution",
    "exact_mle",
    "exact_missing_mle",
]

_MAX_FREE_DYADS = 24  # 16M states; beyond this enumeration is hopeless anyway
_BLOCK = 1 << 16


def enumeration_size(n: int, directed: bool = False) -> int:
    """Number of binary networks on ``n`` labelled nodes."""
    m = n * (n - 1) if directed else n * (n - 1) // 2
    return 1 << m


def _assignment_stats(statset: StatisticSet, base: np.ndarray,
                      dyads: list[tuple[int, int]]) -> np.ndarray:
    """Statistics of every network formed by filling ``dyads`` over ``base``.

    Assignment ``g`` sets dyad ``d`` to bit ``d`` of ``g`` (dyads in the
    order given), symmetrically when undirected.  Returns a
    ``(2**len(dyads), p)`` matrix in that assignment order.
    """
    m = len(dyads)
    if m > _MAX_FREE_DYADS:
        raise ValueError(f"{m} free dyads is beyond enumeration range ({_MAX_FREE_DYADS})")
    n = statset.n
    total = 1 << m
    p = statset.p
    out = np.empty((total, p))

    delta = statset.dyadic_delta_stack()  # (q, n, n)
    dyadic_idx = statset.dyadic_indices
    if dyadic_idx:
        base_contrib = np.tensordot(
            delta,
            (np.triu(base, 1) if not statset.directed else base).astype(float),
            axes=([1, 2], [0, 1]),
        )
        coefs = np.array([[delta[q, i, j] for q in range(len(dyadic_idx))]
                          for (i, j) in dyads])  # (m, q)
    gwesp_idx = statset.gwesp_indices
    gwesp_decays = [statset.statistics[k].decay for k in gwesp_idx]
    iu, ju = np.triu_indices(n, 1)

    for start in range(0, total, _BLOCK):
        stop = min(start + _BLOCK, total)
        codes = np.arange(start, stop, dtype=np.int64)
        if m:
            bits = ((codes[:, None] >> np.arange(m)) & 1).astype(np.float64)  # (B, m)
        else:
            bits = np.zeros((stop - start, 0))
        if dyadic_idx:
            out[start:stop, dyadic_idx] = base_contrib + bits @ coefs
        if gwesp_idx:
            adj = np.broadcast_to(base.astype(np.float64),
                                  (stop - start, n, n)).copy()
            for d, (i, j) in enumerate(dyads):
                adj[:, i, j] = bits[:, d]
                adj[:, j, i] = bits[:, d]
            common = adj @ adj  # (B, n, n) shared-partner counts
            edge_flags = adj[:, iu, ju]
            cvals = common[:, iu, ju]
            for k, decay in zip(gwesp_idx, gwesp_decays):
                w = 1.0 - math.exp(-decay)
                out[start:stop, k] = math.exp(decay) * np.sum(
                    edge_flags * (1.0 - w ** cvals), axis=1)
    return out


def all_graph_stats(statset: StatisticSet) -> np.ndarray:
    """Statistic matrix over every network, one row per dyad-state code.

    Dyad-state code: bit ``d`` of the row index is the state of the ``d``-th
    dyad in canonical order (pairs ``i < j`` row-major; ordered pairs when
    directed).
    """
    n = statset.n
    if statset.directed:
        dyads = [(i, j) for i in range(n) for j in range(n) if i != j]
    else:
        dyads = [(i, j) for i in range(n) for j in range(i + 1, n)]
    base = np.zeros((n, n), dtype=np.uint8)
    return _assignment_stats(statset, base, dyads)


def completion_stats(partial: PartialNetwork, statset: StatisticSet) -> np.ndarray:
    """Statistic matrix over every completion of a partial observation.

    Row ``g`` corresponds to filling the free dyads (canonical order) with
    the bits of ``g``.
    """
    return _assignment_stats(statset, partial.values,
                             partial.pattern.free_dyads())


def graph_code(network: Network) -> int:
    """Dyad-state code of a network under the canonical dyad order."""
    code = 0
    n = network.n
    if network.directed:
        dyads = [(i, j) for i in range(n) for j in range(n) if i != j]
    else:
        dyads = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for d, (i, j) in enumerate(dyads):
        if network.adj[i, j]:
            code |= 1 << d
    return code


def exact_log_kappa(eta: np.ndarray, stats_matrix: np.ndarray) -> float:
    """Log normalizing constant ``log sum_y exp(eta . Z(y))``."""
    return float(logsumexp(stats_matrix @ np.asarray(eta, dtype=float)))


def exact_distribution(eta: np.ndarray, stats_matrix: np.ndarray) -> np.ndarray:
    """Exact probability of every row of ``stats_matrix`` under ``eta``."""
    s = stats_matrix @ np.asarray(eta, dtype=float)
    s -= s.max()
    w = np.exp(s)
    return w / w.sum()


def exact_moments(eta: np.ndarray, stats_matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact mean and covariance of the statistics under ``eta``."""
    p = exact_distribution(eta, stats_matrix)
    mean = p @ stats_matrix
    centered = stats_matrix - mean
    cov = (centered * p[:, None]).T @ centered
    return mean, cov


def _newton_maximize(loglik_grad_hess, eta0: np.ndarray, tol: float = 1e-11,
                     max_iter: int = 200) -> np.ndarray:
    """Damped Newton ascent; falls back to gradient steps when the Hessian
    direction does not improve the objective."""
    eta = np.asarray(eta0, dtype=float).copy()
    ll, grad, hess = loglik_grad_hess(eta)
    for _ in range(max_iter):
        if np.max(np.abs(grad)) < tol:
            break
        try:
            step = np.linalg.solve(hess, -grad)
        except np.linalg.LinAlgError:
            step = grad.copy()
        if not np.all(np.isfinite(step)):
            step = grad.copy()
        # ascend: make sure the direction has positive inner product with grad
        if float(step @ grad) <= 0:
            step = grad.copy()
        scale = 1.0
        for _ in range(60):
            cand = eta + scale * step
            ll_new, grad_new, hess_new = loglik_grad_hess(cand)
            if ll_new > ll - 1e-15:
                eta, ll, grad, hess = cand, ll_new, grad_new, hess_new
                break
            scale *= 0.5
        else:
            break
    return eta


class DegenerateMleError(ValueError):
    """The observed statistics sit on the convex-hull boundary of the
    attainable statistics; the likelihood has no finite maximizer."""


def exact_mle(z_obs: np.ndarray, stats_matrix: np.ndarray,
              eta0: np.ndarray | None = None, tol: float = 1e-11,
              eta_bound: float = 20.0) -> np.ndarray:
    """Exact MLE for a fully observed network: solve ``E_eta[Z] = z_obs``.

    ``z_obs`` must lie in the interior of the convex hull of the statistic
    rows for the solution to exist; boundary statistics drive the ascent to
    infinity and raise :class:`DegenerateMleError` once a coordinate passes
    ``eta_bound``.
    """
    z_obs = np.asarray(z_obs, dtype=float)
    p = z_obs.shape[0]
    if eta0 is None:
        eta0 = np.zeros(p)

    def f(eta):
        mean, cov = exact_moments(eta, stats_matrix)
        ll = float(z_obs @ eta) - exact_log_kappa(eta, stats_matrix)
        return ll, z_obs - mean, -cov

    eta = _newton_maximize(f, eta0, tol=tol)
    if not np.all(np.isfinite(eta)) or np.max(np.abs(eta)) > eta_bound:
        raise DegenerateMleError(
            "observed statistics lie on the attainable-set boundary; "
            "no finite maximum-likelihood estimate exists")
    return eta


def exact_missing_loglik(eta: np.ndarray, completion_matrix: np.ndarray,
                         full_matrix: np.ndarray) -> float:
    """Exact face-value log-likelihood of a partial observation (up to a
    constant): ``log sum_completions exp(eta.Z) - log sum_all exp(eta.Z)``."""
    eta = np.asarray(eta, dtype=float)
    return float(logsumexp(completion_matrix @ eta) - logsumexp(full_matrix @ eta))


def exact_missing_mle(completion_matrix: np.ndarray, full_matrix: np.ndarray,
                      eta0: np.ndarray | None = None,
                      tol: float = 1e-11, eta_bound: float = 20.0) -> np.ndarray:
    """Exact missing-data MLE by Newton ascent on the enumerated likelihood.

    The gradient is the gap between the completion-conditional and the
    unconditional statistic means; the Hessian is the corresponding
    covariance gap (not necessarily definite, hence the damped ascent).
    """
    p = full_matrix.shape[1]
    if eta0 is None:
        eta0 = np.zeros(p)

    def f(eta):
        ll = exact_missing_loglik(eta, completion_matrix, full_matrix)
        mean_c, cov_c = exact_moments(eta, completion_matrix)
        mean_f, cov_f = exact_moments(eta, full_matrix)
        return ll, mean_c - mean_f, cov_c - cov_f

    eta = _newton_maximize(f, eta0, tol=tol)
    if not np.all(np.isfinite(eta)) or np.max(np.abs(eta)) > eta_bound:
        raise DegenerateMleError(
            "observed statistics lie on the attainable-set boundary; "
            "no finite maximum-likelihood estimate exists")
    return eta
