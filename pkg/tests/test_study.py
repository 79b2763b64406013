"""Seed-pair study harness: record bookkeeping, exclusion of degenerate
fits, summary arithmetic, scatter data."""

import numpy as np
import pytest

import ergm_sampled as es
from ergm_sampled import FitConfig, FitResult, StudyRecord


def fit_result(eta, mean_value, labels=("edges",)):
    eta = None if eta is None else np.asarray(eta, dtype=float)
    return FitResult(
        labels=list(labels), eta_hat=eta,
        mean_value=None if mean_value is None else np.asarray(mean_value, float),
        mean_value_se=None if mean_value is None else np.zeros(len(mean_value)),
        converged=eta is not None, degenerate=eta is None, std_errors=None,
        acceptance_rate=0.5, effective_sample_size=100.0, anchors_used=1)


def record(pair, fit, kl=None, excluded=False, n_dyads=10):
    return StudyRecord(seed_pair=pair, n_sampled_nodes=4,
                       n_observed_dyads=n_dyads, n_observed_edges=3, fit=fit,
                       kl_from_complete=kl, excluded=excluded,
                       exclusion_reason="degenerate maximum likelihood estimate"
                       if excluded else None)


@pytest.fixture(scope="module")
def study_setup():
    """n=6 network with two isolates (4, 5); edges-only model."""
    y = es.make_network(6, edges=[(0, 1), (1, 2), (0, 2), (2, 3)])
    stats = (es.Edges(),)
    config = FitConfig(draws=256)
    complete = es.mle_complete(y, stats, config=config, rng=0)
    assert complete.eta_hat is not None
    return y, stats, config, complete


class TestRunStudy:
    def test_sweeps_all_pairs_with_consistent_bookkeeping(self, study_setup):
        y, stats, config, complete = study_setup
        records = es.run_study(y, stats, None, complete, config=config,
                               master_seed=1, workers=1)
        assert [r.seed_pair for r in records] == [
            (i, j) for i in range(6) for j in range(i + 1, 6)]
        by_pair = dict(es.all_seed_pair_samples(y, waves=2))
        for r in records:
            real = by_pair[r.seed_pair]
            assert r.n_sampled_nodes == real.n_sampled
            assert r.n_observed_dyads == real.pattern.n_observed_dyads()
            partial = es.restrict(y, real.pattern)
            assert r.n_observed_edges == partial.observed_edge_count()
            if not r.excluded:
                assert r.fit.eta_hat is not None
                assert r.kl_from_complete is not None

    def test_isolate_seed_pair_is_excluded(self, study_setup):
        y, stats, config, complete = study_setup
        records = es.run_study(y, stats, None, complete, config=config,
                               master_seed=1, workers=1)
        rec = next(r for r in records if r.seed_pair == (4, 5))
        # both seeds isolated: every observed dyad is empty, so the edge
        # parameter has no finite maximizer
        assert rec.excluded
        assert rec.exclusion_reason == "degenerate maximum likelihood estimate"
        assert rec.fit.degenerate
        assert rec.kl_from_complete is None

    def test_reproducible_across_runs(self, study_setup):
        y, stats, config, complete = study_setup
        kw = dict(config=config, subsample=4, master_seed=7, workers=1)
        r1 = es.run_study(y, stats, None, complete, **kw)
        r2 = es.run_study(y, stats, None, complete, **kw)
        assert [r.seed_pair for r in r1] == [r.seed_pair for r in r2]
        for a, b in zip(r1, r2):
            if a.fit.eta_hat is None:
                assert b.fit.eta_hat is None
            else:
                assert a.fit.eta_hat == pytest.approx(b.fit.eta_hat, abs=0.0)

    def test_subsample_validation(self, study_setup):
        y, stats, config, complete = study_setup
        with pytest.raises(ValueError):
            es.run_study(y, stats, None, complete, config=config, subsample=0)
        with pytest.raises(ValueError):
            es.run_study(y, stats, None, complete, config=config, subsample=16)

    def test_rejects_directed_and_degenerate_anchor(self, study_setup):
        y, stats, config, complete = study_setup
        bad = fit_result(None, None)
        with pytest.raises(ValueError):
            es.run_study(y, stats, None, bad, config=config)
        adj = np.zeros((3, 3), dtype=int)
        adj[0, 1] = 1
        with pytest.raises(ValueError):
            es.run_study(es.Network(adj, directed=True), stats, None, complete,
                         config=config)


class TestSummarize:
    def test_hand_checked_percentages(self):
        complete = fit_result([2.0], [10.0])
        records = [
            record((0, 1), fit_result([2.2], [11.0])),
            record((0, 2), fit_result([1.8], [9.0])),
            record((0, 3), fit_result(None, None), excluded=True),
        ]
        s = es.summarize(records, complete, mean_reference=[10.0],
                         sd_natural=[0.1], sd_mean=[0.5])
        assert s.n_records == 3
        assert s.n_included == 2
        # deviations +-0.2 around 2.0: zero bias, 10% RMSE, and mean square
        # deviation 0.04 against variance 0.01 -> 400% efficiency loss
        assert s.natural_bias_pct[0] == pytest.approx(0.0, abs=1e-12)
        assert s.natural_rmse_pct[0] == pytest.approx(10.0)
        assert s.natural_eff_loss_pct[0] == pytest.approx(400.0)
        # mean-value deviations +-1 around 10 with SD 0.5
        assert s.mean_bias_pct[0] == pytest.approx(0.0, abs=1e-12)
        assert s.mean_rmse_pct[0] == pytest.approx(10.0)
        assert s.mean_eff_loss_pct[0] == pytest.approx(400.0)

    def test_bias_sign_and_default_reference(self):
        complete = fit_result([-2.0], [8.0])
        records = [record((0, 1), fit_result([-2.4], [9.0]))]
        s = es.summarize(records, complete)
        # deviation -0.4 relative to -2.0 is +20% bias
        assert s.natural_bias_pct[0] == pytest.approx(20.0)
        assert s.natural_rmse_pct[0] == pytest.approx(20.0)
        assert s.mean_bias_pct[0] == pytest.approx(12.5)
        assert s.natural_eff_loss_pct is None
        assert s.mean_eff_loss_pct is None

    def test_table_rows_layout(self):
        complete = fit_result([2.0], [10.0])
        s = es.summarize([record((0, 1), fit_result([2.2], [11.0]))], complete)
        rows = s.table_rows()
        assert [r[0] for r in rows] == ["natural.edges", "mean.edges"]
        assert rows[0][1] == 2.0
        assert rows[1][1] == 10.0
        assert rows[0][4] is None

    def test_all_excluded_raises(self):
        complete = fit_result([2.0], [10.0])
        records = [record((0, 1), fit_result(None, None), excluded=True)]
        with pytest.raises(ValueError):
            es.summarize(records, complete)


class TestFigureData:
    def test_rows_sorted_flagged_and_filtered(self):
        kl_small = es.KlEstimate(value=0.5, se=0.1, mean_term=0.3, kappa_term=0.2)
        kl_big = es.KlEstimate(value=9.5, se=0.4, mean_term=9.0, kappa_term=0.5)
        records = [
            record((0, 3), fit_result([2.0], [10.0]), kl=kl_big, n_dyads=5),
            record((0, 1), fit_result([2.0], [10.0]), kl=kl_small, n_dyads=12),
            record((0, 2), fit_result(None, None), excluded=True, n_dyads=3),
            record((1, 2), fit_result([2.0], [10.0]), kl=None, n_dyads=7),
        ]
        rows = es.figure2_data(records, outlier_cutoff=8.0)
        assert [row["seed_pair"] for row in rows] == [[0, 3], [0, 1]]
        assert rows[0]["outlier"] is True
        assert rows[1]["outlier"] is False
        assert rows[1]["kl"] == pytest.approx(0.5)
        assert rows[1]["kl_se"] == pytest.approx(0.1)


class TestBootstrapSd:
    def test_sd_shapes_and_positivity(self):
        y = es.make_network(5, edges=[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)])
        stats = (es.Edges(),)
        config = FitConfig(draws=256)
        fit = es.mle_complete(y, stats, config=config, rng=0)
        sd_nat, sd_mean, dropped = es.complete_sampling_sd(
            y, stats, None, fit.eta_hat, b=10, config=config, master_seed=0,
            workers=1)
        assert sd_nat.shape == (1,)
        assert sd_mean.shape == (1,)
        assert sd_nat[0] > 0 and sd_mean[0] > 0
        assert 0 <= dropped < 10

    def test_requires_two_replicates(self):
        y = es.make_network(4, edges=[(0, 1)])
        with pytest.raises(ValueError):
            es.complete_sampling_sd(y, (es.Edges(),), None, [0.0], b=1)
