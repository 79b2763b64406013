"""Bundled law-firm collaboration data: schema, sufficient statistics, and
the structural features the two-wave sampling study depends on."""

import numpy as np
import pytest

import ergm_sampled as es

DECAY = 0.7781

REFERENCE_STATS = {
    "edges": 115.0,
    "nodal.seniority": 4687 / 36,
    "nodal.practice": 129.0,
    "match.practice": 72.0,
    "match.gender": 99.0,
    "match.office": 85.0,
}


@pytest.fixture(scope="module")
def bundle():
    return es.load_lazega()


@pytest.fixture(scope="module")
def stat_values(bundle):
    y, attrs = bundle
    statistics = (es.Edges(), es.Gwesp(DECAY), es.NodalMain("seniority"),
                  es.NodalMain("practice"), es.HomophilyMatch("practice"),
                  es.HomophilyMatch("gender"), es.HomophilyMatch("office"))
    values = es.compute_stats(y, statistics, attrs)
    return dict(zip((s.label for s in statistics), values))


class TestSchema:
    def test_network_shape(self, bundle):
        y, _ = bundle
        assert y.n == 36
        assert not y.directed
        assert np.array_equal(y.adj, y.adj.T)
        assert np.all(np.diag(y.adj) == 0)

    def test_seniority_is_scaled_entry_rank(self, bundle):
        _, attrs = bundle
        assert np.allclose(attrs["seniority"], np.arange(1, 37) / 36)

    def test_practice_is_binary_and_balanced(self, bundle):
        _, attrs = bundle
        practice = attrs["practice"]
        assert set(np.unique(practice)) <= {0, 1}
        assert 12 <= practice.sum() <= 20

    def test_three_women(self, bundle):
        _, attrs = bundle
        gender = attrs["gender"]
        assert set(np.unique(gender)) <= {0, 1}
        assert gender.sum() == 3

    def test_three_offices_of_distinct_sizes(self, bundle):
        _, attrs = bundle
        office = attrs["office"]
        values, counts = np.unique(office, return_counts=True)
        assert len(values) == 3
        assert np.all(counts >= 3)
        assert len(set(counts.tolist())) == 3


class TestSufficientStatistics:
    @pytest.mark.parametrize("label,target", sorted(REFERENCE_STATS.items()))
    def test_reference_value(self, stat_values, label, target):
        assert stat_values[label] == pytest.approx(target, abs=1e-9)

    def test_gwesp_value(self, stat_values):
        assert stat_values[f"gwesp({DECAY:g})"] == pytest.approx(190.31,
                                                                 abs=0.005)


class TestStructure:
    def test_two_isolated_partners(self, bundle):
        y, _ = bundle
        assert len(es.isolates(y)) == 2

    def test_two_step_reach(self, bundle):
        """One pendant sees only 4 partners within two steps; one hub sees
        every non-isolated partner; nobody else is nearly as confined."""
        y, _ = bundle
        iso = es.isolates(y)
        sizes = {}
        for v in range(y.n):
            if v in iso:
                continue
            ball = {v} | set(np.flatnonzero(y.adj[v]))
            for u in list(ball):
                ball |= set(np.flatnonzero(y.adj[u]))
            sizes[v] = len(ball)
        assert min(sizes.values()) == 4
        assert sum(1 for s in sizes.values() if s == 4) == 1
        assert sum(1 for s in sizes.values() if 4 < s < 6) == 0
        assert max(sizes.values()) == 34

    def test_seed_pair_sample_sizes(self, bundle):
        y, _ = bundle
        samples = es.all_seed_pair_samples(y, waves=2)
        sizes = sorted(real.n_sampled for _, real in samples)
        assert len(sizes) == 36 * 35 // 2
        assert sizes[0] == 2            # the two isolates seed each other
        assert sizes.count(2) == 1
        assert sizes.count(5) == 2      # pendant + one isolate, twice
        assert sizes[-1] == 35          # hub + an isolate
        assert all(s == 2 or s >= 5 for s in sizes)
