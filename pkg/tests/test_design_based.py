"""Horvitz-Thompson machinery: exact design unbiasedness and variance by
enumerating every initial sample of a small network."""

import itertools

import numpy as np
import pytest

import ergm_sampled as es
from ergm_sampled.design_based import component_sizes

from conftest import random_adjacency


def ind(ids, n):
    s = np.zeros(n, dtype=np.uint8)
    s[list(ids)] = 1
    return s


def bernoulli_subsets(n, psi):
    """Every node subset with its Bernoulli(psi) selection probability."""
    for bits in itertools.product([0, 1], repeat=n):
        k = sum(bits)
        yield np.array(bits, dtype=np.uint8), psi ** k * (1 - psi) ** (n - k)


@pytest.fixture(scope="module")
def small_network():
    rng = np.random.default_rng(42)
    return es.Network(random_adjacency(rng, 6))


class TestClosedForms:
    def test_dyad_prob_formula(self):
        assert es.egocentric_dyad_prob(0.0) == 0.0
        assert es.egocentric_dyad_prob(1.0) == 1.0
        assert es.egocentric_dyad_prob(0.3) == pytest.approx(1 - 0.7 ** 2)

    @pytest.mark.parametrize("psi", [0.2, 0.5, 0.9])
    def test_pairwise_prob_vs_enumeration(self, psi):
        # brute force over all selections of 4 nodes
        def joint(d1, d2):
            total = 0.0
            for sel, p in bernoulli_subsets(4, psi):
                ok1 = sel[d1[0]] or sel[d1[1]]
                ok2 = sel[d2[0]] or sel[d2[1]]
                if ok1 and ok2:
                    total += p
            return total

        same = es.pairwise_inclusion_prob(psi, (0, 1), (1, 0))
        assert same == pytest.approx(joint((0, 1), (0, 1)), abs=1e-12)
        disjoint = es.pairwise_inclusion_prob(psi, (0, 1), (2, 3))
        assert disjoint == pytest.approx(joint((0, 1), (2, 3)), abs=1e-12)
        shared = es.pairwise_inclusion_prob(psi, (0, 1), (1, 2))
        assert shared == pytest.approx(joint((0, 1), (1, 2)), abs=1e-12)
        assert shared == pytest.approx(psi + psi ** 2 - psi ** 3, abs=1e-12)

    def test_pairwise_rejects_self_dyad(self):
        with pytest.raises(ValueError):
            es.pairwise_inclusion_prob(0.5, (1, 1), (0, 2))

    def test_psi_validation(self):
        with pytest.raises(ValueError):
            es.egocentric_dyad_prob(1.2)
        with pytest.raises(ValueError):
            es.egocentric_dyad_prob(-0.1)


class TestInclusionProbs:
    def test_egocentric_values(self):
        spec = es.EgoCentricDesign(initial=es.BernoulliInitial(0.4))
        probs = es.inclusion_probs(spec, 5)
        assert probs.nodal.tolist() == [0.4] * 5
        assert probs.dyadic == pytest.approx(1 - 0.6 ** 2)
        assert probs.pairwise((0, 1), (1, 2)) == pytest.approx(
            es.pairwise_inclusion_prob(0.4, (0, 1), (1, 2)))

    def test_directed_dyadic_is_row_based(self):
        spec = es.EgoCentricDesign(initial=es.BernoulliInitial(0.4), directed=True)
        probs = es.inclusion_probs(spec, 5)
        # a directed dyad (i, j) is observed exactly when ego i is selected
        assert probs.dyadic == pytest.approx(0.4)
        assert probs.pairwise((0, 1), (0, 2)) == pytest.approx(0.4)
        assert probs.pairwise((0, 1), (1, 2)) == pytest.approx(0.16)

    def test_tracing_refused(self):
        spec = es.LinkTracingDesign(initial=es.BernoulliInitial(0.4), waves=2)
        with pytest.raises(es.UnobservableProbabilityError):
            es.inclusion_probs(spec, 5)

    def test_psi_required_without_bernoulli_initial(self):
        spec = es.EgoCentricDesign(initial=es.FixedSeeds(2))
        with pytest.raises(ValueError):
            es.inclusion_probs(spec, 5)
        probs = es.inclusion_probs(spec, 5, psi=0.3)
        assert probs.psi == 0.3


class TestHorvitzThompson:
    @pytest.mark.parametrize("psi", [0.25, 0.6])
    def test_estimator_exactly_unbiased(self, small_network, psi):
        y = small_network
        spec = es.EgoCentricDesign(initial=es.BernoulliInitial(psi))
        expectation = 0.0
        for sel, p in bernoulli_subsets(y.n, psi):
            real = spec.realize(y, sel)
            partial = es.restrict(y, real.pattern)
            expectation += p * es.ht_edge_total(partial, psi)
        assert expectation == pytest.approx(y.edge_count(), abs=1e-10)

    @pytest.mark.parametrize("psi", [0.25, 0.6])
    def test_variance_formula_exact(self, small_network, psi):
        y = small_network
        spec = es.EgoCentricDesign(initial=es.BernoulliInitial(psi))
        mean = sq = 0.0
        for sel, p in bernoulli_subsets(y.n, psi):
            real = spec.realize(y, sel)
            est = es.ht_edge_total(es.restrict(y, real.pattern), psi)
            mean += p * est
            sq += p * est * est
        assert sq - mean ** 2 == pytest.approx(es.ht_variance(y, psi), abs=1e-9)

    def test_variance_estimator_unbiased(self, small_network):
        y = small_network
        psi = 0.5
        spec = es.EgoCentricDesign(initial=es.BernoulliInitial(psi))
        expectation = 0.0
        for sel, p in bernoulli_subsets(y.n, psi):
            real = spec.realize(y, sel)
            partial = es.restrict(y, real.pattern)
            expectation += p * es.ht_variance_estimate(partial, psi)
        assert expectation == pytest.approx(es.ht_variance(y, psi), abs=1e-9)

    def test_empty_sample_estimates_zero(self):
        y = es.make_network(4, edges=[(0, 1)])
        spec = es.EgoCentricDesign(initial=es.BernoulliInitial(0.5))
        real = spec.realize(y, ind([], 4))
        partial = es.restrict(y, real.pattern)
        assert es.ht_edge_total(partial, 0.5) == 0.0
        assert es.ht_variance_estimate(partial, 0.5) == 0.0

    def test_refusal_for_tracing_design(self, small_network):
        y = small_network
        psi = 0.5
        spec = es.LinkTracingDesign(initial=es.BernoulliInitial(psi), waves=1)
        real = spec.realize(y, ind([0], y.n))
        partial = es.restrict(y, real.pattern)
        with pytest.raises(es.UnobservableProbabilityError):
            es.ht_edge_total(partial, psi, spec=spec)
        with pytest.raises(es.UnobservableProbabilityError):
            es.ht_variance(y, psi, spec=spec)
        with pytest.raises(es.UnobservableProbabilityError):
            es.ht_variance_estimate(partial, psi, spec=spec)

    def test_zero_psi_rejected(self, small_network):
        spec = es.EgoCentricDesign(initial=es.BernoulliInitial(0.5))
        real = spec.realize(small_network, ind([0], small_network.n))
        partial = es.restrict(small_network, real.pattern)
        with pytest.raises(ValueError):
            es.ht_edge_total(partial, 0.0)


class TestTracingProbabilities:
    def test_one_wave_nodal_vs_enumeration(self, small_network):
        y = small_network
        psi = 0.35
        spec = es.LinkTracingDesign(initial=es.BernoulliInitial(psi), waves=1)
        hit = np.zeros(y.n)
        for sel, p in bernoulli_subsets(y.n, psi):
            real = spec.realize(y, sel)
            hit += p * real.sample
        degrees = y.adj.sum(axis=1)
        for i in range(y.n):
            assert hit[i] == pytest.approx(
                es.one_wave_nodal_prob(psi, int(degrees[i])), abs=1e-12)

    def test_one_wave_dyad_vs_enumeration(self, small_network):
        y = small_network
        psi = 0.35
        spec = es.LinkTracingDesign(initial=es.BernoulliInitial(psi), waves=1)
        dyads = [(0, 1), (2, 5), (1, 4)]
        hit = dict.fromkeys(dyads, 0.0)
        for sel, p in bernoulli_subsets(y.n, psi):
            real = spec.realize(y, sel)
            observed = set(real.pattern.observed_dyads())
            for d in dyads:
                if d in observed:
                    hit[d] += p
        for d in dyads:
            assert hit[d] == pytest.approx(
                es.one_wave_dyad_prob(y, d, psi), abs=1e-12)

    def test_dyad_neighborhood_contents(self):
        y = es.make_network(5, edges=[(0, 1), (1, 2), (3, 4)])
        assert es.dyad_neighborhood(y, (0, 2)) == {0, 1, 2}
        assert es.dyad_neighborhood(y, (3, 4)) == {3, 4}
        with pytest.raises(ValueError):
            es.dyad_neighborhood(y, (2, 2))

    def test_saturated_nodal_vs_enumeration(self):
        y = es.make_network(6, edges=[(0, 1), (1, 2), (3, 4)])
        psi = 0.4
        spec = es.LinkTracingDesign(initial=es.BernoulliInitial(psi),
                                    waves=es.SATURATED)
        hit = np.zeros(y.n)
        for sel, p in bernoulli_subsets(y.n, psi):
            real = spec.realize(y, sel)
            hit += p * real.sample
        sizes = component_sizes(y)
        assert sizes.tolist() == [3, 3, 3, 2, 2, 1]
        for i in range(y.n):
            assert hit[i] == pytest.approx(
                es.saturated_nodal_prob(psi, int(sizes[i])), abs=1e-12)


class TestObservabilityReport:
    def test_classification_matrix(self):
        b = es.BernoulliInitial(0.5)
        cases = [
            (es.EgoCentricDesign(initial=b), True, True),
            (es.LinkTracingDesign(initial=b, waves=0), True, True),
            (es.LinkTracingDesign(initial=b, waves=1), True, False),
            (es.LinkTracingDesign(initial=b, waves=2), False, False),
            (es.LinkTracingDesign(initial=b, waves=es.SATURATED), True, False),
            (es.LinkTracingDesign(initial=b, waves=1, directed=True), False, False),
        ]
        for spec, nodal, dyadic in cases:
            rep = es.observability_report(spec)
            assert rep.nodal_observable is nodal, spec
            assert rep.dyadic_observable is dyadic, spec

    def test_scheme_labels(self):
        rep = es.observability_report(
            es.EgoCentricDesign(initial=es.BernoulliInitial(0.2)))
        assert rep.scheme == "ego-centric"
        rep = es.observability_report(
            es.LinkTracingDesign(initial=es.BernoulliInitial(0.2), waves=1))
        assert rep.scheme == "link-tracing"
