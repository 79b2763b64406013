"""Network, ObservationPattern, PartialNetwork and NodeAttributes containers."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import ergm_sampled as es
from ergm_sampled.graphs import isolates, completions_count

from conftest import random_adjacency


def indicator(ids, n):
    s = np.zeros(n, dtype=int)
    s[list(ids)] = 1
    return s


class TestNetwork:
    def test_symmetrizes_and_validates(self):
        adj = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]])
        y = es.Network(adj)
        assert y.n == 3 and y.edge_count() == 2
        assert y.degrees().tolist() == [1, 2, 1]

    def test_rejects_asymmetric_undirected(self):
        adj = np.zeros((3, 3), dtype=int)
        adj[0, 1] = 1
        with pytest.raises(ValueError):
            es.Network(adj, directed=False)

    def test_rejects_self_loops(self):
        adj = np.eye(3, dtype=int)
        with pytest.raises(ValueError):
            es.Network(adj)

    def test_rejects_nonbinary(self):
        adj = np.zeros((3, 3))
        adj[0, 1] = adj[1, 0] = 2.0
        with pytest.raises(ValueError):
            es.Network(adj)

    def test_directed_keeps_asymmetry(self):
        adj = np.zeros((3, 3), dtype=int)
        adj[0, 1] = 1
        y = es.Network(adj, directed=True)
        assert y.edge_count() == 1
        assert y.has_edge(0, 1) and not y.has_edge(1, 0)

    def test_equality_and_hash(self):
        a = es.make_network(4, edges=[(0, 1), (2, 3)])
        b = es.make_network(4, edges=[(2, 3), (0, 1)])
        c = es.make_network(4, edges=[(0, 1)])
        assert a == b and hash(a) == hash(b) and a != c

    def test_adjacency_is_read_only(self):
        y = es.make_network(3, edges=[(0, 1)])
        with pytest.raises(ValueError):
            y.adj[0, 2] = 1

    def test_make_network_from_edges(self):
        y = es.make_network(4, edges=[(1, 3)])
        assert y.edges() == [(1, 3)]

    def test_isolates(self):
        y = es.make_network(5, edges=[(0, 1), (1, 2)])
        assert isolates(y) == {3, 4}


class TestObservationPattern:
    def test_from_selected_observes_incident_dyads(self):
        pat = es.ObservationPattern.from_selected(indicator([0, 2], 4))
        observed = set(pat.observed_dyads())
        assert observed == {(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)}
        assert pat.free_dyads() == [(1, 3)]
        assert pat.n_observed_dyads() == 5 and pat.n_free_dyads() == 1

    def test_selected_recovers_node_set(self):
        pat = es.ObservationPattern.from_selected(indicator([1, 3], 5))
        assert pat.selected.tolist() == [0, 1, 0, 1, 0]

    def test_mask_diagonal_ignored(self):
        mask = np.ones((3, 3), dtype=bool)
        pat = es.ObservationPattern(mask)
        assert pat.is_complete()
        assert pat.n_observed_dyads() == 3

    def test_mask_must_be_symmetric_when_undirected(self):
        mask = np.zeros((3, 3), dtype=bool)
        mask[0, 1] = True
        with pytest.raises(ValueError):
            es.ObservationPattern(mask, directed=False)

    def test_directed_pattern_counts_arcs(self):
        mask = np.zeros((3, 3), dtype=bool)
        mask[0, 1] = True
        pat = es.ObservationPattern(mask, directed=True)
        assert pat.n_observed_dyads() == 1
        assert pat.n_free_dyads() == 5

    def test_waves_must_be_disjoint(self):
        with pytest.raises(ValueError):
            es.ObservationPattern.from_selected(
                indicator([0, 1], 3),
                waves=[indicator([0, 1], 3), indicator([1], 3)])

    def test_equality(self):
        p1 = es.ObservationPattern.from_selected(indicator([1], 3))
        p2 = es.ObservationPattern.from_selected(indicator([1], 3))
        assert p1 == p2 and hash(p1) == hash(p2)


class TestPartialNetwork:
    def test_restrict_then_overlay_roundtrip(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            adj = random_adjacency(rng, 6)
            y = es.Network(adj)
            sel = rng.choice(6, size=2, replace=False)
            pat = es.ObservationPattern.from_selected(indicator(sel, 6))
            partial = es.restrict(y, pat)
            free = pat.free_dyads()
            bits = [adj[i, j] for i, j in free]
            assert es.overlay(partial, bits) == y

    def test_overlay_rejects_wrong_length(self):
        y = es.make_network(4, edges=[(0, 1)])
        pat = es.ObservationPattern.from_selected(indicator([0], 4))
        partial = es.restrict(y, pat)
        with pytest.raises(ValueError):
            es.overlay(partial, [1])

    def test_values_outside_mask_are_zeroed(self):
        mask = np.zeros((3, 3), dtype=bool)
        mask[0, 1] = mask[1, 0] = True
        values = np.ones((3, 3), dtype=int)
        np.fill_diagonal(values, 0)
        partial = es.PartialNetwork(es.ObservationPattern(mask), values)
        assert partial.values[0, 2] == 0 and partial.values[0, 1] == 1

    def test_observed_edge_count(self):
        y = es.make_network(4, edges=[(0, 1), (1, 2), (2, 3)])
        pat = es.ObservationPattern.from_selected(indicator([1], 4))
        partial = es.restrict(y, pat)
        assert partial.observed_edge_count() == 2

    def test_completions_count(self):
        pat = es.ObservationPattern.from_selected(indicator([0], 5))
        partial = es.PartialNetwork(pat, np.zeros((5, 5), dtype=int))
        # free dyads among nodes 1..4: C(4,2) = 6
        assert completions_count(partial) == 64


class TestNodeAttributes:
    def test_lookup_and_names(self):
        attrs = es.NodeAttributes({"x": [1.0, 2.0], "y": [0.0, 1.0]})
        assert attrs.n == 2
        assert attrs.names == ["x", "y"]
        assert attrs["x"].tolist() == [1.0, 2.0]

    def test_unknown_name_raises(self):
        attrs = es.NodeAttributes({"x": [1.0, 2.0]})
        with pytest.raises(KeyError):
            attrs["z"]

    def test_mismatched_lengths_raise(self):
        with pytest.raises(ValueError):
            es.NodeAttributes({"x": [1.0, 2.0], "y": [1.0]})

    def test_columns_read_only(self):
        attrs = es.NodeAttributes({"x": [1.0, 2.0]})
        with pytest.raises(ValueError):
            attrs["x"][0] = 5.0


@given(st.integers(2, 6), st.data())
@settings(max_examples=40, deadline=None)
def test_restrict_preserves_observed_values(n, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 10 ** 6)))
    adj = random_adjacency(rng, n)
    y = es.Network(adj)
    k = data.draw(st.integers(1, n))
    sel = rng.choice(n, size=k, replace=False)
    partial = es.restrict(y, es.ObservationPattern.from_selected(indicator(sel, n)))
    mask = partial.pattern.mask.astype(bool)
    assert np.array_equal(partial.values[mask], adj[mask])
    assert partial.values[~mask].sum() == 0
