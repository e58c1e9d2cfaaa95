import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from credalnet.core import (Domain, IntervalValuation, PmfValuation, Variable, box_simplex_vertices,
                            check_coherence, config_decode, config_encode, config_labels,
                            enumerate_vertices, make_variable, tighten_to_reachable)
from credalnet.errors import (CoherenceError, DomainError, EmptyCredalSet, InvalidState,
                              ThresholdExceeded)
from credalnet.optim.lp import solve_lp, interval_lp_problem

from gen import interval_sets, random_intervals


def dom(**sizes):
    return Domain(tuple(make_variable(n, k) for n, k in sizes.items()))


class TestDomain:
    def test_sorted_by_name(self):
        d = dom(S=2, L=2, D=3)
        assert d.names == ("D", "L", "S")
        assert d.shape == (3, 2, 2)
        assert d.cardinality == 12

    def test_empty_domain_is_scalar(self):
        assert Domain().cardinality == 1
        assert Domain().shape == ()

    def test_duplicates_rejected(self):
        x = make_variable("X", 2)
        with pytest.raises(DomainError):
            Domain((x, x))

    def test_set_operations(self):
        a, b = dom(X=2, Y=3), dom(Y=3, Z=2)
        assert (a | b).names == ("X", "Y", "Z")
        assert (a & b).names == ("Y",)
        assert (a - b).names == ("X",)
        assert (a & b) <= a
        assert not a <= b

    def test_conflicting_frames(self):
        with pytest.raises(DomainError):
            dom(X=2).union(dom(X=3))

    def test_frame_labels_unique(self):
        with pytest.raises(DomainError):
            Variable("X", ("a", "a"))


class TestConfigurations:
    def test_last_variable_fastest(self):
        assert config_encode(dom(D=3, T=3), {"D": 1, "T": 2}) == 5
        assert config_encode(dom(A=5), (0,)) == 0

    def test_three_variable_roundtrip(self):
        d = dom(L=2, S=2, D=3)
        seen = set()
        for states in itertools.product(range(3), range(2), range(2)):
            i = config_encode(d, states)
            assert config_decode(d, i) == states
            seen.add(i)
        assert seen == set(range(12))
        # C-order layout: D=2, L=1, S=0 sits at 2*4 + 1*2 + 0
        assert config_encode(d, {"D": 2, "L": 1, "S": 0}) == 10

    def test_labels(self):
        assert config_labels(dom(D=3, T=3), 5) == {"D": "1", "T": "2"}

    def test_out_of_range(self):
        with pytest.raises(InvalidState):
            config_encode(dom(D=3), (3,))
        with pytest.raises(InvalidState):
            config_decode(dom(D=3), 3)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(1, 5), min_size=1, max_size=4))
    def test_roundtrip_random_domains(self, sizes):
        d = Domain(tuple(make_variable(f"V{k}", s) for k, s in enumerate(sizes)))
        for i in range(d.cardinality):
            assert config_encode(d, config_decode(d, i)) == i

    def test_matches_numpy_ravel(self):
        d = dom(A=3, B=4, C=2)
        for i in range(d.cardinality):
            assert np.unravel_index(i, d.shape) == config_decode(d, i)


class TestPmf:
    def test_must_sum_to_one(self):
        with pytest.raises(DomainError):
            PmfValuation(dom(X=2), [0.5, 0.6])

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            PmfValuation(dom(X=2), [1.5, -0.5])

    def test_immutable(self):
        p = PmfValuation(dom(X=2), [0.3, 0.7])
        with pytest.raises(ValueError):
            p.probs[0] = 1.0


class TestCoherence:
    def test_example_set_coherent(self):
        assert check_coherence([0, 0, 0.5], [0.5, 0.5, 1.0]).ok

    def test_cond1_fails(self):
        rep = check_coherence([0.6, 0.5], [0.7, 0.8])
        assert not rep.cond1_ok

    def test_reachability_fails(self):
        rep = check_coherence([0.2, 0.2], [0.9, 0.9])
        assert rep.cond1_ok and not rep.reachable_ok
        assert rep.violating_indices == (0, 1)

    def test_tighten(self):
        k = tighten_to_reachable([0.2, 0.2], [0.9, 0.9])
        np.testing.assert_allclose(k.lower, [0.2, 0.2])
        np.testing.assert_allclose(k.upper, [0.8, 0.8])

    def test_tighten_idempotent(self):
        k = tighten_to_reachable([0.1, 0.2, 0.3], [0.4, 0.5, 0.6])
        k2 = tighten_to_reachable(k.lower, k.upper)
        np.testing.assert_array_equal(k.lower, k2.lower)
        np.testing.assert_array_equal(k.upper, k2.upper)

    def test_precise_unchanged(self):
        p = np.array([0.1, 0.2, 0.7])
        k = tighten_to_reachable(p, p)
        np.testing.assert_array_equal(k.lower, p)
        np.testing.assert_array_equal(k.upper, p)

    def test_empty_set(self):
        with pytest.raises(EmptyCredalSet):
            tighten_to_reachable([0.6, 0.5], [0.7, 0.8])

    def test_crossed_bounds(self):
        with pytest.raises(CoherenceError):
            tighten_to_reachable([0.6, 0.1], [0.5, 0.9])

    def test_noise_clamped(self):
        k = tighten_to_reachable([-1e-12, 0.3], [0.7, 1 + 1e-12])
        assert k.lower.min() >= 0 and k.upper.max() <= 1

    @settings(max_examples=100, deadline=None)
    @given(interval_sets())
    def test_constructed_valuations_coherent(self, k):
        assert check_coherence(k).ok


class TestVertices:
    def test_example_set(self):
        V = box_simplex_vertices([0, 0, 0.5], [0.5, 0.5, 1.0])
        expected = {(0, 0, 1), (0, 0.5, 0.5), (0.5, 0, 0.5)}
        assert {tuple(np.round(v, 12)) for v in V} == expected

    def test_precise_single_vertex(self):
        k = IntervalValuation.precise(PmfValuation(dom(X=3), [0.2, 0.3, 0.5]))
        vs = enumerate_vertices(k)
        assert len(vs) == 1
        np.testing.assert_array_equal(vs[0].probs, [0.2, 0.3, 0.5])

    def test_vacuous_binary(self):
        vs = enumerate_vertices(IntervalValuation.vacuous(dom(X=2)))
        assert {tuple(v.probs) for v in vs} == {(1.0, 0.0), (0.0, 1.0)}

    def test_threshold(self):
        with pytest.raises(ThresholdExceeded):
            enumerate_vertices(IntervalValuation.vacuous(dom(X=17)))

    @settings(max_examples=60, deadline=None)
    @given(interval_sets(max_n=6))
    def test_sound_and_complete(self, k):
        V = box_simplex_vertices(k.lower, k.upper)
        assert np.all(V >= k.lower - 1e-12) and np.all(V <= k.upper + 1e-12)
        np.testing.assert_allclose(V.sum(axis=1), 1.0, atol=1e-12)
        # at most one coordinate strictly inside its bounds
        inside = (V > k.lower + 1e-12) & (V < k.upper - 1e-12)
        assert inside.sum(axis=1).max() <= 1
        rng = np.random.default_rng(len(V))
        for c in rng.standard_normal((20, k.lower.size)):
            lp = solve_lp(interval_lp_problem(c, k.lower, k.upper))
            assert abs(lp.value - (V @ c).min()) <= 1e-9

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6), st.integers(2, 6))
    def test_tightening_keeps_vertex_set(self, seed, n):
        rng = np.random.default_rng(seed)
        p = rng.dirichlet(np.ones(n))
        lo = np.maximum(0, p - rng.random(n) * 0.6)
        up = np.minimum(1, p + rng.random(n) * 0.6)
        before = box_simplex_vertices(lo, up)
        k = tighten_to_reachable(lo, up)
        after = box_simplex_vertices(k.lower, k.upper)
        key = lambda V: sorted(tuple(np.round(v, 9)) for v in V)
        assert key(before) == key(after)

    def test_random_sets_deduplicated(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            k = random_intervals(rng, 6)
            V = box_simplex_vertices(k.lower, k.upper)
            d = np.abs(V[:, None, :] - V[None, :, :]).max(axis=2)
            np.fill_diagonal(d, 1.0)
            assert d.min() > 1e-12
