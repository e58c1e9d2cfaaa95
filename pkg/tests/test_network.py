import itertools

import numpy as np
import pytest

from credalnet.core import Domain, IntervalValuation, PmfValuation, check_coherence
from credalnet.errors import DomainError, KindMismatch, OrderError, TotalConflict
from credalnet.network import (ValuationNetwork, brute_force_marginal, build_join_tree,
                               default_order, evaluate, fuse, induced_cliques, validate_order)
from credalnet.optim import SolverConfig

from gen import brute_joint_pmf, random_network, select_precise, variables


def chain():
    vs = variables(dict(X=2, Y=3, Z=2))
    d = lambda *n: Domain(tuple(vs[x] for x in n))
    vals = {"a": PmfValuation(d("X", "Y"), np.arange(1, 7) / 21),
            "b": PmfValuation(d("Y", "Z"), np.arange(6, 0, -1) / 21)}
    return ValuationNetwork(vs.values(), vals, "Z")


class TestModel:
    def test_undeclared_variable(self):
        vs = variables(dict(X=2))
        other = variables(dict(Y=2))
        with pytest.raises(DomainError):
            ValuationNetwork(vs.values(), {"a": PmfValuation.uniform(Domain((other["Y"],)))}, "X")

    def test_unused_variable(self):
        vs = variables(dict(X=2, Y=2))
        with pytest.raises(DomainError):
            ValuationNetwork(vs.values(), {"a": PmfValuation.uniform(Domain((vs["X"],)))}, "X")

    def test_mixed_kinds(self):
        vs = variables(dict(X=2))
        d = Domain((vs["X"],))
        with pytest.raises(KindMismatch):
            ValuationNetwork(vs.values(), {"a": PmfValuation.uniform(d),
                                           "b": IntervalValuation.vacuous(d)}, "X")


class TestOrder:
    def test_chain_eliminates_x_first(self):
        assert default_order(chain()) == ["X", "Y"]

    def test_validation(self):
        net = chain()
        assert validate_order(net, ["Y", "X"]) == ["Y", "X"]
        for bad in (["X"], ["X", "Y", "Z"], ["X", "X", "Y"]):
            with pytest.raises(OrderError):
                validate_order(net, bad)

    def test_single_valuation_any_order(self):
        rng = np.random.default_rng(0)
        net = random_network(rng, dict(X=2, Y=3, Z=2), "X", count=0, max_vars=3)
        net = ValuationNetwork(net.variables.values(),
                               {"j": PmfValuation(net.domain, rng.dirichlet(np.ones(12)))}, "X")
        outs = [fuse(net, list(o)).probs for o in itertools.permutations(["Y", "Z"])]
        np.testing.assert_allclose(outs[0], outs[1], atol=1e-15)


class TestJoinTree:
    def test_structure(self):
        tree = build_join_tree(chain())
        assert len(tree.leaves()) == 2
        for n in tree.nodes:
            if n.op == "combine":
                assert len(n.children) == 2

    def test_replay_bit_identical(self):
        rng = np.random.default_rng(1)
        net = random_network(rng, dict(A=2, B=3, C=2, D=2), "A", count=4)
        tree = build_join_tree(net)
        a = evaluate(tree, net)
        b = fuse(net, tree.order, use_cache=False)
        np.testing.assert_array_equal(a.probs, b.probs)

    def test_domains_within_cliques(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            net = random_network(rng, dict(A=2, B=3, C=2, D=2), "B", count=4)
            order = default_order(net)
            cliques = induced_cliques(net, order)
            tree = build_join_tree(net, order)
            for node in tree.nodes:
                if node.op == "combine":
                    assert any(set(node.domain.names) <= c for c in cliques.values()) or \
                        set(node.domain.names) <= set(net.query.names)

    def test_single_leaf(self):
        vs = variables(dict(X=2))
        net = ValuationNetwork(vs.values(), {"a": PmfValuation(Domain((vs["X"],)), [0.2, 0.8])}, "X")
        tree = build_join_tree(net)
        assert len(tree) == 1
        np.testing.assert_array_equal(fuse(net).probs, [0.2, 0.8])

    def test_describe(self):
        assert "eliminate" in build_join_tree(chain()).describe()


class TestFusePrecise:
    def test_against_brute_force(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            sizes = {n: int(rng.integers(2, 4)) for n in "ABC"}
            net = random_network(rng, sizes, "A", count=3)
            joint = brute_joint_pmf(net).reshape(net.domain.shape)
            expected = joint.sum(axis=tuple(range(1, 3)))
            np.testing.assert_allclose(fuse(net).probs, expected, atol=1e-12)

    def test_order_invariance(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            net = random_network(rng, dict(A=2, B=3, C=2), "A", count=3)
            outs = [fuse(net, list(o), use_cache=False).probs
                    for o in itertools.permutations(["B", "C"])]
            np.testing.assert_allclose(outs[0], outs[1], atol=1e-12)

    def test_multi_variable_query(self):
        rng = np.random.default_rng(5)
        net = random_network(rng, dict(A=2, B=3, C=2), "A", count=3)
        q = net.with_query(["A", "C"])
        out = fuse(q)
        assert out.domain.names == ("A", "C")
        joint = brute_joint_pmf(net).reshape(net.domain.shape)
        np.testing.assert_allclose(out.probs, joint.sum(axis=1).ravel(), atol=1e-12)

    def test_conflict_names_valuations(self):
        vs = variables(dict(X=2))
        d = Domain((vs["X"],))
        net = ValuationNetwork(vs.values(), {"yes": PmfValuation(d, [1, 0]),
                                             "no": PmfValuation(d, [0, 1])}, "X")
        with pytest.raises(TotalConflict, match="no.*yes|yes.*no"):
            fuse(net)


class TestFuseCredal:
    def test_contains_precise_selections(self):
        rng = np.random.default_rng(6)
        for _ in range(5):
            net = random_network(rng, dict(A=2, B=2, C=2), "A", kind="credal", count=3)
            out = fuse(net)
            assert check_coherence(out).ok
            for _ in range(20):
                truth = fuse(select_precise(rng, net))
                assert out.contains(truth, 1e-9)

    def test_cache_reused(self):
        rng = np.random.default_rng(7)
        net = random_network(rng, dict(A=2, B=2, C=2), "A", kind="credal", count=3)
        first = fuse(net)
        assert net._cache
        again = fuse(net)
        np.testing.assert_array_equal(first.lower, again.lower)
        other = fuse(net.with_query("B"))
        assert other.domain.names == ("B",)

    def test_brute_force_reference_available(self):
        rng = np.random.default_rng(8)
        net = random_network(rng, dict(A=2, B=2, C=2), "A", kind="credal", count=3)
        ref = brute_force_marginal(net, SolverConfig())
        assert check_coherence(ref).ok
