import math

import numpy as np
import pytest

from emdtest.distributions import new_distribution
from emdtest.errors import ConfigError, ParseError, SupportError
from emdtest.flow import emd_matrix
from emdtest.sources import SampleSource
from emdtest.tree import (WeightedTree, hard_line_instance, node_distribution, node_weights,
                          path_tree, subtree_masses, tree_emd_estimate, tree_emd_exact,
                          tree_estimate_budget, tree_from_json)

from oracles import brute_subtree_masses, emd_linprog, floyd_warshall


def random_tree(rng, n):
    edges = tuple((int(rng.integers(v)), v, float(rng.uniform(0.1, 2.0))) for v in range(1, n))
    return WeightedTree(n, edges)


class TestTree:
    @pytest.mark.parametrize("n,edges", [(0, ()), (3, ((0, 1, 1.0),)), (3, ((0, 1, 1.0), (0, 1, 1.0))),
                                         (2, ((0, 1, 0.0),)), (2, ((0, 2, 1.0),)), (2, ((1, 1, 1.0),))])
    def test_invalid(self, n, edges):
        with pytest.raises(ConfigError):
            WeightedTree(n, edges)

    def test_single_node(self):
        t = WeightedTree(1, ())
        assert tree_emd_exact(t, [1.0], [1.0]) == 0.0

    def test_distance_matrix(self, rng):
        t = random_tree(rng, 8)
        np.testing.assert_allclose(t.distance_matrix(), floyd_warshall(8, t.edges))

    def test_json(self):
        t = path_tree(3, 2.0)
        assert tree_from_json(t.to_json()).edges == t.edges
        with pytest.raises(ParseError):
            tree_from_json({"n": 2})

    def test_node_weights_inputs(self):
        t = path_tree(3)
        np.testing.assert_array_equal(node_weights(t, {2: 1.0}), [0, 0, 1])
        dist = new_distribution({0.0: 0.5, 2.0: 0.5}, 1, 2.0)
        np.testing.assert_array_equal(node_weights(t, dist), [0.5, 0, 0.5])
        with pytest.raises(SupportError):
            node_weights(t, {5: 1.0})
        with pytest.raises(SupportError):
            node_weights(t, new_distribution({0.5: 1.0}, 1, 2.0))
        with pytest.raises(SupportError):
            node_weights(t, [1.0, 0.0])


class TestSubtreeMasses:
    def test_root_point_mass(self):
        t = path_tree(4)
        np.testing.assert_array_equal(subtree_masses(t, [1, 0, 0, 0]), [0, 0, 0])

    def test_leaf_point_mass(self):
        # star-with-tail: 0-1, 1-2, 0-3; mass at leaf 2
        t = WeightedTree(4, ((0, 1, 1.0), (1, 2, 1.0), (0, 3, 1.0)))
        np.testing.assert_array_equal(subtree_masses(t, [0, 0, 1, 0]), [1, 1, 0])

    def test_matches_brute_force(self, rng):
        for _ in range(20):
            t = random_tree(rng, 10)
            m = rng.dirichlet(np.ones(10))
            np.testing.assert_allclose(subtree_masses(t, m), brute_subtree_masses(10, t.edges, m))


class TestExact:
    def test_identical(self, rng):
        t = random_tree(rng, 6)
        m = rng.dirichlet(np.ones(6))
        assert tree_emd_exact(t, m, m) == 0

    def test_single_edge(self):
        assert tree_emd_exact(path_tree(2), [1, 0], [0, 1]) == 1.0

    def test_matches_flow_and_lp(self, rng):
        for _ in range(40):
            n = int(rng.integers(2, 11))
            t = random_tree(rng, n)
            p, q = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
            D = floyd_warshall(n, t.edges)
            exact = tree_emd_exact(t, p, q)
            assert exact == pytest.approx(emd_matrix(D, p, q), abs=1e-9)
            assert exact == pytest.approx(emd_linprog(p, q, D), abs=1e-9)


class TestHardLine:
    def test_two_nodes(self):
        p, q = hard_line_instance(2, 0.5)
        assert tree_emd_exact(path_tree(2), p, q) == pytest.approx(0.5)

    @pytest.mark.parametrize("n,eps", [(3, 0.3), (10, 0.2), (25, 1.7)])
    def test_emd_is_eps(self, n, eps):
        p, q = hard_line_instance(n, eps)
        assert tree_emd_exact(path_tree(n), p, q) == pytest.approx(eps, abs=1e-12)

    def test_zero(self):
        p, q = hard_line_instance(5, 0.0)
        np.testing.assert_array_equal(p, q)

    def test_invalid(self):
        with pytest.raises(ConfigError):
            hard_line_instance(1, 0.1)
        with pytest.raises(ConfigError):
            hard_line_instance(3, 5.0)


class TestEstimator:
    def test_budget_formula(self):
        t = path_tree(10)
        assert tree_estimate_budget(t, 0.2, 1 / 3) == math.ceil((10 / 0.2) ** 2 * math.log(30)) == 8503
        assert tree_estimate_budget(path_tree(4, 2.0), 0.5, 0.1, c=3) == math.ceil(3 * 16 ** 2 * math.log(40))

    def test_point_mass(self):
        t = path_tree(5)
        src = node_distribution(t, {3: 1.0})
        rep = tree_emd_estimate(SampleSource(src, seed=0), SampleSource(src, seed=1), t, 0.5, 0.2)
        assert rep.estimate == 0.0
        m = tree_estimate_budget(t, 0.5, 0.2)
        assert rep.samples_used == {"p": m, "q": m}

    def test_accuracy_on_path(self, rng):
        t = path_tree(10)
        ok = 0
        for trial in range(100):
            p, q = rng.dirichlet(np.ones(10)), rng.dirichlet(np.ones(10))
            exact = tree_emd_exact(t, p, q)
            rep = tree_emd_estimate(SampleSource(node_distribution(t, p), seed=2 * trial),
                                    SampleSource(node_distribution(t, q), seed=2 * trial + 1),
                                    t, 0.2, 1 / 3)
            ok += abs(rep.estimate - exact) <= 0.2
        assert ok >= 67

    def test_invalid(self):
        t = path_tree(3)
        src = SampleSource(node_distribution(t, [1, 0, 0]), seed=0)
        with pytest.raises(ConfigError):
            tree_emd_estimate(src, src, t, 0.0, 0.2)
