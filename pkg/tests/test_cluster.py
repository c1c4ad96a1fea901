import numpy as np
import pytest

from emdtest.cluster import (ClusterModel, assign_many, assign_to_centers, clustered_known_budget,
                             clustered_unknown_budget, emd_test_clustered_known,
                             emd_test_clustered_unknown, find_representatives, partition_bound,
                             representatives_budget)
from emdtest.distributions import from_arrays, point_mass
from emdtest.errors import ConfigError
from emdtest.flow import emd_exact
from emdtest.generators import gen_clustered, gen_far_from_clusterable
from emdtest.l1 import collision_budget
from emdtest.sources import SampleSource

TRIALS = 200
EPS, D, SPAN, K = 0.25, 2, 1.0, 4


def sources(p, q, t):
    return SampleSource(p, seed=2 * t), SampleSource(q, seed=2 * t + 1)


class TestAssign:
    def test_point_on_center(self):
        C = np.array([[0.0, 0.0], [1.0, 1.0]])
        assert assign_to_centers((1.0, 1.0), C) == 1

    def test_tie_goes_to_lower_index(self):
        assert assign_to_centers(0.5, np.array([[0.0], [1.0]])) == 0

    def test_matches_exhaustive(self, rng):
        C = rng.random((5, 3))
        pts = rng.random((100, 3))
        for x, j in zip(pts, assign_many(pts, C)):
            dists = [np.abs(x - c).sum() for c in C]
            assert dists[j] == min(dists)

    def test_model_validation(self):
        with pytest.raises(ConfigError):
            ClusterModel(np.array([[0.0], [0.0]]), 0.1, 0.1)
        assert ClusterModel(np.array([[0.0], [1.0]]), 0.1, 0.1).k == 2


class TestKnownCenters:
    def test_budget_composition(self):
        assert clustered_known_budget(K, EPS, D, SPAN) == collision_budget(K, EPS / (D * SPAN), 1 / 3)
        p, _, centers = gen_clustered(K, EPS / 4, D, SPAN)
        v = emd_test_clustered_known(*sources(p, p, 0), centers, EPS, D, SPAN, c=3)
        m = collision_budget(K, EPS / (D * SPAN), 1 / 3, 3)
        assert v.samples_used == {"p": m, "q": m}

    def test_completeness(self):
        p, _, centers = gen_clustered(K, EPS / 4, D, SPAN)
        acc = sum(emd_test_clustered_known(*sources(p, p, t), centers, EPS, D, SPAN, c=16).accepted
                  for t in range(TRIALS))
        assert acc / TRIALS >= 2 / 3

    def test_soundness(self):
        p, q, centers = gen_clustered(K, EPS / 4, D, SPAN, imbalance=0.25)
        assert emd_exact(p, q) > EPS
        rej = sum(not emd_test_clustered_known(*sources(p, q, t), centers, EPS, D, SPAN, c=16).accepted
                  for t in range(TRIALS))
        assert rej / TRIALS >= 2 / 3

    def test_trivial(self):
        p = point_mass((0.0, 0.0), 2, 1.0)
        v = emd_test_clustered_known(*sources(p, p, 0), [[0.0, 0.0]], 4.0, 2, 1.0)
        assert v.accepted and v.samples_used == {"p": 0, "q": 0}


class TestRepresentatives:
    def test_point_mass(self):
        reps = find_representatives(SampleSource(point_mass(0.3, 1, 1.0), seed=0), 1, 0.1, 0.1)
        assert not reps.rejected
        np.testing.assert_array_equal(reps.points, [[0.3]])
        assert reps.samples_used == representatives_budget(1, 0.1)

    def test_far_points_rejected(self):
        far = gen_far_from_clusterable(K, 0.05, 2, 1.0)
        rej = sum(find_representatives(SampleSource(far, seed=t), K, 0.05, 0.1).rejected
                  for t in range(TRIALS))
        assert rej / TRIALS >= 2 / 3

    def test_planted_clusters_covered(self):
        b = 0.05
        p, _, centers = gen_clustered(K, b, 2, 1.0)
        good = 0
        for t in range(TRIALS):
            reps = find_representatives(SampleSource(p, seed=t), K, b, 0.1)
            if reps.rejected or len(reps.points) > K:
                continue
            near = [np.abs(reps.points - c).sum(axis=1).min() <= b for c in centers]
            good += all(near)
        assert good / TRIALS >= 2 / 3

    def test_representatives_are_spread(self, rng):
        p = from_arrays(rng.random((30, 2)), np.ones(30), 2, 1.0, normalize=True)
        reps = find_representatives(SampleSource(p, seed=0), 50, 0.1, 0.2)
        D = np.abs(reps.points[:, None] - reps.points[None]).sum(axis=2)
        assert (D[~np.eye(len(D), dtype=bool)] > 0.2).all()

    def test_invalid(self):
        with pytest.raises(ConfigError):
            find_representatives(SampleSource(point_mass(0.3, 1, 1.0), seed=0), 1, 0.0, 0.1)


class TestUnknownCenters:
    def test_completeness(self):
        p, _, _ = gen_clustered(K, EPS / 4, D, SPAN)
        acc = sum(emd_test_clustered_unknown(*sources(p, p, t), K, EPS, D, SPAN, c=16).accepted
                  for t in range(100))
        assert acc / 100 >= 2 / 3

    def test_soundness(self):
        p, q, _ = gen_clustered(K, EPS / 4, D, SPAN, imbalance=0.25)
        rej = sum(not emd_test_clustered_unknown(*sources(p, q, t), K, EPS, D, SPAN, c=16).accepted
                  for t in range(100))
        assert rej / 100 >= 2 / 3

    def test_budget(self):
        reps, known = clustered_unknown_budget(K, EPS, D, SPAN)
        assert reps == representatives_budget(K, EPS / (4 * D * SPAN))
        assert known == clustered_known_budget(K, EPS, D, SPAN)
        p, _, _ = gen_clustered(K, EPS / 4, D, SPAN)
        v = emd_test_clustered_unknown(*sources(p, p, 0), K, EPS, D, SPAN)
        assert v.details["stage"] == "known-centers"
        assert v.samples_used == {"p": (reps + 1) // 2 + known, "q": reps // 2 + known}

    def test_early_reject_budget(self):
        far = gen_far_from_clusterable(K, EPS / 4, D, SPAN)
        v = emd_test_clustered_unknown(*sources(far, far, 0), K, EPS, D, SPAN)
        reps, _ = clustered_unknown_budget(K, EPS, D, SPAN)
        assert not v.accepted and v.details["stage"] == "representatives"
        assert sum(v.samples_used.values()) == reps


def test_partition_bound():
    assert partition_bound(0.5, 2.0, 0.1) == pytest.approx(0.6)
