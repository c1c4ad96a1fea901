"""Closeness testing for clusterable distributions.

With known centers every draw is replaced by its nearest center (l1, ties
to the lowest index) and the problem becomes two-sample l1 testing over
``k`` labels at distance parameter ``eps / (d delta)``. Without centers, a
greedy pass over a merged p/q stream first picks representatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import ceil_budget, lg
from .errors import ConfigError
from .l1 import L1TesterConfig, collision_budget, l1_test_collision
from .results import Decision, TestVerdict
from .sources import AlternatingSource, MappedSource


@dataclass(frozen=True)
class ClusterModel:
    """Centers plus the diameter bound ``b`` and the unclustered-mass bound ``gamma``."""

    centers: np.ndarray
    b: float
    gamma: float

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=float)
        if c.ndim != 2 or len(c) == 0:
            raise ConfigError("centers must be a non-empty (k, d) array")
        if len(np.unique(c, axis=0)) != len(c):
            raise ConfigError("centers must be distinct")
        if self.b < 0 or not 0 <= self.gamma <= 1:
            raise ConfigError("need b >= 0 and 0 <= gamma <= 1")
        object.__setattr__(self, "centers", c)

    @property
    def k(self) -> int:
        return len(self.centers)


def assign_many(points, centers) -> np.ndarray:
    """Index of the nearest center (l1) for each row of ``points``."""
    pts = np.asarray(points, dtype=float)
    C = np.asarray(centers, dtype=float)
    if len(C) == 0:
        raise ConfigError("need at least one center")
    pts = pts.reshape(-1, C.shape[1])
    dist = np.abs(pts[:, None, :] - C[None, :, :]).sum(axis=2)
    return np.argmin(dist, axis=1)


def assign_to_centers(point, centers) -> int:
    return int(assign_many(np.atleast_1d(np.asarray(point, dtype=float))[None, :], centers)[0])


def clustered_known_config(k: int, eps: float, d: int, delta: float, c: float = 1.0,
                           heavy_const: float = 1.0) -> L1TesterConfig:
    return L1TesterConfig(k, min(eps / (d * delta), 2.0), 1 / 3, c, heavy_const)


def clustered_known_budget(k: int, eps: float, d: int, delta: float, c: float = 1.0) -> int:
    if eps >= 2 * d * delta:
        return 0
    return collision_budget(k, eps / (d * delta), 1 / 3, c)


def emd_test_clustered_known(src_p, src_q, centers, eps: float, d: int, delta: float,
                             c: float = 1.0, heavy_const: float = 1.0) -> TestVerdict:
    """Closeness tester for data clustered around the given centers.

    Valid when the combined support splits into ``k`` clusters of diameter
    ``eps / 2`` around ``centers``; a broken promise voids the guarantee but
    the run still completes.
    """
    C = np.asarray(centers, dtype=float).reshape(-1, d)
    params = {"k": len(C), "eps": eps, "d": d, "delta": delta, "c": c}
    if eps >= 2 * d * delta:
        # EMD on [0, delta]^d never exceeds d * delta
        return TestVerdict(Decision.ACCEPT, params, {"p": 0, "q": 0}, {"trivial": True})
    cfg = clustered_known_config(len(C), eps, d, delta, c, heavy_const)
    mapper = lambda pts: assign_many(pts, C)[:, None]  # noqa: E731
    v = l1_test_collision(MappedSource(src_p, mapper), MappedSource(src_q, mapper), cfg)
    return TestVerdict(v.decision, {**params, "l1_eps": cfg.eps}, v.samples_used, v.details)


def representatives_budget(k: int, gamma: float, c: float = 1.0) -> int:
    """``ceil(c k lg(k) / gamma)`` draws from the merged stream."""
    return ceil_budget(c * k * lg(k) / gamma)


@dataclass
class Representatives:
    """Result of :func:`find_representatives`; ``points`` is ``None`` on reject."""

    points: np.ndarray | None
    samples_used: int

    @property
    def rejected(self) -> bool:
        return self.points is None


def find_representatives(src, k: int, b: float, gamma: float, c: float = 1.0) -> Representatives:
    """Greedy representative selection.

    Each draw farther than ``2b`` (l1) from every representative so far
    becomes a new one; the ``(k+1)``-th representative means reject. No two
    returned representatives are within ``2b`` of each other.
    """
    if not b > 0 or not 0 < gamma < 1:
        raise ConfigError("need b > 0 and 0 < gamma < 1")
    m = representatives_budget(k, gamma, c)
    start = src.draws_taken
    draws = np.asarray(src.draw_many(m), dtype=float)
    reps: list[np.ndarray] = []
    for x in draws:
        if reps and np.abs(np.asarray(reps) - x).sum(axis=1).min() <= 2 * b:
            continue
        reps.append(x)
        if len(reps) > k:
            return Representatives(None, src.draws_taken - start)
    return Representatives(np.asarray(reps), src.draws_taken - start)


def clustered_unknown_budget(k: int, eps: float, d: int, delta: float, c: float = 1.0) -> tuple:
    """``(merged-stream draws, per-source draws of the known-centers stage)``."""
    if eps >= 2 * d * delta:
        return 0, 0
    gamma = eps / (4 * d * delta)
    return representatives_budget(k, gamma, c), clustered_known_budget(k, eps, d, delta, c)


def emd_test_clustered_unknown(src_p, src_q, k: int, eps: float, d: int, delta: float,
                               c: float = 1.0, heavy_const: float = 1.0) -> TestVerdict:
    """Closeness tester for ``(k, eps/4)``-clusterable data with unknown centers.

    Representatives come from :func:`find_representatives` with ``b = eps/4``
    and ``gamma = eps / (4 d delta)`` over a stream alternating p and q. A
    rejection there (too many far-apart points) rejects the test.
    """
    params = {"k": k, "eps": eps, "d": d, "delta": delta, "c": c}
    start = {"p": src_p.draws_taken, "q": src_q.draws_taken}
    if eps >= 2 * d * delta:
        return TestVerdict(Decision.ACCEPT, params, {"p": 0, "q": 0}, {"trivial": True})
    gamma = eps / (4 * d * delta)
    reps = find_representatives(AlternatingSource(src_p, src_q), k, eps / 4, gamma, c)

    def used():
        return {"p": src_p.draws_taken - start["p"], "q": src_q.draws_taken - start["q"]}

    if reps.rejected:
        return TestVerdict(Decision.REJECT, params, used(),
                           {"stage": "representatives", "representative_draws": reps.samples_used})
    v = emd_test_clustered_known(src_p, src_q, reps.points, eps, d, delta, c, heavy_const)
    return TestVerdict(v.decision, params, used(),
                       {"stage": "known-centers", "centers": reps.points.tolist(),
                        "representative_draws": reps.samples_used, **v.details})


def partition_bound(P_minus_Q_l1: float, diameter: float, gamma_diam: float) -> float:
    """``|P - Q|_1 / 2 * diameter + Gamma``: EMD bound from a partition into pieces of diameter ``Gamma``."""
    return P_minus_Q_l1 / 2 * diameter + gamma_diam

