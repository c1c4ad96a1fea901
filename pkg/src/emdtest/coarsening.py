"""Dyadic grid hierarchy over ``[0, delta]^d``.

Level ``i`` cuts every axis into ``2**i`` slabs of width ``delta / 2**i``.
Cell ``k`` on an axis is the half-open slab ``[k w, (k + 1) w)``; the last
slab is closed at ``delta``. Coarsened distributions are stored sparsely as
(occupied cell, weight) pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import align, ceil_log2
from .distributions import DiscreteDistribution, as_point
from .errors import DomainError, DomainMismatch

CellIndex = tuple


def cells_of(points: np.ndarray, level: int, d: int, delta: float) -> np.ndarray:
    """Vectorised :func:`cell_of` for an ``(m, d)`` array; returns int64 cell coordinates."""
    pts = np.asarray(points, dtype=float).reshape(-1, d)
    if np.any(pts < 0) or np.any(pts > delta):
        raise DomainError(f"points must lie in [0, {delta}]^{d}")
    top = 2 ** level
    k = np.floor(pts * (top / delta))
    return np.minimum(k, top - 1).astype(np.int64)


def cell_of(point, i: int, d: int, delta: float) -> CellIndex:
    """Level-``i`` grid cell containing ``point``."""
    if i < 0:
        raise DomainError("level must be non-negative")
    pt = as_point(point)
    if len(pt) != d:
        raise DomainError(f"point {pt} does not have dimension {d}")
    return tuple(int(v) for v in cells_of(np.array([pt]), i, d, delta)[0])


@dataclass(frozen=True, eq=False)
class CoarseningLevel:
    """Distribution induced on the occupied level-``level`` cells."""

    level: int
    cells: np.ndarray
    weights: np.ndarray
    d: int
    delta: float

    @property
    def support(self) -> np.ndarray:
        return self.cells

    @property
    def side(self) -> float:
        return self.delta / 2 ** self.level

    @property
    def domain_size(self) -> int:
        return 2 ** (self.d * self.level)

    def as_dict(self) -> dict:
        return {tuple(int(v) for v in c): float(w) for c, w in zip(self.cells, self.weights)}


def coarsen(p: DiscreteDistribution, i: int) -> CoarseningLevel:
    """The ``i``-coarsening of ``p``: ``p_i(c) = sum of p(u) over u in c``."""
    cells = cells_of(p.points, i, p.d, p.delta)
    keys, stacked = align([cells], [p.weights])
    return CoarseningLevel(i, keys.astype(np.int64), stacked[0], p.d, p.delta)


def level_l1(a: CoarseningLevel, b: CoarseningLevel) -> float:
    if a.level != b.level or a.d != b.d or a.delta != b.delta:
        raise DomainMismatch("coarsenings live on different grids")
    _, (wa, wb) = align([a.cells, b.cells], [a.weights, b.weights])
    return float(np.abs(wa - wb).sum())


def num_levels(d: int, delta: float, eps: float) -> int:
    """``ceil(log2(2 delta d / eps))``, zero when ``eps >= 2 delta d``."""
    return ceil_log2(2 * delta * d / eps)


def coarsening_bound(p: DiscreteDistribution, q: DiscreteDistribution, eps: float) -> float:
    """Upper bound on ``EMD(p, q)`` from the l1 distances of the coarsenings.

    ``d * sum_{i=1..L} (delta / 2**(i-1)) * |p_i - q_i|_1 + eps / 2`` with
    ``L = num_levels(d, delta, eps)``.
    """
    if not p.same_domain(q):
        raise DomainMismatch("distributions live on different domains")
    total = 0.0
    for i in range(1, num_levels(p.d, p.delta, eps) + 1):
        total += p.delta / 2 ** (i - 1) * level_l1(coarsen(p, i), coarsen(q, i))
    return p.d * total + eps / 2
