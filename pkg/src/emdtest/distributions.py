"""Finite distributions over ``[0, delta]^d``.

A distribution is an immutable pair of arrays: ``points`` with shape
``(k, d)`` and strictly positive ``weights`` summing to one. Points are plain
coordinate tuples when they cross the public API.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ._util import align
from .errors import DomainError, DomainMismatch, EmptyInput, NormalizationError, ParseError

Point = Tuple[float, ...]

NORMALIZATION_TOL = 1e-12


def as_point(x) -> Point:
    if np.isscalar(x):
        return (float(x),)
    return tuple(float(v) for v in x)


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Weighted finite point set in ``[0, delta]^d``.

    Construct through :func:`new_distribution` (or :func:`empirical`), which
    validates the domain and merges duplicate points.
    """

    points: np.ndarray
    weights: np.ndarray
    d: int
    delta: float

    def __post_init__(self):
        self.points.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def support(self) -> np.ndarray:
        return self.points

    def __len__(self) -> int:
        return len(self.weights)

    def items(self):
        for row, w in zip(self.points, self.weights):
            yield tuple(float(v) for v in row), float(w)

    def weight_of(self, point) -> float:
        target = np.asarray(as_point(point))
        hit = np.all(self.points == target, axis=1)
        return float(self.weights[hit].sum())

    def same_domain(self, other: "DiscreteDistribution") -> bool:
        return self.d == other.d and self.delta == other.delta

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiscreteDistribution):
            return NotImplemented
        return self.same_domain(other) and l1_distance(self, other) <= 1e-12

    __hash__ = None

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "delta": self.delta,
            "points": [{"coords": list(c), "w": w} for c, w in self.items()],
        }

    def __repr__(self) -> str:
        body = ", ".join(f"{c}: {w:.6g}" for c, w in list(self.items())[:6])
        more = ", ..." if len(self) > 6 else ""
        return f"DiscreteDistribution(d={self.d}, delta={self.delta}, {{{body}{more}}})"


def _check_domain(d: int, delta: float) -> None:
    if int(d) != d or d < 1:
        raise DomainError(f"dimension must be a positive integer, got {d!r}")
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta!r}")


def _build(points: np.ndarray, weights: np.ndarray, d: int, delta: float,
           normalize: bool) -> DiscreteDistribution:
    _check_domain(d, delta)
    points = np.asarray(points, dtype=float).reshape(len(weights), d) if len(weights) else np.zeros((0, d))
    weights = np.asarray(weights, dtype=float)
    if len(weights) == 0:
        raise EmptyInput("a distribution needs at least one support point")
    if not np.all(np.isfinite(points)):
        raise DomainError("coordinates must be finite")
    if np.any(points < 0) or np.any(points > delta):
        bad = points[np.any((points < 0) | (points > delta), axis=1)][0]
        raise DomainError(f"point {tuple(bad)} lies outside [0, {delta}]^{d}")
    if np.any(~(weights > 0)):
        raise NormalizationError("weights must be strictly positive")
    keys, stacked = align([points], [weights])
    merged = stacked[0]
    total = merged.sum()
    if not normalize and abs(total - 1.0) > NORMALIZATION_TOL:
        raise NormalizationError(f"weights sum to {total!r}, not 1")
    return DiscreteDistribution(keys.copy(), merged / total, int(d), float(delta))


def new_distribution(points_with_weights, d: int, delta: float) -> DiscreteDistribution:
    """Build a validated distribution.

    Parameters
    ----------
    points_with_weights : mapping or iterable
        Either ``{point: weight}`` or an iterable of ``(point, weight)``
        pairs. A point is a scalar (``d == 1``) or a length-``d`` sequence.
    d, delta : int, float
        Ambient space ``[0, delta]^d``.

    Duplicate points are merged by adding their weights. The merged weights
    must sum to one within ``1e-12``.
    """
    if isinstance(points_with_weights, Mapping):
        pairs = list(points_with_weights.items())
    else:
        pairs = list(points_with_weights)
    if not pairs:
        raise EmptyInput("a distribution needs at least one support point")
    coords = []
    for pt, _ in pairs:
        c = as_point(pt)
        if len(c) != d:
            raise DomainError(f"point {c} does not have dimension {d}")
        coords.append(c)
    weights = [float(w) for _, w in pairs]
    return _build(np.array(coords, dtype=float), np.array(weights), d, delta, normalize=False)


def from_arrays(points, weights, d: int, delta: float, normalize: bool = False) -> DiscreteDistribution:
    """Array-level constructor; ``normalize=True`` rescales arbitrary positive weights."""
    points = np.asarray(points, dtype=float)
    weights = np.asarray(weights, dtype=float)
    keep = weights > 0 if normalize else np.ones(len(weights), dtype=bool)
    return _build(points.reshape(len(weights), -1)[keep], weights[keep], d, delta, normalize)


def point_mass(point, d: int, delta: float) -> DiscreteDistribution:
    return new_distribution([(point, 1.0)], d, delta)


def empirical(samples, d: int, delta: float) -> DiscreteDistribution:
    """Empirical distribution: each distinct point weighted by multiplicity / total."""
    arr = np.asarray([as_point(s) for s in samples] if not isinstance(samples, np.ndarray) else samples,
                     dtype=float)
    if arr.size == 0:
        raise EmptyInput("cannot form an empirical distribution from no samples")
    arr = arr.reshape(len(arr), d)
    return from_arrays(arr, np.ones(len(arr)), d, delta, normalize=True)


def from_counts(rows, counts, d: int, delta: float) -> DiscreteDistribution:
    counts = np.asarray(counts, dtype=float)
    if counts.sum() <= 0:
        raise EmptyInput("cannot form an empirical distribution from no samples")
    return from_arrays(rows, counts, d, delta, normalize=True)


def l1_distance(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """``sum_x |p(x) - q(x)|`` over the union of supports, in ``[0, 2]``."""
    if not p.same_domain(q):
        raise DomainMismatch(f"(d={p.d}, delta={p.delta}) vs (d={q.d}, delta={q.delta})")
    _, (wp, wq) = align([p.points, q.points], [p.weights, q.weights])
    return float(np.abs(wp - wq).sum())


def union_support(p: DiscreteDistribution, q: DiscreteDistribution):
    """Common support rows and the two weight vectors aligned on it."""
    if not p.same_domain(q):
        raise DomainMismatch(f"(d={p.d}, delta={p.delta}) vs (d={q.d}, delta={q.delta})")
    keys, (wp, wq) = align([p.points, q.points], [p.weights, q.weights])
    return keys, wp, wq


def distribution_from_json(obj) -> DiscreteDistribution:
    """Parse ``{"d": int, "delta": number, "points": [{"coords": [...], "w": number}]}``."""
    try:
        d = obj["d"]
        delta = obj["delta"]
        pairs = [(tuple(pt["coords"]), pt["w"]) for pt in obj["points"]]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed distribution object: {exc}") from exc
    if not isinstance(d, int) or isinstance(d, bool):
        raise ParseError("'d' must be an integer")
    return new_distribution(pairs, d, float(delta))

