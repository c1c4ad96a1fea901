"""Budget-accounting sample streams.

Every algorithm in the package consumes samples only through a source. A
source exposes ``draw()`` for one point, ``draw_many(m)`` for an ``(m, k)``
array, and ``draw_counts(m)`` for the multiset of ``m`` draws as distinct rows
with multiplicities. ``draws_taken`` counts every sample handed out and is
never reset.

Derived views (:class:`MappedSource`, :class:`AlternatingSource`) forward to
their base sources, so budget accounting always happens where the randomness
lives.
"""

from __future__ import annotations

import numpy as np

from ._util import group_rows
from .distributions import DiscreteDistribution, Point
from .errors import BudgetExceeded, EmptyInput

RNG_NAME = "PCG64"


def make_rng(seed):
    """The package's named generator: numpy ``Generator(PCG64(seed))``."""
    return np.random.Generator(np.random.PCG64(seed))


def spawn_seeds(seed: int, k: int):
    """``k`` independent child seeds derived from one integer seed."""
    return np.random.SeedSequence(seed).spawn(k)


class _Counted:
    draws_taken: int
    budget: int | None

    def _charge(self, m: int) -> None:
        if m < 0:
            raise ValueError("cannot draw a negative number of samples")
        if self.budget is not None and self.draws_taken + m > self.budget:
            raise BudgetExceeded(
                f"requested {m} draws with {self.budget - self.draws_taken} left of {self.budget}")
        self.draws_taken += m

    def draw(self) -> Point:
        return tuple(float(v) for v in self.draw_many(1)[0])


class SampleSource(_Counted):
    """i.i.d. draws from an explicit :class:`DiscreteDistribution`.

    Parameters
    ----------
    dist : DiscreteDistribution
    seed : int or numpy.random.SeedSequence, optional
        Seed for the package generator (PCG64). Ignored when ``rng`` is given.
    rng : numpy.random.Generator, optional
    budget : int, optional
        Hard cap on total draws; exceeding it raises :class:`BudgetExceeded`.
    """

    def __init__(self, dist: DiscreteDistribution, seed=None, rng=None, budget: int | None = None):
        self.dist = dist
        self.seed = seed if isinstance(seed, (int, type(None))) else getattr(seed, "entropy", None)
        self.rng = rng if rng is not None else make_rng(seed)
        self.budget = budget
        self.draws_taken = 0
        self._cdf = np.cumsum(dist.weights)
        self._cdf[-1] = 1.0

    @property
    def d(self) -> int:
        return self.dist.d

    @property
    def delta(self) -> float:
        return self.dist.delta

    def draw_many(self, m: int) -> np.ndarray:
        self._charge(m)
        idx = np.searchsorted(self._cdf, self.rng.random(m), side="right")
        return self.dist.points[np.minimum(idx, len(self._cdf) - 1)]

    def draw_counts(self, m: int):
        """Multiplicities of ``m`` i.i.d. draws, as ``(rows, counts)`` over occupied rows."""
        self._charge(m)
        counts = self.rng.multinomial(m, self.dist.weights)
        hit = counts > 0
        return self.dist.points[hit], counts[hit]


class StreamSource(_Counted):
    """Replays an external, finite sample stream in order.

    Running past the end of the stream raises :class:`BudgetExceeded`.
    """

    def __init__(self, samples, d: int, delta: float, seed=None):
        arr = np.asarray(samples, dtype=float)
        if arr.size == 0:
            raise EmptyInput("empty sample stream")
        self.samples = arr.reshape(len(arr), d)
        self.d = d
        self.delta = delta
        self.seed = seed
        self.budget = len(self.samples)
        self.draws_taken = 0

    def draw_many(self, m: int) -> np.ndarray:
        start = self.draws_taken
        self._charge(m)
        return self.samples[start:start + m]

    def draw_counts(self, m: int):
        return group_rows(*_ones(self.draw_many(m)))


def _ones(rows):
    return rows, np.ones(len(rows))


class MappedSource:
    """A view of ``base`` whose samples pass through ``mapper``.

    ``mapper`` takes an ``(m, d)`` coordinate array and returns an ``(m, k)``
    label array. Draws are charged to ``base``.
    """

    def __init__(self, base, mapper):
        self.base = base
        self.mapper = mapper

    @property
    def draws_taken(self) -> int:
        return self.base.draws_taken

    @property
    def seed(self):
        return getattr(self.base, "seed", None)

    def draw_many(self, m: int) -> np.ndarray:
        return _as_rows(self.mapper(self.base.draw_many(m)))

    def draw(self):
        return tuple(self.draw_many(1)[0])

    def draw_counts(self, m: int):
        rows, counts = self.base.draw_counts(m)
        if len(rows) == 0:
            return rows, counts
        return group_rows(_as_rows(self.mapper(rows)), counts)


def _as_rows(labels) -> np.ndarray:
    labels = np.asarray(labels)
    return labels.reshape(len(labels), -1)


class AlternatingSource:
    """Merged stream that alternates single draws between two sources (first, second, first, ...)."""

    def __init__(self, first, second):
        self.first = first
        self.second = second
        self._next_first = True

    @property
    def draws_taken(self) -> int:
        return self.first.draws_taken + self.second.draws_taken

    def draw(self) -> Point:
        src = self.first if self._next_first else self.second
        self._next_first = not self._next_first
        return src.draw()

    def draw_many(self, m: int) -> np.ndarray:
        lead, trail = (self.first, self.second) if self._next_first else (self.second, self.first)
        a = lead.draw_many((m + 1) // 2)
        b = trail.draw_many(m // 2)
        out = np.empty((m, a.shape[1] if len(a) else b.shape[1]))
        out[0::2] = a
        out[1::2] = b
        if m % 2:
            self._next_first = not self._next_first
        return out


def draw(source) -> Point:
    return source.draw()
