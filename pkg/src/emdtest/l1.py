"""Closeness testing and learning in l1 over a finite labelled domain.

All routines take *sources* (see :mod:`emdtest.sources`) whose samples are
label rows, e.g. grid cells or center indices. The domain size ``n`` only
enters through the sample budgets and thresholds. Budgets are closed-form::

    collision  ceil(c * n^(2/3) * eps^-4 * lg n * lg(1/delta))
    plug-in    ceil(c * n       * eps^-2 * lg n * lg(1/delta))
    known q    ceil(c * n^(1/2) * eps^-2 * lg n * lg(1/delta))
    estimate   ceil(c * t^-1    * eps^-2 * lg n * lg(1/delta))

where ``lg x = max(1, ln x)``. Each budget is drawn from every unknown
source, independent of the data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._util import align, ceil_budget, lg
from .distributions import from_counts
from .errors import ConfigError
from .results import TestVerdict, decide


@dataclass(frozen=True)
class L1TesterConfig:
    """Parameters shared by the l1 testers.

    ``heavy_const`` scales the heavy-element threshold: ``eps / (C n^(2/3))``
    for the two-sample collision tester, ``C / sqrt(n)`` for the known-q tester.
    """

    n: int
    eps: float
    delta: float = 1 / 3
    c: float = 1.0
    heavy_const: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("domain size n must be at least 1")
        if not 0 < self.eps <= 2:
            raise ConfigError(f"l1 distance parameter must lie in (0, 2], got {self.eps}")
        if not 0 < self.delta < 1:
            raise ConfigError(f"failure probability must lie in (0, 1), got {self.delta}")
        if not self.c > 0 or not self.heavy_const > 0:
            raise ConfigError("constant multipliers must be positive")

    def echo(self) -> dict:
        return {"n": self.n, "eps": self.eps, "delta": self.delta, "c": self.c,
                "heavy_const": self.heavy_const}


@dataclass(frozen=True)
class SparseDistribution:
    """Weights over arbitrary label rows (e.g. grid cells)."""

    support: np.ndarray
    weights: np.ndarray

    def as_dict(self) -> dict:
        return {tuple(r.tolist()): float(w) for r, w in zip(self.support, self.weights)}


def collision_budget(n: int, eps: float, delta: float, c: float = 1.0) -> int:
    return ceil_budget(c * n ** (2 / 3) * eps ** -4 * lg(n) * lg(1 / delta))


def plugin_budget(n: int, eps: float, delta: float, c: float = 1.0) -> int:
    return ceil_budget(c * n * eps ** -2 * lg(n) * lg(1 / delta))


def known_budget(n: int, eps: float, delta: float, c: float = 1.0) -> int:
    return ceil_budget(c * math.sqrt(n) * eps ** -2 * lg(n) * lg(1 / delta))


def estimate_budget(n: int, eps: float, delta: float, t: float, c: float = 1.0) -> int:
    return ceil_budget(c / t * eps ** -2 * lg(n) * lg(1 / delta))


def _used(sources: dict, start: dict) -> dict:
    return {k: s.draws_taken - start[k] for k, s in sources.items()}


def _empirical(src, m: int):
    rows, counts = src.draw_counts(m)
    return rows, np.asarray(counts, dtype=float) / m


def l1_estimate(src, n: int, eps: float, delta: float, t: float, c: float = 1.0):
    """Learn a distribution from ``estimate_budget(n, eps, delta, t, c)`` samples.

    The output is the empirical distribution. With the stated budget it
    satisfies ``(1-eps) max(p_i, t) <= est_i <= (1+eps) max(p_i, t)`` for
    every label with probability ``1 - delta`` (for a suitable ``c``).

    Returns a :class:`~emdtest.distributions.DiscreteDistribution` when the
    source yields points of a known domain, otherwise a
    :class:`SparseDistribution` over the source's labels.
    """
    if not t > 0:
        raise ConfigError("floor t must be positive")
    m = estimate_budget(n, eps, delta, t, c)
    rows, counts = src.draw_counts(m)
    if hasattr(src, "d") and hasattr(src, "delta"):
        return from_counts(rows, counts, src.d, src.delta)
    counts = np.asarray(counts, dtype=float)
    return SparseDistribution(np.asarray(rows), counts / counts.sum())


def l1_test_plugin(src_p, src_q, cfg: L1TesterConfig) -> TestVerdict:
    """Learn both distributions empirically and threshold their l1 distance at ``eps/2``.

    The floor of the underlying learner is ``t = eps / (4n)``; ties accept.
    """
    sources = {"p": src_p, "q": src_q}
    start = {k: s.draws_taken for k, s in sources.items()}
    m = plugin_budget(cfg.n, cfg.eps, cfg.delta, cfg.c)
    rp, wp = _empirical(src_p, m)
    rq, wq = _empirical(src_q, m)
    _, (ap, aq) = align([rp, rq], [wp, wq])
    stat = float(np.abs(ap - aq).sum())
    return TestVerdict(
        decide(stat > cfg.eps / 2),
        {**cfg.echo(), "floor_t": cfg.eps / (4 * cfg.n), "tester": "plugin"},
        _used(sources, start),
        {"l1_estimate": stat, "threshold": cfg.eps / 2},
    )


def _light_l2(X, Y, m: int) -> float:
    """Unbiased estimate of ``sum (p_i - q_i)^2`` from two count vectors of size ``m``."""
    if m < 2:
        return 0.0
    pairs = m * (m - 1)
    return float((X * (X - 1)).sum() / pairs + (Y * (Y - 1)).sum() / pairs - 2 * (X * Y).sum() / m ** 2)


def l1_test_collision(src_p, src_q, cfg: L1TesterConfig) -> TestVerdict:
    """Two-sample l1 closeness tester with ``~ n^(2/3)`` sample complexity.

    Half of the budget estimates every element; elements with empirical
    mass at least ``eps / (C n^(2/3))`` under either distribution are heavy
    and compared directly (reject when their l1 gap exceeds ``eps/4``). The
    other half runs a collision-based l2 test on the light elements (reject
    when the unbiased ``||p_L - q_L||_2^2`` estimate exceeds ``eps^2 / (8n)``).
    """
    sources = {"p": src_p, "q": src_q}
    start = {k: s.draws_taken for k, s in sources.items()}
    m = collision_budget(cfg.n, cfg.eps, cfg.delta, cfg.c)
    m_heavy = m // 2
    m_light = m - m_heavy
    tau = cfg.eps / (cfg.heavy_const * cfg.n ** (2 / 3))

    heavy_stat = 0.0
    heavy_keys = np.zeros((0, 1))
    if m_heavy > 0:
        rp, cp = src_p.draw_counts(m_heavy)
        rq, cq = src_q.draw_counts(m_heavy)
        keys, (xp, xq) = align([rp, rq], [cp, cq])
        ph, qh = xp / m_heavy, xq / m_heavy
        heavy = (ph >= tau) | (qh >= tau)
        heavy_stat = float(np.abs(ph - qh)[heavy].sum())
        heavy_keys = keys[heavy]

    rp, cp = src_p.draw_counts(m_light)
    rq, cq = src_q.draw_counts(m_light)
    _, (X, Y, H) = align([rp, rq, heavy_keys], [cp, cq, np.ones(len(heavy_keys))])
    light = H == 0
    l2 = _light_l2(X[light], Y[light], m_light)

    l2_threshold = cfg.eps ** 2 / (8 * cfg.n)
    reject = heavy_stat > cfg.eps / 4 or l2 > l2_threshold
    return TestVerdict(
        decide(reject),
        {**cfg.echo(), "tester": "collision"},
        _used(sources, start),
        {"heavy_threshold": tau, "n_heavy": int(len(heavy_keys)), "heavy_l1": heavy_stat,
         "heavy_limit": cfg.eps / 4, "light_l2": l2, "light_limit": l2_threshold},
    )


def l1_test_known(q_known, src_p, cfg: L1TesterConfig) -> TestVerdict:
    """Identity tester against an explicitly known ``q``.

    ``q_known`` is anything with ``support`` rows and ``weights`` (a
    distribution or a coarsening level). Elements with ``q_i > C / sqrt(n)``
    are compared directly; on the rest an unbiased collision estimate of
    ``||p_L - q_L||_2^2`` is thresholded at ``eps^2 / (8n)``. No draws are
    taken from ``q``.
    """
    start = src_p.draws_taken
    m = known_budget(cfg.n, cfg.eps, cfg.delta, cfg.c)
    rp, cp = src_p.draw_counts(m)
    _, (X, qw) = align([rp, q_known.support], [cp, q_known.weights])
    tau = cfg.heavy_const / math.sqrt(cfg.n)
    heavy = qw > tau
    heavy_stat = float(np.abs(X[heavy] / m - qw[heavy]).sum())
    XL, qL = X[~heavy], qw[~heavy]
    if m >= 2:
        l2 = float((XL * (XL - 1)).sum() / (m * (m - 1)) - 2 * (qL * XL).sum() / m + (qL ** 2).sum())
    else:
        l2 = 0.0
    l2_threshold = cfg.eps ** 2 / (8 * cfg.n)
    reject = heavy_stat > cfg.eps / 4 or l2 > l2_threshold
    return TestVerdict(
        decide(reject),
        {**cfg.echo(), "tester": "known"},
        {"p": src_p.draws_taken - start, "q": 0},
        {"heavy_threshold": tau, "n_heavy": int(heavy.sum()), "heavy_l1": heavy_stat,
         "heavy_limit": cfg.eps / 4, "light_l2": l2, "light_limit": l2_threshold},
    )
