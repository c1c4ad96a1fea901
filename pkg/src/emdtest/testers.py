"""EMD closeness testers and the additive-error EMD estimator on ``[0, delta]^d``.

The testers run an l1 closeness test on the ``i``-coarsenings for
``i = 1..L`` with ``L = ceil(log2(2 delta d / eps))``, per-level distance
parameter ``eps 2^(i-2) / (delta d L)`` and failure probability ``1 / (3L)``,
and reject when any level rejects. Every level draws fresh samples and all
levels always run, so the sample count is a fixed function of the config.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .coarsening import cells_of, coarsen, num_levels
from .distributions import DiscreteDistribution, from_counts
from .errors import ConfigError
from .flow import emd_exact
from .l1 import (L1TesterConfig, collision_budget, known_budget, l1_test_collision,
                 l1_test_known, l1_test_plugin, plugin_budget)
from .results import Decision, EstimateReport, TestVerdict, decide
from .sources import MappedSource
from ._util import ceil_budget


class Strategy(str, Enum):
    PLUGIN = "plugin"
    COLLISION = "collision"
    AUTO = "auto"


@dataclass(frozen=True)
class EmdTestConfig:
    d: int
    delta: float
    eps: float
    strategy: Strategy = Strategy.AUTO
    c: float = 1.0
    heavy_const: float = 1.0

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ConfigError("dimension must be a positive integer")
        if not self.delta > 0:
            raise ConfigError("delta must be positive")
        if not self.eps > 0:
            raise ConfigError("eps must be positive")
        if not self.c > 0:
            raise ConfigError("c must be positive")
        object.__setattr__(self, "strategy", Strategy(self.strategy))

    def echo(self) -> dict:
        return {"d": self.d, "delta": self.delta, "eps": self.eps,
                "strategy": self.strategy.value, "c": self.c}


@dataclass(frozen=True)
class Level:
    i: int
    n: int
    eps: float
    delta: float


def level_schedule(d: int, delta: float, eps: float) -> list[Level]:
    """Per-level ``(i, n_i, eps_i, delta_i)`` for the closeness testers."""
    L = num_levels(d, delta, eps)
    return [Level(i, 2 ** (d * i), eps * 2.0 ** (i - 2) / (delta * d * L), 1 / (3 * L))
            for i in range(1, L + 1)]


def choose_l1_subroutine(d: int, n: int, eps: float, delta: float = 1 / 3) -> Strategy:
    """Pick the cheaper l1 tester for one level.

    Dimensions up to 2 always use the plug-in tester and dimensions from 6
    on the collision tester; in between the smaller budget wins (plug-in on
    ties).
    """
    if d <= 2:
        return Strategy.PLUGIN
    if d >= 6:
        return Strategy.COLLISION
    if plugin_budget(n, eps, delta) <= collision_budget(n, eps, delta):
        return Strategy.PLUGIN
    return Strategy.COLLISION


def _resolve(cfg: EmdTestConfig, lv: Level) -> Strategy:
    if cfg.strategy is Strategy.AUTO:
        return choose_l1_subroutine(cfg.d, lv.n, lv.eps, lv.delta)
    return cfg.strategy


def closeness_budget(cfg: EmdTestConfig) -> int:
    """Draws taken from each source by :func:`emd_closeness_test`."""
    total = 0
    for lv in level_schedule(cfg.d, cfg.delta, cfg.eps):
        fn = plugin_budget if _resolve(cfg, lv) is Strategy.PLUGIN else collision_budget
        total += fn(lv.n, lv.eps, lv.delta, cfg.c)
    return total


def known_closeness_budget(cfg: EmdTestConfig) -> int:
    """Draws taken from ``p`` by :func:`emd_closeness_test_known`."""
    return sum(known_budget(lv.n, lv.eps, lv.delta, cfg.c)
               for lv in level_schedule(cfg.d, cfg.delta, cfg.eps))


def _coarsened(src, level: int, d: int, delta: float) -> MappedSource:
    return MappedSource(src, lambda pts: cells_of(pts, level, d, delta))


def _level_cfg(cfg: EmdTestConfig, lv: Level) -> L1TesterConfig:
    return L1TesterConfig(lv.n, lv.eps, lv.delta, cfg.c, cfg.heavy_const)


def emd_closeness_test(src_p, src_q, cfg: EmdTestConfig) -> TestVerdict:
    """Test ``p == q`` against ``EMD(p, q) > eps`` from samples of both.

    When ``eps >= 2 delta d`` there are no levels and the test accepts
    without drawing: no pair on ``[0, delta]^d`` has EMD above ``d delta``.
    """
    start = {"p": src_p.draws_taken, "q": src_q.draws_taken}
    levels = []
    for lv in level_schedule(cfg.d, cfg.delta, cfg.eps):
        strategy = _resolve(cfg, lv)
        tester = l1_test_plugin if strategy is Strategy.PLUGIN else l1_test_collision
        v = tester(_coarsened(src_p, lv.i, cfg.d, cfg.delta),
                   _coarsened(src_q, lv.i, cfg.d, cfg.delta), _level_cfg(cfg, lv))
        levels.append({"level": lv.i, "n": lv.n, "eps": lv.eps, "delta": lv.delta,
                       "tester": strategy.value, "decision": v.decision.value,
                       "samples": v.samples_used, "stats": v.details})
    reject = any(lv["decision"] == Decision.REJECT.value for lv in levels)
    return TestVerdict(
        decide(reject),
        cfg.echo(),
        {"p": src_p.draws_taken - start["p"], "q": src_q.draws_taken - start["q"]},
        {"levels": levels},
    )


def emd_closeness_test_known(q_explicit: DiscreteDistribution, src_p, cfg: EmdTestConfig) -> TestVerdict:
    """Closeness test when ``q`` is known exactly; only ``p`` is sampled."""
    start = src_p.draws_taken
    levels = []
    for lv in level_schedule(cfg.d, cfg.delta, cfg.eps):
        v = l1_test_known(coarsen(q_explicit, lv.i), _coarsened(src_p, lv.i, cfg.d, cfg.delta),
                          _level_cfg(cfg, lv))
        levels.append({"level": lv.i, "n": lv.n, "eps": lv.eps, "delta": lv.delta,
                       "tester": "known", "decision": v.decision.value,
                       "samples": v.samples_used, "stats": v.details})
    reject = any(lv["decision"] == Decision.REJECT.value for lv in levels)
    return TestVerdict(
        decide(reject),
        cfg.echo(),
        {"p": src_p.draws_taken - start, "q": 0},
        {"levels": levels},
    )


def estimate_grid_side(d: int, eps: float) -> float:
    return eps / (4 * d)


def estimate_budget(cfg: EmdTestConfig) -> int:
    """Draws per source for :func:`emd_estimate`: ``ceil(c (4 d delta / eps)^(d+2))``."""
    return ceil_budget(cfg.c * (4 * cfg.d * cfg.delta / cfg.eps) ** (cfg.d + 2))


def snap_to_grid(points: np.ndarray, side: float, delta: float) -> np.ndarray:
    """Map points to the center of their cell in the grid of the given side.

    The last cell on each axis may be cut short by ``delta``; its center is
    the midpoint of the shortened cell.
    """
    pts = np.asarray(points, dtype=float)
    per_axis = math.ceil(delta / side - 1e-9)
    k = np.minimum(np.floor(pts / side), per_axis - 1)
    lo = k * side
    hi = np.minimum(lo + side, delta)
    return (lo + hi) / 2


def emd_estimate(src_p, src_q, cfg: EmdTestConfig) -> EstimateReport:
    """Additive-``eps`` estimate of ``EMD(p, q)``.

    Draws are snapped to the centers of a grid of side ``eps / (4d)``; the
    result is the exact EMD between the two empirical distributions on the
    centers (computed on their occupied cells only).
    """
    if not cfg.eps < 4 * cfg.d * cfg.delta:
        raise ConfigError("eps must be below 4 d delta for the estimator grid to have a cell")
    side = estimate_grid_side(cfg.d, cfg.eps)
    m = estimate_budget(cfg)
    start = {"p": src_p.draws_taken, "q": src_q.draws_taken}
    snapped = []
    for src in (src_p, src_q):
        rows, counts = src.draw_counts(m)
        snapped.append(from_counts(snap_to_grid(rows, side, cfg.delta), counts, cfg.d, cfg.delta))
    estimate = emd_exact(*snapped)
    return EstimateReport(
        estimate=estimate,
        eps=cfg.eps,
        samples_used={"p": src_p.draws_taken - start["p"], "q": src_q.draws_taken - start["q"]},
        grid_side=side,
        seed=getattr(src_p, "seed", None),
        details={"support_p": len(snapped[0]), "support_q": len(snapped[1]), "c": cfg.c},
    )
