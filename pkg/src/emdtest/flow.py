"""Exact earth mover's distance via min-cost flow.

The transportation problem between supplies ``a`` and demands ``b`` with cost
matrix ``C`` is solved by successive shortest augmenting paths with node
potentials (dense Dijkstra on the bipartite residual graph, plus a super
source and super sink). Weights are floats; feasibility is enforced to
``1e-9``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import ceil_log2
from .distributions import DiscreteDistribution, from_arrays, l1_distance, union_support
from .errors import DomainError, DomainMismatch, ParseError, SolverFailure

FEAS_TOL = 1e-9
_ZERO = 1e-15


@dataclass(frozen=True)
class FlowResult:
    """Optimal satisfying flow.

    ``flow[i, j]`` is the mass sent from supply point ``i`` to demand point
    ``j``; ``cost`` equals ``sum(flow * costs)``.
    """

    flow: np.ndarray
    cost: float
    supply: np.ndarray
    demand: np.ndarray
    costs: np.ndarray
    supply_points: np.ndarray | None = None
    demand_points: np.ndarray | None = None

    def residuals(self) -> float:
        rows = np.abs(self.flow.sum(axis=1) - self.supply).max(initial=0.0)
        cols = np.abs(self.flow.sum(axis=0) - self.demand).max(initial=0.0)
        return float(max(rows, cols))

    def moving_mass(self) -> float:
        """Total flow carried by edges of non-zero cost."""
        return float(self.flow[self.costs > 0].sum())


def l1_cost_matrix(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    return np.abs(xs[:, None, :] - ys[None, :, :]).sum(axis=2)


def min_cost_flow(supply, demand, costs) -> FlowResult:
    """Solve the transportation problem exactly.

    Parameters
    ----------
    supply, demand : array_like
        Non-negative masses with equal totals.
    costs : array_like, shape (len(supply), len(demand))
        Non-negative edge weights.
    """
    a = np.asarray(supply, dtype=float).copy()
    b = np.asarray(demand, dtype=float).copy()
    C = np.asarray(costs, dtype=float)
    na, nb = len(a), len(b)
    if C.shape != (na, nb):
        raise DomainMismatch(f"cost matrix has shape {C.shape}, expected {(na, nb)}")
    if np.any(a < 0) or np.any(b < 0) or np.any(C < 0) or not np.all(np.isfinite(C)):
        raise DomainError("supplies, demands and costs must be finite and non-negative")
    if abs(a.sum() - b.sum()) > FEAS_TOL:
        raise DomainMismatch(f"total supply {a.sum()!r} differs from total demand {b.sum()!r}")

    flow = np.zeros((na, nb))
    rem_a, rem_b = a.copy(), b.copy()
    pot = np.zeros(na + nb)
    pot_src = 0.0
    n = na + nb
    max_iter = 4 * (na + 1) * (nb + 1) + 16

    for _ in range(max_iter):
        active_s = rem_a > _ZERO
        active_t = rem_b > _ZERO
        if not active_s.any() or not active_t.any():
            break
        dist = np.full(n, np.inf)
        dist[:na][active_s] = np.maximum(pot_src - pot[:na][active_s], 0.0)
        parent = np.full(n, -1)
        done = np.zeros(n, dtype=bool)
        while True:
            cand = np.where(done, np.inf, dist)
            u = int(np.argmin(cand))
            if not np.isfinite(cand[u]):
                break
            done[u] = True
            if u < na:
                red = C[u] + pot[u] - pot[na:]
                nd = dist[u] + np.maximum(red, 0.0)
                upd = (~done[na:]) & (nd < dist[na:])
                dist[na:][upd] = nd[upd]
                parent[na:][upd] = u
            else:
                t = u - na
                back = flow[:, t] > _ZERO
                if back.any():
                    red = -C[:, t] + pot[u] - pot[:na]
                    nd = dist[u] + np.maximum(red, 0.0)
                    upd = back & (~done[:na]) & (nd < dist[:na])
                    dist[:na][upd] = nd[upd]
                    parent[:na][upd] = u
        tdist = np.where(active_t, dist[na:] + pot[na:], np.inf)
        t_star = int(np.argmin(tdist))
        if not np.isfinite(tdist[t_star]):
            raise SolverFailure("no augmenting path although demand remains")
        d_sink = dist[na + t_star]
        pot += np.minimum(dist, d_sink)

        # walk the path back to its source, collecting the bottleneck
        path = []
        v = na + t_star
        bottleneck = rem_b[t_star]
        while True:
            u = parent[v]
            if u == -1:
                break
            if v >= na:
                path.append((u, v - na, +1))
            else:
                path.append((v, u - na, -1))
                bottleneck = min(bottleneck, flow[v, u - na])
            v = u
        s0 = v
        bottleneck = min(bottleneck, rem_a[s0])
        for i, j, sign in path:
            flow[i, j] += sign * bottleneck
            if sign < 0 and flow[i, j] < _ZERO:
                flow[i, j] = 0.0
        rem_a[s0] -= bottleneck
        rem_b[t_star] -= bottleneck
        if rem_a[s0] < _ZERO:
            rem_a[s0] = 0.0
        if rem_b[t_star] < _ZERO:
            rem_b[t_star] = 0.0
    else:
        raise SolverFailure("augmentation limit reached")

    flow = saturate_zero_edges(flow, C, a, b)
    result = FlowResult(flow, float((flow * C).sum()), a, b, C)
    if result.residuals() > FEAS_TOL:
        raise SolverFailure(f"flow residual {result.residuals():.3e} exceeds tolerance")
    return result


def saturate_zero_edges(flow: np.ndarray, costs: np.ndarray, supply, demand) -> np.ndarray:
    """Reroute an optimal flow so every zero-cost edge carries ``min(supply, demand)``.

    Applies the exchange ``(x->y, z->x)`` to ``(x->x, z->y)`` until no
    zero-cost edge is under-saturated. Under the triangle inequality the
    exchange never raises the cost, so optimality is kept.
    """
    f = flow.copy()
    for i, j in zip(*np.nonzero(costs == 0)):
        target = min(supply[i], demand[j])
        while target - f[i, j] > _ZERO:
            pair = _exchange_pair(f, costs, i, j)
            if pair is None:
                break
            y, z = pair
            alpha = min(f[i, y], f[z, j], target - f[i, j])
            f[i, y] -= alpha
            f[z, j] -= alpha
            f[i, j] += alpha
            f[z, y] += alpha
    f[f < _ZERO] = 0.0
    return f


def _exchange_pair(f, costs, i, j):
    outs = np.nonzero(f[i] > _ZERO)[0]
    ins = np.nonzero(f[:, j] > _ZERO)[0]
    for y in outs[outs != j]:
        for z in ins[ins != i]:
            if costs[z, y] <= costs[i, y] + costs[z, j] + 1e-12:
                return y, z
    return None


def _check_pair(p: DiscreteDistribution, q: DiscreteDistribution) -> None:
    if not p.same_domain(q):
        raise DomainMismatch(f"(d={p.d}, delta={p.delta}) vs (d={q.d}, delta={q.delta})")


def optimal_flow(p: DiscreteDistribution, q: DiscreteDistribution) -> FlowResult:
    """Min-cost satisfying flow from ``p`` to ``q`` under the l1 metric.

    The returned flow saturates every zero-cost edge, so the mass moved
    across non-zero-cost edges is exactly ``l1_distance(p, q) / 2``.
    """
    _check_pair(p, q)
    res = min_cost_flow(p.weights, q.weights, l1_cost_matrix(p.points, q.points))
    return FlowResult(res.flow, res.cost, res.supply, res.demand, res.costs, p.points, q.points)


def emd_exact(p: DiscreteDistribution, q: DiscreteDistribution, metric="l1") -> float:
    """Exact EMD between two finite distributions.

    ``metric`` is ``"l1"`` (the ambient metric) or a callable mapping two
    coordinate arrays of shapes ``(k, d)`` and ``(m, d)`` to a ``(k, m)``
    distance matrix.
    """
    _check_pair(p, q)
    if metric == "l1":
        C = l1_cost_matrix(p.points, q.points)
    elif callable(metric):
        C = np.asarray(metric(p.points, q.points), dtype=float)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    return min_cost_flow(p.weights, q.weights, C).cost


def emd_matrix(dist, p, q) -> float:
    """Exact EMD for weights ``p``, ``q`` over points indexed by the square matrix ``dist``."""
    D = np.asarray(dist, dtype=float)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1] or len(p) != len(D) or len(q) != len(D):
        raise DomainMismatch("distance matrix must be square and match both weight vectors")
    sp, sq = p > 0, q > 0
    return min_cost_flow(p[sp], q[sq], D[np.ix_(sp, sq)]).cost


def matrix_instance_from_json(obj):
    """Parse ``{"dist": [[...]], "p": [...], "q": [...]}`` into arrays."""
    try:
        return (np.asarray(obj["dist"], dtype=float), np.asarray(obj["p"], dtype=float),
                np.asarray(obj["q"], dtype=float))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed distance-matrix instance: {exc}") from exc


def support_geometry(p: DiscreteDistribution, q: DiscreteDistribution):
    """Minimum pairwise and maximum pairwise l1 distance over the combined support."""
    keys, _, _ = union_support(p, q)
    if len(keys) < 2:
        return 0.0, 0.0
    D = l1_cost_matrix(keys, keys)
    off = ~np.eye(len(keys), dtype=bool)
    return float(D[off].min()), float(D.max())


def emd_bounds(p: DiscreteDistribution, q: DiscreteDistribution,
               min_dist: float | None = None, diameter: float | None = None):
    """``(l1/2 * min_dist, l1/2 * diameter)``, a sandwich around the exact EMD.

    When the two geometric parameters are omitted they are computed from the
    combined support.
    """
    if min_dist is None or diameter is None:
        lo, hi = support_geometry(p, q)
        min_dist = lo if min_dist is None else min_dist
        diameter = hi if diameter is None else diameter
    half = l1_distance(p, q) / 2.0
    return half * min_dist, half * diameter


@dataclass(frozen=True)
class EpsilonNet:
    """Grid net used to discretize points in ``[0, delta]^d``.

    The net is the set of cell centers of the level-``level`` dyadic grid,
    with ``level = ceil(log2(4 d delta / eps))``. Every cell has l1 diameter
    at most ``eps / 4``; snapping two distributions changes their EMD by at
    most ``perturbation_bound == eps / 2``.
    """

    d: int
    delta: float
    eps: float
    level: int

    @property
    def side(self) -> float:
        return self.delta / 2 ** self.level

    @property
    def perturbation_bound(self) -> float:
        return self.eps / 2

    def snap(self, points) -> np.ndarray:
        from .coarsening import cells_of

        pts = np.asarray(points, dtype=float).reshape(-1, self.d)
        cells = cells_of(pts, self.level, self.d, self.delta)
        return np.minimum((cells + 0.5) * self.side, self.delta)

    def snap_distribution(self, p: DiscreteDistribution) -> DiscreteDistribution:
        return from_arrays(self.snap(p.points), p.weights, p.d, p.delta, normalize=True)


def discretize_epsilon_net(d: int, delta: float, eps: float) -> EpsilonNet:
    if not eps > 0:
        raise DomainError("eps must be positive")
    level = ceil_log2(4 * d * delta / eps)
    return EpsilonNet(d, float(delta), float(eps), level)
