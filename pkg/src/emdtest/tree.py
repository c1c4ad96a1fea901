"""EMD over tree metrics.

For a tree with positive edge weights, ``EMD(p, q) = sum_e w(e) |p(T_e) - q(T_e)|``
where ``T_e`` is the side of edge ``e`` away from the root (node 0). The
sampling estimator plugs empirical subtree masses into the same sum.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ._util import ceil_budget, lg
from .distributions import DiscreteDistribution, from_arrays
from .errors import ConfigError, ParseError, SupportError
from .results import EstimateReport


@dataclass(frozen=True, eq=False)
class WeightedTree:
    """Tree on nodes ``0..n-1`` given by ``(u, v, w)`` edges.

    Construction checks connectivity, acyclicity and positive weights, and
    precomputes a BFS order from the root so every edge can be identified
    with its child endpoint.
    """

    n: int
    edges: tuple

    def __post_init__(self):
        n = self.n
        if n < 1:
            raise ConfigError("a tree needs at least one node")
        edges = tuple((int(u), int(v), float(w)) for u, v, w in self.edges)
        if len(edges) != n - 1:
            raise ConfigError(f"a tree on {n} nodes has {n - 1} edges, got {len(edges)}")
        adj = [[] for _ in range(n)]
        for idx, (u, v, w) in enumerate(edges):
            if not (0 <= u < n and 0 <= v < n) or u == v:
                raise ConfigError(f"bad edge ({u}, {v})")
            if not w > 0:
                raise ConfigError(f"edge ({u}, {v}) has non-positive weight {w}")
            adj[u].append((v, idx))
            adj[v].append((u, idx))
        parent = np.full(n, -1)
        parent_edge = np.full(n, -1)
        order = [0]
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for v, idx in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    parent[v] = u
                    parent_edge[v] = idx
                    order.append(v)
                    queue.append(v)
        if not seen.all():
            raise ConfigError("edges do not connect all nodes")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_parent", parent)
        object.__setattr__(self, "_parent_edge", parent_edge)
        object.__setattr__(self, "_order", np.array(order))
        object.__setattr__(self, "_adj", adj)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, _, w in self.edges])

    @property
    def max_weight(self) -> float:
        return float(self.weights.max()) if self.edges else 0.0

    def child_of_edge(self) -> np.ndarray:
        """For each edge index, the endpoint farther from the root."""
        child = np.empty(len(self.edges), dtype=int)
        for v in range(1, self.n):
            child[self._parent_edge[v]] = v
        return child

    def distance_matrix(self) -> np.ndarray:
        """All-pairs shortest-path distances (one BFS per node)."""
        D = np.zeros((self.n, self.n))
        for s in range(self.n):
            seen = np.zeros(self.n, dtype=bool)
            seen[s] = True
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for v, idx in self._adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        D[s, v] = D[s, u] + self.edges[idx][2]
                        queue.append(v)
        return D

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [{"u": u, "v": v, "w": w} for u, v, w in self.edges]}


def tree_from_json(obj) -> WeightedTree:
    """Parse ``{"n": int, "edges": [{"u": int, "v": int, "w": number}]}``."""
    try:
        return WeightedTree(int(obj["n"]), tuple((e["u"], e["v"], e["w"]) for e in obj["edges"]))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed tree object: {exc}") from exc


def path_tree(n: int, weight: float = 1.0) -> WeightedTree:
    return WeightedTree(n, tuple((i, i + 1, weight) for i in range(n - 1)))


def node_weights(tree: WeightedTree, dist) -> np.ndarray:
    """Node-mass vector of length ``n``.

    ``dist`` may be such a vector, a ``{node: mass}`` mapping, or a
    one-dimensional :class:`DiscreteDistribution` whose points are node ids.
    """
    if isinstance(dist, DiscreteDistribution):
        if dist.d != 1:
            raise SupportError("tree distributions must be one-dimensional node ids")
        ids = dist.points[:, 0]
        if np.any(ids != np.round(ids)) or np.any(ids < 0) or np.any(ids >= tree.n):
            raise SupportError("distribution puts mass off the tree's nodes")
        out = np.zeros(tree.n)
        np.add.at(out, ids.astype(int), dist.weights)
        return out
    if isinstance(dist, dict):
        out = np.zeros(tree.n)
        for node, w in dist.items():
            if not 0 <= int(node) < tree.n or int(node) != node:
                raise SupportError(f"node {node} is not in the tree")
            out[int(node)] += w
        return out
    arr = np.asarray(dist, dtype=float)
    if arr.shape != (tree.n,):
        raise SupportError(f"expected {tree.n} node masses, got shape {arr.shape}")
    if np.any(arr < 0):
        raise SupportError("node masses must be non-negative")
    return arr


def node_distribution(tree: WeightedTree, masses) -> DiscreteDistribution:
    """The node-mass vector as a 1-d distribution on node ids (for sampling)."""
    m = node_weights(tree, masses)
    return from_arrays(np.arange(tree.n, dtype=float)[:, None], m, 1, max(tree.n - 1, 1), normalize=True)


def subtree_masses(tree: WeightedTree, dist) -> np.ndarray:
    """Mass on the root-free side of every edge, indexed like ``tree.edges``."""
    acc = node_weights(tree, dist).copy()
    for v in tree._order[::-1]:
        if v != 0:
            acc[tree._parent[v]] += acc[v]
    return acc[tree.child_of_edge()] if tree.edges else np.zeros(0)


def tree_emd_exact(tree: WeightedTree, p, q) -> float:
    """Exact EMD under the tree metric by the weighted edge-cut formula."""
    diff = subtree_masses(tree, p) - subtree_masses(tree, q)
    return float((tree.weights * np.abs(diff)).sum())


def tree_estimate_budget(tree: WeightedTree, eps: float, delta: float, c: float = 1.0) -> int:
    """``ceil(c (W n / eps)^2 lg(n / delta))`` draws per source."""
    return ceil_budget(c * (tree.max_weight * tree.n / eps) ** 2 * lg(tree.n / delta))


def edge_precision(tree: WeightedTree, eps: float) -> np.ndarray:
    """Per-edge target accuracy ``eps / (2 w(e) (n - 1))`` for the subtree masses."""
    return eps / (2 * tree.weights * max(tree.n - 1, 1))


def tree_emd_estimate(src_p, src_q, tree: WeightedTree, eps: float, delta: float,
                      c: float = 1.0) -> EstimateReport:
    """Additive-``eps`` EMD estimate from samples of node ids.

    One batch per source estimates every subtree mass at once.
    """
    if not eps > 0 or not 0 < delta < 1:
        raise ConfigError("need eps > 0 and 0 < delta < 1")
    m = tree_estimate_budget(tree, eps, delta, c)
    start = {"p": src_p.draws_taken, "q": src_q.draws_taken}
    est = []
    for src in (src_p, src_q):
        rows, counts = src.draw_counts(m)
        est.append(node_weights(tree, _counts_on_nodes(tree, rows, counts) / m))
    sp, sq = subtree_masses(tree, est[0]), subtree_masses(tree, est[1])
    value = float((tree.weights * np.abs(sp - sq)).sum())
    return EstimateReport(
        estimate=value,
        eps=eps,
        samples_used={"p": src_p.draws_taken - start["p"], "q": src_q.draws_taken - start["q"]},
        seed=getattr(src_p, "seed", None),
        details={"delta": delta, "c": c, "subtree_p": sp.tolist(), "subtree_q": sq.tolist(),
                 "edge_precision": edge_precision(tree, eps).tolist()},
    )


def _counts_on_nodes(tree: WeightedTree, rows, counts) -> np.ndarray:
    ids = np.asarray(rows, dtype=float).reshape(-1)
    if np.any(ids != np.round(ids)) or np.any(ids < 0) or np.any(ids >= tree.n):
        raise SupportError("sample off the tree's nodes")
    out = np.zeros(tree.n)
    np.add.at(out, ids.astype(int), np.asarray(counts, dtype=float))
    return out


def hard_line_instance(n: int, eps: float):
    """Endpoint-biased pair on the unit path ``0 - 1 - ... - (n-1)`` with tree EMD exactly ``eps``.

    ``p`` puts ``1/2 + g`` on node 0 and ``1/2 - g`` on node ``n-1``; ``q``
    swaps them, with ``g = eps / (2 (n - 1))``. Returns node-mass vectors.
    """
    if n < 2:
        raise ConfigError("need at least two nodes")
    if not 0 <= eps <= n - 1:
        raise ConfigError(f"eps must lie in [0, {n - 1}]")
    g = eps / (2 * (n - 1))
    p = np.zeros(n)
    q = np.zeros(n)
    p[0], p[-1] = 0.5 + g, 0.5 - g
    q[0], q[-1] = 0.5 - g, 0.5 + g
    return p, q
