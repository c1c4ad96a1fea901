"""Instance generators, including the adversarial lower-bound constructions.

Every generator is deterministic given its arguments (and ``seed`` where it
takes one) and returns explicit distributions, so an exact EMD oracle is
always available for the instance.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .distributions import DiscreteDistribution, from_arrays, new_distribution
from .errors import ParamError
from .sources import make_rng


def gen_hard_pair_1d(delta: float, eps: float):
    """Endpoint pair on ``{0, delta}``: ``(1/2, 1/2)`` against ``(1/2 + eps/delta, 1/2 - eps/delta)``.

    The EMD of the pair is exactly ``eps``.
    """
    if not delta > 0 or not 0 <= eps <= delta / 2:
        raise ParamError(f"need 0 <= eps <= delta/2, got eps={eps}, delta={delta}")
    shift = eps / delta
    p = new_distribution([(0.0, 0.5), (delta, 0.5)], 1, delta)
    if shift == 0.5:
        q = new_distribution([(0.0, 1.0)], 1, delta)
    else:
        q = new_distribution([(0.0, 0.5 + shift), (delta, 0.5 - shift)], 1, delta)
    return p, q


def lattice_points(n: int, d: int, delta: float) -> np.ndarray:
    """First ``n`` lattice points (lexicographic) of the grid with side ``delta n^(-1/d)``."""
    side = delta * n ** (-1 / d)
    per_axis = int(math.floor(n ** (1 / d) + 1e-9)) + 1
    if per_axis ** d < n:
        raise ParamError(f"{n} points do not fit on a {per_axis}^{d} lattice")
    pts = []
    for idx in itertools.product(range(per_axis), repeat=d):
        pts.append(idx)
        if len(pts) == n:
            break
    return np.minimum(np.asarray(pts, dtype=float) * side, delta)


def gen_grid_injection(p_abstract, q_abstract, n: int, d: int, delta: float):
    """Embed two distributions over ``{0..n-1}`` into the grid of side ``delta n^(-1/d)``.

    Element ``j`` goes to the ``j``-th lattice point in lexicographic order,
    so l1 distances are preserved and distinct images are at least one side
    apart.
    """
    p = np.asarray(p_abstract, dtype=float)
    q = np.asarray(q_abstract, dtype=float)
    if p.shape != (n,) or q.shape != (n,):
        raise ParamError(f"abstract distributions must have length n={n}")
    pts = lattice_points(n, d, delta)
    return (from_arrays(pts, p, d, delta, normalize=True),
            from_arrays(pts, q, d, delta, normalize=True))


def injection_side(n: int, d: int, delta: float) -> float:
    return delta * n ** (-1 / d)


def cluster_centers(k: int, b: float, d: int, delta: float) -> np.ndarray:
    """``k`` well-spread centers in ``[b/2, delta - b/2]^d``.

    Candidates form a lattice with ``ceil(k^(1/d))`` points per axis; centers
    are picked farthest-first from the origin corner (ties to the lowest
    lattice index). Raises :class:`ParamError` unless all pairwise l1
    distances exceed ``4b``.
    """
    if k < 1 or b < 0 or not delta > 0:
        raise ParamError("need k >= 1, b >= 0, delta > 0")
    lo, hi = b / 2, delta - b / 2
    if hi < lo:
        raise ParamError("clusters of this diameter do not fit in the domain")
    g = max(2, math.ceil(k ** (1 / d) - 1e-9)) if k > 1 else 1
    axis = np.linspace(lo, hi, g) if g > 1 else np.array([lo])
    cand = np.array(list(itertools.product(axis, repeat=d)))
    chosen = [0]
    mind = np.abs(cand - cand[0]).sum(axis=1)
    while len(chosen) < k:
        nxt = int(np.argmax(mind))
        if mind[nxt] == 0:
            raise ParamError(f"cannot place {k} distinct centers")
        chosen.append(nxt)
        mind = np.minimum(mind, np.abs(cand - cand[nxt]).sum(axis=1))
    centers = cand[chosen]
    if k > 1:
        D = np.abs(centers[:, None] - centers[None]).sum(axis=2)
        if D[~np.eye(k, dtype=bool)].min() <= 4 * b:
            raise ParamError(f"centers of {k} clusters are not more than 4b={4 * b} apart")
    return centers


def _satellites(center: np.ndarray, b: float, delta: float) -> np.ndarray:
    d = len(center)
    pts = [center]
    if b > 0:
        for j in range(d):
            for s in (-1, 1):
                x = center.copy()
                x[j] = min(max(x[j] + s * b / 2, 0.0), delta)
                pts.append(x)
    return np.unique(np.array(pts), axis=0)


def gen_clustered(k: int, b: float, d: int, delta: float, imbalance: float = 0.0):
    """Planted ``(k, b)``-clusterable pair.

    Each cluster is its center plus the ``2d`` points at l1 distance ``b/2``
    along the axes (so its diameter is ``b``). ``p`` gives every cluster mass
    ``1/k``; ``q`` moves ``imbalance`` from cluster 0 to cluster 1 (the
    farthest one). Returns ``(p, q, centers)``.
    """
    if not 0 <= imbalance <= 1 / k:
        raise ParamError(f"imbalance must lie in [0, 1/k], got {imbalance}")
    centers = cluster_centers(k, b, d, delta)
    if k == 1 and imbalance > 0:
        raise ParamError("a single cluster cannot be imbalanced")
    clusters = [_satellites(c, b, delta) for c in centers]
    pts = np.concatenate(clusters)
    owner = np.concatenate([np.full(len(c), j) for j, c in enumerate(clusters)])
    sizes = np.array([len(c) for c in clusters], dtype=float)
    mass_p = np.full(k, 1 / k)
    mass_q = mass_p.copy()
    if k > 1:
        mass_q[0] -= imbalance
        mass_q[1] += imbalance
    wp = mass_p[owner] / sizes[owner]
    wq = mass_q[owner] / sizes[owner]
    p = from_arrays(pts, wp, d, delta, normalize=True)
    q = p if imbalance == 0 else from_arrays(pts, wq, d, delta, normalize=True)
    return p, q, centers


def gen_far_from_clusterable(k: int, b: float, d: int, delta: float) -> DiscreteDistribution:
    """Uniform distribution on ``k + 1`` points pairwise more than ``2b`` apart."""
    pts = cluster_centers(k + 1, b / 2, d, delta)
    D = np.abs(pts[:, None] - pts[None]).sum(axis=2)
    if D[~np.eye(k + 1, dtype=bool)].min() <= 2 * b:
        raise ParamError("points cannot be spread more than 2b apart")
    return from_arrays(pts, np.full(k + 1, 1 / (k + 1)), d, delta, normalize=True)


def gen_random(n_points: int, d: int, delta: float, seed: int = 0) -> DiscreteDistribution:
    rng = make_rng(seed)
    pts = rng.random((n_points, d)) * delta
    return from_arrays(pts, rng.random(n_points) + 0.05, d, delta, normalize=True)


def gen_uniform_grid(per_axis: int, d: int, delta: float) -> DiscreteDistribution:
    axis = (np.arange(per_axis) + 0.5) * delta / per_axis
    pts = np.array(list(itertools.product(axis, repeat=d)))
    return from_arrays(pts, np.ones(len(pts)), d, delta, normalize=True)


def gen_point_mass(d: int, delta: float, where: float = 0.5) -> DiscreteDistribution:
    return new_distribution([(tuple([where * delta] * d), 1.0)], d, delta)


def gen_shifted(p: DiscreteDistribution, shift: float) -> DiscreteDistribution:
    """``p`` translated by ``shift`` along every axis, clipped to the domain."""
    return from_arrays(np.clip(p.points + shift, 0, p.delta), p.weights, p.d, p.delta, normalize=True)
