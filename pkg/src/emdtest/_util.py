import math

import numpy as np


def lg(x: float) -> float:
    """Natural log floored at one, used for every log factor in a sample budget."""
    return max(1.0, math.log(x))


def ceil_budget(value: float) -> int:
    # guard against 12.000000000000002 -> 13
    r = round(value)
    if abs(value - r) <= 1e-9 * max(1.0, abs(value)):
        return int(r)
    return int(math.ceil(value))


def align(rows_list, weights_list):
    """Put several sparse (rows, weights) pairs onto their common support.

    Returns ``(keys, stacked)`` where ``keys`` are the distinct rows and
    ``stacked[j]`` holds the weights of input ``j`` on ``keys`` (zero where absent).
    """
    rows_list = [_rows2d(r) for r in rows_list]
    widths = {r.shape[1] for r in rows_list if len(r)}
    if len(widths) > 1:
        raise ValueError("rows of different widths cannot be aligned")
    width = widths.pop() if widths else 1
    rows_list = [r if len(r) else np.zeros((0, width)) for r in rows_list]
    allrows = np.concatenate(rows_list, axis=0)
    if len(allrows) == 0:
        return np.zeros((0, width)), np.zeros((len(rows_list), 0))
    keys, inverse = np.unique(allrows, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    stacked = np.zeros((len(rows_list), len(keys)))
    start = 0
    for j, (rows, w) in enumerate(zip(rows_list, weights_list)):
        stop = start + len(rows)
        np.add.at(stacked[j], inverse[start:stop], np.asarray(w, dtype=float))
        start = stop
    return keys, stacked


def _rows2d(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.ndim == 2:
        return r
    if r.size == 0:
        return np.zeros((0, 1))
    return r.reshape(len(r), -1)


def group_rows(rows, counts):
    """Sum ``counts`` over identical rows."""
    keys, stacked = align([rows], [counts])
    return keys, stacked[0]


def ceil_log2(x: float) -> int:
    """Smallest integer ``L >= 0`` with ``2**L >= x`` (tolerant to float noise)."""
    if x <= 1:
        return 0
    L = math.ceil(math.log2(x))
    if L > 0 and 2.0 ** (L - 1) >= x * (1 - 1e-12):
        L -= 1
    return L
