"""Pure-numpy kernel fallback.

Mirrors the numba backend operation for operation: prefix sums are
sequential (np.cumsum) and candidate scores use the same expressions, so
both backends round identically.
"""

from __future__ import annotations

import numpy as np


def best_split(X, y_c, S, feat_ids, min_leaf, tie_eps):
    """SSE-minimizing split over presorted per-feature row lists.

    ``S[f]`` holds the node's rows stable-sorted by feature ``f``; ``y_c``
    carries the node's centered targets at those row positions.  Candidate
    thresholds sit between consecutive distinct sorted values; children
    smaller than ``min_leaf`` are skipped.  Within a feature the first
    exact minimum wins; across features a later feature must improve by
    more than ``tie_eps`` so rounding-level ties keep the lower feature id.
    Returns ``(feat, pos, threshold, score)`` where rows ``S[feat, :pos+1]``
    go left; ``feat == -1`` means no valid candidate.
    """
    m = S.shape[1]
    best_feat = -1
    best_pos = -1
    best_score = np.inf
    if m < 2:
        return best_feat, best_pos, 0.0, best_score
    for f in feat_ids:
        rows = S[f]
        xs = X[rows, f]
        ys = y_c[rows]
        cs = np.cumsum(ys)
        cs2 = np.cumsum(ys * ys)
        tot = cs[m - 1]
        tot2 = cs2[m - 1]

        nl = np.arange(1, m, dtype=np.float64)
        nr = np.float64(m) - nl
        valid = xs[1:] > xs[:-1]
        valid &= (nl >= min_leaf) & (nr >= min_leaf)
        if not valid.any():
            continue
        ls = cs[:-1]
        ls2 = cs2[:-1]
        rs = tot - ls
        rs2 = tot2 - ls2
        sl = np.maximum(ls2 - ls * ls / nl, 0.0)
        sr = np.maximum(rs2 - rs * rs / nr, 0.0)
        scores = sl + sr
        scores[~valid] = np.inf
        i = int(np.argmin(scores))
        if scores[i] < best_score - tie_eps:
            best_feat = int(f)
            best_pos = i
            best_score = float(scores[i])
    if best_feat < 0:
        return best_feat, best_pos, 0.0, best_score
    xs = X[S[best_feat], best_feat]
    lo = xs[best_pos]
    hi = xs[best_pos + 1]
    thr = 0.5 * (lo + hi)
    if thr <= lo:
        thr = float(hi)
    return best_feat, best_pos, float(thr), best_score


def tree_route(feature, threshold, left, right, X):
    """Route every row of X to its leaf; returns leaf node indices.

    Rows go left when the split feature is strictly below the threshold.
    """
    n = X.shape[0]
    node = np.zeros(n, dtype=np.int64)
    active = feature[node] >= 0
    while active.any():
        idx = np.nonzero(active)[0]
        nd = node[idx]
        f = feature[nd]
        go_left = X[idx, f] < threshold[nd]
        node[idx] = np.where(go_left, left[nd], right[nd])
        active = feature[node] >= 0
    return node
