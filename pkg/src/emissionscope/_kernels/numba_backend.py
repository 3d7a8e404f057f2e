"""Numba-compiled kernels (default backend).

Loops round exactly like the numpy fallback: left-to-right accumulation
over the same presorted row lists.  ``nogil`` lets forest workers overlap
when trees are fitted from threads.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def best_split(X, y_c, S, feat_ids, min_leaf, tie_eps):
    m = S.shape[1]
    best_feat = -1
    best_pos = -1
    best_score = np.inf
    if m < 2:
        return best_feat, best_pos, 0.0, best_score
    cs = np.empty(m, dtype=np.float64)
    cs2 = np.empty(m, dtype=np.float64)
    for fi in range(feat_ids.shape[0]):
        f = feat_ids[fi]
        acc = 0.0
        acc2 = 0.0
        for i in range(m):
            yi = y_c[S[f, i]]
            acc += yi
            acc2 += yi * yi
            cs[i] = acc
            cs2[i] = acc2
        tot = cs[m - 1]
        tot2 = cs2[m - 1]
        # exact first-of-minimum within the feature
        local_pos = -1
        local_score = np.inf
        for i in range(m - 1):
            if X[S[f, i + 1], f] <= X[S[f, i], f]:
                continue
            nl = np.float64(i + 1)
            nr = np.float64(m) - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            ls = cs[i]
            ls2 = cs2[i]
            rs = tot - ls
            rs2 = tot2 - ls2
            sl = ls2 - ls * ls / nl
            if sl < 0.0:
                sl = 0.0
            sr = rs2 - rs * rs / nr
            if sr < 0.0:
                sr = 0.0
            score = sl + sr
            if score < local_score:
                local_score = score
                local_pos = i
        # a later feature replaces the incumbent only by a clear margin,
        # so rounding-level ties resolve to the lower feature id
        if local_pos >= 0 and local_score < best_score - tie_eps:
            best_feat = f
            best_pos = local_pos
            best_score = local_score
    if best_feat < 0:
        return best_feat, best_pos, 0.0, best_score
    lo = X[S[best_feat, best_pos], best_feat]
    hi = X[S[best_feat, best_pos + 1], best_feat]
    thr = 0.5 * (lo + hi)
    if thr <= lo:
        thr = hi
    return best_feat, best_pos, thr, best_score


@njit(cache=True, nogil=True)
def tree_route(feature, threshold, left, right, X):
    n = X.shape[0]
    node = np.zeros(n, dtype=np.int64)
    for r in range(n):
        nd = 0
        while feature[nd] >= 0:
            if X[r, feature[nd]] < threshold[nd]:
                nd = left[nd]
            else:
                nd = right[nd]
        node[r] = nd
    return node
