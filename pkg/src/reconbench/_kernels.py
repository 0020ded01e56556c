"""Compiled inner loops for classifier training (numba, cached on disk)."""
from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True)
def pegasos_ovr(xb, signs, order, lam):
    """One-vs-rest Pegasos: per-sample sub-gradient steps with step 1/(lam t).

    ``xb`` is N x F (bias column included), ``signs`` N x C in {-1, +1},
    ``order`` epochs x N sample visiting order. Returns the final F x C weights.
    The iterate is stored as ``scale * v`` so the shrink step is O(1).
    """
    n, f = xb.shape
    n_classes = signs.shape[1]
    v = np.zeros((f, n_classes))
    scale = 1.0
    t = 0
    for ep in range(order.shape[0]):
        for ii in range(n):
            i = order[ep, ii]
            t += 1
            x = xb[i]
            scores = (x @ v) * scale
            if t == 1:
                v[:, :] = 0.0
                scale = 1.0
            else:
                scale *= 1.0 - 1.0 / t
            step = 1.0 / (lam * t * scale)
            for c in range(n_classes):
                if signs[i, c] * scores[c] < 1.0:
                    g = step * signs[i, c]
                    for j in range(f):
                        v[j, c] += g * x[j]
            if scale < 1e-8:
                v *= scale
                scale = 1.0
    return v * scale


@numba.njit(cache=True)
def best_gini_split(xs, idx, ys, features, n_classes):
    """Best CART split of rows ``idx`` over ``features`` by weighted Gini impurity.

    Returns ``(feature, threshold)``; feature is -1 when every candidate
    feature is constant on these rows. Ties keep the first candidate in
    ``features`` order, then the smallest threshold.
    """
    n = idx.shape[0]
    total = np.zeros(n_classes)
    for p in range(n):
        total[ys[idx[p]]] += 1.0
    total_sq = 0.0
    for c in range(n_classes):
        total_sq += total[c] * total[c]

    best_score = -1.0
    best_feature = -1
    best_threshold = 0.0
    vals = np.empty(n)
    left = np.empty(n_classes)
    right = np.empty(n_classes)
    for fi in range(features.shape[0]):
        f = features[fi]
        for p in range(n):
            vals[p] = xs[idx[p], f]
        order = np.argsort(vals, kind="mergesort")
        left[:] = 0.0
        right[:] = total
        sl = 0.0
        sr = total_sq
        for p in range(n - 1):
            c = ys[idx[order[p]]]
            sl += 2.0 * left[c] + 1.0
            left[c] += 1.0
            sr += 1.0 - 2.0 * right[c]
            right[c] -= 1.0
            lo = vals[order[p]]
            hi = vals[order[p + 1]]
            if lo < hi:
                # maximizing this minimizes the weighted Gini impurity
                score = sl / (p + 1) + sr / (n - p - 1)
                if score > best_score:
                    best_score = score
                    best_feature = f
                    thr = 0.5 * (lo + hi)
                    best_threshold = thr if thr < hi else lo
    return best_feature, best_threshold
