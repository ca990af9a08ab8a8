"""CART classification trees (Gini) and weighted least-squares regression stumps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit


@dataclass
class Tree:
    """Flat node arrays; ``feature == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray  # (n_nodes, n_classes) training class counts

    def to_document(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "counts": self.counts.tolist(),
        }

    @classmethod
    def from_document(cls, doc: dict) -> Tree:
        n_classes = len(doc["counts"][0]) if doc["counts"] else 0
        return cls(
            np.asarray(doc["feature"], dtype=np.int64),
            np.asarray(doc["threshold"], dtype=np.float64),
            np.asarray(doc["left"], dtype=np.int64),
            np.asarray(doc["right"], dtype=np.int64),
            np.asarray(doc["counts"], dtype=np.float64).reshape(-1, n_classes),
        )


@njit(cache=True, nogil=True)
def _grow(X, y, rows, n_classes, m_try, min_leaf, seed):
    np.random.seed(seed)
    n_features = X.shape[1]
    cap = 2 * rows.shape[0] + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    counts = np.zeros((cap, n_classes), dtype=np.float64)
    gain = np.zeros(n_features, dtype=np.float64)

    idx = rows.copy()
    stack_node = np.empty(cap, dtype=np.int64)
    stack_lo = np.empty(cap, dtype=np.int64)
    stack_hi = np.empty(cap, dtype=np.int64)
    stack_node[0] = 0
    stack_lo[0] = 0
    stack_hi[0] = idx.shape[0]
    top = 1
    n_nodes = 1

    xs = np.empty(idx.shape[0], dtype=np.float64)
    cl = np.zeros(n_classes, dtype=np.float64)

    while top > 0:
        top -= 1
        node = stack_node[top]
        lo = stack_lo[top]
        hi = stack_hi[top]
        n = hi - lo
        for i in range(lo, hi):
            counts[node, y[idx[i]]] += 1.0
        tot = counts[node]
        n_pure = 0
        for c in range(n_classes):
            if tot[c] > 0:
                n_pure += 1
        if n_pure <= 1 or n < 2 * min_leaf:
            continue

        parent_score = 0.0
        for c in range(n_classes):
            parent_score += tot[c] * tot[c]
        parent_score /= n

        best_score = -1.0
        best_f = -1
        best_t = 0.0
        order = np.random.permutation(n_features)
        tried = 0
        for fi in range(n_features):
            if tried == m_try:
                break
            f = order[fi]
            lo_v = np.inf
            hi_v = -np.inf
            for i in range(n):
                v = X[idx[lo + i], f]
                xs[i] = v
                lo_v = min(lo_v, v)
                hi_v = max(hi_v, v)
            # features constant within the node do not use up the m_try budget
            if lo_v == hi_v:
                continue
            tried += 1
            srt = np.argsort(xs[:n], kind="mergesort")
            for c in range(n_classes):
                cl[c] = 0.0
            for s in range(n - 1):
                r = idx[lo + srt[s]]
                cl[y[r]] += 1.0
                n_l = s + 1
                n_r = n - n_l
                a = xs[srt[s]]
                b = xs[srt[s + 1]]
                if a == b or n_l < min_leaf or n_r < min_leaf:
                    continue
                sl = 0.0
                sr = 0.0
                for c in range(n_classes):
                    sl += cl[c] * cl[c]
                    rc = tot[c] - cl[c]
                    sr += rc * rc
                score = sl / n_l + sr / n_r
                if score > best_score + 1e-12:
                    best_score = score
                    best_f = f
                    best_t = 0.5 * (a + b)
                    if best_t == b:  # midpoint rounded up onto b
                        best_t = a
        if best_f < 0 or best_score <= parent_score + 1e-12:
            continue

        # partition idx[lo:hi] by x <= threshold
        i = lo
        j = hi - 1
        while i <= j:
            if X[idx[i], best_f] <= best_t:
                i += 1
            else:
                t = idx[i]
                idx[i] = idx[j]
                idx[j] = t
                j -= 1
        mid = i
        # weighted Gini decrease: n * (gini_parent) - n_l * gini_l - n_r * gini_r
        gain[best_f] += best_score - parent_score
        feature[node] = best_f
        threshold[node] = best_t
        left[node] = n_nodes
        right[node] = n_nodes + 1
        stack_node[top] = n_nodes
        stack_lo[top] = lo
        stack_hi[top] = mid
        top += 1
        stack_node[top] = n_nodes + 1
        stack_lo[top] = mid
        stack_hi[top] = hi
        top += 1
        n_nodes += 2

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), counts[:n_nodes].copy(), gain)


def grow_tree(X, y, rows, n_classes, m_try, min_leaf, seed) -> tuple[Tree, np.ndarray]:
    """Grow one tree on ``X[rows]`` sampling ``m_try`` features per node.

    Returns the tree and its per-feature Gini decrease (counts-weighted).
    """
    f, t, lft, rgt, counts, gain = _grow(
        np.ascontiguousarray(X, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.int64),
        np.ascontiguousarray(rows, dtype=np.int64),
        int(n_classes), int(m_try), int(min_leaf), int(seed),
    )
    return Tree(f, t, lft, rgt, counts), gain


@njit(cache=True, nogil=True)
def _leaves(feature, threshold, left, right, X):
    out = np.empty(X.shape[0], dtype=np.int64)
    for i in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


def tree_votes(tree: Tree, X: np.ndarray) -> np.ndarray:
    """Majority class of the reached leaf for each row (ties -> lowest index)."""
    leaves = _leaves(tree.feature, tree.threshold, tree.left, tree.right,
                     np.ascontiguousarray(X, dtype=np.float64))
    return np.argmax(tree.counts[leaves], axis=1)


# --- regression stumps ----------------------------------------------------


@dataclass
class Stump:
    feature: int
    threshold: float
    left_value: float
    right_value: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        if self.feature < 0:
            return np.full(X.shape[0], self.left_value)
        return np.where(X[:, self.feature] <= self.threshold, self.left_value, self.right_value)


class StumpFitter:
    """Fits weighted least-squares stumps on a fixed design matrix.

    Feature orderings are computed once and reused across boosting rounds.
    """

    def __init__(self, X: np.ndarray):
        self.X = np.asarray(X, dtype=float)
        n, p = self.X.shape
        self.order = np.argsort(self.X, axis=0, kind="mergesort")
        xs = np.take_along_axis(self.X, self.order, axis=0)
        self.xs = xs
        # a split after sorted position s is valid when the next value differs
        self.valid = xs[:-1] < xs[1:] if n > 1 else np.zeros((0, p), dtype=bool)

    def fit(self, z: np.ndarray, w: np.ndarray) -> Stump:
        total_w = w.sum()
        total_wz = (w * z).sum()
        const = total_wz / total_w if total_w > 0 else 0.0
        if self.X.shape[0] < 2 or not self.valid.any():
            return Stump(-1, 0.0, const, const)
        ws = w[self.order]
        wzs = (w * z)[self.order]
        cw = np.cumsum(ws, axis=0)[:-1]
        cwz = np.cumsum(wzs, axis=0)[:-1]
        rw = total_w - cw
        rwz = total_wz - cwz
        with np.errstate(divide="ignore", invalid="ignore"):
            score = np.where(cw > 0, cwz**2 / cw, 0.0) + np.where(rw > 0, rwz**2 / rw, 0.0)
        score = np.where(self.valid, score, -np.inf)
        # first maximum in feature order, then position
        flat = np.argmax(score.T)
        f, s = divmod(int(flat), score.shape[0])
        if not np.isfinite(score[s, f]):
            return Stump(-1, 0.0, const, const)
        a, b = self.xs[s, f], self.xs[s + 1, f]
        t = 0.5 * (a + b)
        if t == b:
            t = a
        lv = cwz[s, f] / cw[s, f] if cw[s, f] > 0 else const
        rv = rwz[s, f] / rw[s, f] if rw[s, f] > 0 else const
        return Stump(f, float(t), float(lv), float(rv))
