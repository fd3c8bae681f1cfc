"""Supervised multi-interval discretization (Fayyad & Irani, MDL stopping rule)."""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y


def _row_entropy(counts):
    counts = np.atleast_2d(counts).astype(np.float64)
    total = counts.sum(axis=1, keepdims=True)
    p = np.divide(counts, total, out=np.zeros_like(counts), where=total > 0)
    logp = np.log2(p, out=np.zeros_like(p), where=p > 0)
    return -(p * logp).sum(axis=1)


def _best_cut(values, onehot):
    """Boundary index minimizing the weighted class entropy of the two halves, or None."""
    cand = np.flatnonzero(values[1:] > values[:-1]) + 1
    if cand.size == 0:
        return None
    cum = np.cumsum(onehot, axis=0)
    total = cum[-1]
    left = cum[cand - 1]
    right = total - left
    n = len(values)
    w = cand / n
    cond = w * _row_entropy(left) + (1 - w) * _row_entropy(right)
    return int(cand[np.argmin(cond)])


def mdl_accepts(onehot, i):
    """Fayyad-Irani MDL test for splitting the (sorted) class rows at index ``i``."""
    n = len(onehot)
    counts, lc, rc = onehot.sum(axis=0), onehot[:i].sum(axis=0), onehot[i:].sum(axis=0)
    ent, ent1, ent2 = _row_entropy(np.stack([counts, lc, rc]))
    k, k1, k2 = (int(np.count_nonzero(c)) for c in (counts, lc, rc))
    gain = ent - (i / n) * ent1 - ((n - i) / n) * ent2
    delta = np.log2(3.0 ** k - 2) - (k * ent - k1 * ent1 - k2 * ent2)
    return gain > (np.log2(n - 1) + delta) / n


def mdlp_cut_points(values, labels):
    """Sorted cut points for one column; empty when MDL accepts no split."""
    values = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels)
    order = np.argsort(values, kind="stable")
    v = values[order]
    _, y = np.unique(labels[order], return_inverse=True)
    onehot = np.eye(int(y.max()) + 1 if len(y) else 1)[y]

    cuts = []
    stack = [(0, len(v))]
    while stack:
        lo, hi = stack.pop()
        if hi - lo < 2:
            continue
        seg_v, seg_y = v[lo:hi], onehot[lo:hi]
        if np.count_nonzero(seg_y.sum(axis=0)) < 2:
            continue
        i = _best_cut(seg_v, seg_y)
        if i is None or not mdl_accepts(seg_y, i):
            continue
        cuts.append((seg_v[i - 1] + seg_v[i]) / 2.0)
        stack.append((lo, lo + i))
        stack.append((lo + i, hi))
    return sorted(cuts)


def apply_cuts(values, cuts):
    return np.searchsorted(np.asarray(cuts, dtype=np.float64), values, side="right")


def discretize(values, labels):
    """Return ``(codes, cuts)`` for one column; codes run 0..len(cuts)."""
    cuts = mdlp_cut_points(values, labels)
    return apply_cuts(np.asarray(values, dtype=np.float64), cuts), cuts


class MDLPDiscretizer(TransformerMixin, BaseEstimator):
    """Column-wise MDL discretizer; ``cuts_[j]`` holds the cut points of column j."""

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        self.cuts_ = [mdlp_cut_points(X[:, j], y) for j in range(X.shape[1])]
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "cuts_")
        X = check_array(X, dtype=np.float64)
        return np.column_stack([apply_cuts(X[:, j], c) for j, c in enumerate(self.cuts_)])
