"""Instance-dependent feature rankings: input gradients of the nearest contrastive
class, or weights of a logistic surrogate fit on a labelled neighborhood."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import ConfigError, NoContrastiveClassError, SurrogateDegenerateError
from .nn import softmax
from .projection import contrastive_class

log = logging.getLogger(__name__)

SURROGATE_ITERS = 500
SURROGATE_STEP = 0.1


@dataclass
class RankedFeatures:
    order: list
    scores: np.ndarray
    mode: str
    v: Optional[int] = None
    warnings: list = field(default_factory=list)

    @property
    def fallback(self):
        return bool(self.warnings)


def _order_by_score(scores):
    scores = np.asarray(scores, dtype=np.float64)
    # descending score, ascending index on ties
    order = np.lexsort((np.arange(len(scores)), -scores))
    return [int(i) for i in order], scores[order]


def rank_gradient(net, x, v=None):
    """Order features by |d f_v / d x_j|, v being the nearest contrastive class."""
    m = net.n_features
    try:
        if v is None:
            v = contrastive_class(net, x)
        grad = np.abs(net.class_gradient(x, v))
    except NoContrastiveClassError:
        grad = np.zeros(m)
    if not np.any(grad > 0):
        msg = "gradient ranking degenerate (all zero); using feature index order"
        log.warning(msg)
        return RankedFeatures(list(range(m)), np.zeros(m), "gradient", v, [msg])
    order, scores = _order_by_score(grad)
    return RankedFeatures(order, scores, "gradient", v)


def knn_neighborhood(X_train, x, net, q=4):
    """Up to ``q`` nearest training rows (Euclidean) for each class ``net`` predicts.

    Exhaustive scan. Rows come back grouped by predicted class (ascending),
    nearest first; exact distance ties are broken by the row values so the
    result does not depend on row order.
    """
    X_train = np.asarray(X_train, dtype=np.float64)
    if q < 1:
        raise ConfigError("q must be >= 1")
    pred = net.predict(X_train)
    dist = np.linalg.norm(X_train - np.asarray(x, dtype=np.float64), axis=1)
    picked = []
    for c in np.unique(pred):
        members = np.flatnonzero(pred == c)
        keys = [X_train[members, j] for j in range(X_train.shape[1] - 1, -1, -1)]
        rank = np.lexsort((*keys, dist[members]))
        picked.extend(members[rank[:q]])
    return X_train[np.asarray(picked, dtype=np.int64)]


@dataclass
class LocalSurrogate:
    weight: np.ndarray  # (Z, M)
    bias: np.ndarray  # (Z,)
    Q: np.ndarray

    def predict_proba(self, X):
        return softmax(np.asarray(X) @ self.weight.T + self.bias)


def fit_local_surrogate(Q, net, n_iter=SURROGATE_ITERS, step=SURROGATE_STEP):
    """Multinomial logistic model fit to the network's soft labels on ``Q``.

    Full-batch gradient descent on the soft-label cross-entropy, zero init.
    """
    Q = np.asarray(Q, dtype=np.float64)
    P = net.forward(Q)
    if len(Q) < 2 or len(np.unique(P.argmax(axis=1))) < 2:
        raise SurrogateDegenerateError("neighborhood needs two distinct predicted classes")
    n, m = Q.shape
    W = np.zeros((m, net.n_classes))
    b = np.zeros(net.n_classes)
    for _ in range(n_iter):
        G = (softmax(Q @ W + b) - P) / n
        W -= step * (Q.T @ G)
        b -= step * G.sum(axis=0)
    return LocalSurrogate(W.T.copy(), b, Q)


def rank_local(surrogate: LocalSurrogate, C, v):
    """Order features by |w_v - w_C| of the surrogate."""
    contrast = np.abs(surrogate.weight[v] - surrogate.weight[C])
    order, scores = _order_by_score(contrast)
    return RankedFeatures(order, scores, "local", v)


def rank_features(net, x, mode="gradient", X_train=None, q=4):
    """Dispatch on ``mode``; local ranking falls back to gradients when the surrogate
    cannot be fit."""
    if mode == "gradient":
        return rank_gradient(net, x)
    if mode != "local":
        raise ConfigError(f"unknown ranking mode {mode!r}")
    try:
        v = contrastive_class(net, x)
    except NoContrastiveClassError:
        return rank_gradient(net, x)
    C = int(np.argmax(net.forward(x)))
    try:
        surrogate = fit_local_surrogate(knn_neighborhood(X_train, x, net, q), net)
    except SurrogateDegenerateError as exc:
        msg = f"local ranking unavailable ({exc}); falling back to gradient ranking"
        log.warning(msg)
        ranked = rank_gradient(net, x, v)
        ranked.warnings.insert(0, msg)
        return ranked
    return rank_local(surrogate, C, v)
