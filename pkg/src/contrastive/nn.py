"""Two-hidden-layer ReLU network with a softmax head.

Everything is float64. Inputs are expected in the normalized feature space the
network was trained on; the raw <-> normalized mapping travels with the model
as a ``normalization`` record so saved models are self-contained.
"""
from __future__ import annotations

import copy
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted, check_X_y

from .exceptions import ConfigError, DataError, ShapeError, TrainingDivergedError

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
BIAS_INIT = 0.01


def softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


class _ScoreModel:
    """Shared softmax-head behaviour; subclasses provide logits and their Jacobian."""

    n_features: int
    n_classes: int

    def _check(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.n_features:
            raise ShapeError(f"expected {self.n_features} features, got {x.shape[-1]}")
        return x

    def forward(self, x):
        return softmax(self.logits(x))

    def predict(self, x):
        return np.argmax(self.forward(x), axis=-1)

    def jacobian(self, x):
        """Jacobian of the softmax output at a single point, shape (Z, M)."""
        x = self._check(x)
        if x.ndim != 1:
            raise ShapeError("jacobian takes a single sample")
        p = self.forward(x)
        jl = self.logit_jacobian(x)
        # d p_c / dx = p_c * (d z_c/dx - sum_k p_k d z_k/dx)
        return p[:, None] * (jl - p @ jl)

    def class_gradient(self, x, c, *, space="proba"):
        if not 0 <= int(c) < self.n_classes:
            raise ConfigError(f"class index {c} outside [0, {self.n_classes})")
        if space == "logit":
            return self.logit_jacobian(self._check(x))[int(c)]
        return self.jacobian(x)[int(c)]

    def scores(self, x, space="proba"):
        return self.logits(x) if space == "logit" else self.forward(x)

    def score_jacobian(self, x, space="proba"):
        return self.logit_jacobian(self._check(x)) if space == "logit" else self.jacobian(x)


@dataclass
class NeuralNet(_ScoreModel):
    """Dense ReLU network. ``weights[l]`` has shape (layer_dims[l], layer_dims[l+1])."""

    layer_dims: list
    weights: list
    biases: list
    class_labels: list = field(default_factory=list)
    normalization: Optional[dict] = None
    feature_names: list = field(default_factory=list)

    def __post_init__(self):
        self.layer_dims = [int(d) for d in self.layer_dims]
        if len(self.layer_dims) < 2 or min(self.layer_dims) < 1:
            raise ShapeError(f"bad layer_dims {self.layer_dims}")
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in self.biases]
        if len(self.weights) != len(self.layer_dims) - 1 or len(self.biases) != len(self.weights):
            raise ShapeError("number of weight/bias arrays does not match layer_dims")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            expect = (self.layer_dims[i], self.layer_dims[i + 1])
            if w.shape != expect or b.shape != (expect[1],):
                raise ShapeError(f"layer {i}: weight {w.shape}, bias {b.shape}, expected {expect}")
        if not self.class_labels:
            self.class_labels = [str(c) for c in range(self.layer_dims[-1])]

    @property
    def n_features(self):
        return self.layer_dims[0]

    @property
    def n_classes(self):
        return self.layer_dims[-1]

    def _activations(self, x):
        acts = [x]
        h = x
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.maximum(h @ w + b, 0.0)
            acts.append(h)
        return acts

    def logits(self, x):
        x = self._check(x)
        h = self._activations(x)[-1]
        return h @ self.weights[-1] + self.biases[-1]

    def logit_jacobian(self, x):
        acts = self._activations(x)
        # back-propagate the identity through the layers: J = W_L^T diag(r_{L-1}) W_{L-1}^T ...
        jac = self.weights[-1].T
        for w, h in zip(reversed(self.weights[:-1]), reversed(acts[1:])):
            jac = (jac * (h > 0)) @ w.T
        return jac

    def copy(self):
        return copy.deepcopy(self)


@dataclass
class LinearSoftmax(_ScoreModel):
    """Multinomial linear scorer: softmax(x @ weight + bias). Handy as an analytic oracle."""

    weight: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        self.weight = np.asarray(self.weight, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)

    @property
    def n_features(self):
        return self.weight.shape[0]

    @property
    def n_classes(self):
        return self.weight.shape[1]

    def logits(self, x):
        return self._check(x) @ self.weight + self.bias

    def logit_jacobian(self, x):
        return self.weight.T.copy()


def forward(net, x):
    """Class-probability vector of ``net`` at ``x``."""
    return net.forward(x)


def class_gradient(net, x, c):
    """Gradient of the class-``c`` softmax output with respect to the input."""
    return net.class_gradient(x, c)


# --------------------------------------------------------------------------- training


@dataclass
class TrainConfig:
    hidden_sizes: Sequence[int] = (15, 15)
    batch_size: int = 512
    learning_rate: float = 0.001
    early_stopping_patience: int = 3
    max_epochs: int = 500
    rng_seed: int = 0

    def __post_init__(self):
        self.hidden_sizes = tuple(int(h) for h in self.hidden_sizes)
        if len(self.hidden_sizes) != 2 or min(self.hidden_sizes) < 1:
            raise ConfigError("hidden_sizes must be two positive integers")
        if self.batch_size < 1 or self.max_epochs < 1:
            raise ConfigError("batch_size and max_epochs must be positive")
        if self.early_stopping_patience < 1:
            raise ConfigError("early_stopping_patience must be >= 1")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be > 0")


def init_network(layer_dims, seed):
    """Glorot-uniform weights, constant 0.01 biases."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.full(fan_out, BIAS_INIT))
    return NeuralNet(list(layer_dims), weights, biases)


def loss_and_grads(net, X, y):
    """Mean cross-entropy over the batch and its gradients w.r.t. every parameter."""
    acts = net._activations(X)
    z = acts[-1] @ net.weights[-1] + net.biases[-1]
    z = z - z.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    n = len(y)
    loss = -logp[np.arange(n), y].mean()

    delta = np.exp(logp)
    delta[np.arange(n), y] -= 1.0
    delta /= n
    gw, gb = [None] * len(net.weights), [None] * len(net.weights)
    for layer in range(len(net.weights) - 1, -1, -1):
        gw[layer] = acts[layer].T @ delta
        gb[layer] = delta.sum(axis=0)
        if layer:
            delta = (delta @ net.weights[layer].T) * (acts[layer] > 0)
    return loss, gw, gb


def cross_entropy(net, X, y):
    p = net.forward(X)
    return float(-np.log(np.clip(p[np.arange(len(y)), y], 1e-300, None)).mean())


class Adam:
    def __init__(self, params, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            m_hat = m / (1 - b1 ** self.t)
            v_hat = v / (1 - b2 ** self.t)
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def _epoch_order(n, seed, epoch):
    # counter-based stream: the permutation for an epoch depends only on (seed, epoch)
    gen = np.random.Generator(np.random.Philox(key=seed, counter=epoch))
    return gen.permutation(n)


def train(train_set, val_set, config: TrainConfig, n_classes=None):
    """Fit a network with Adam and early stopping on validation loss.

    ``train_set`` and ``val_set`` are ``(X, y)`` pairs with integer labels.
    Returns the snapshot with the lowest validation loss.
    """
    X, y = (np.asarray(a) for a in train_set)
    Xv, yv = (np.asarray(a) for a in val_set)
    if len(X) == 0 or len(Xv) == 0:
        raise DataError("training and validation splits must be non-empty")
    X, Xv = X.astype(np.float64), Xv.astype(np.float64)
    y, yv = y.astype(np.int64), yv.astype(np.int64)
    if n_classes is None:
        n_classes = int(max(y.max(), yv.max())) + 1
    if min(y.min(), yv.min()) < 0 or max(y.max(), yv.max()) >= n_classes:
        raise DataError(f"labels must lie in [0, {n_classes})")

    dims = [X.shape[1], *config.hidden_sizes, n_classes]
    net = init_network(dims, config.rng_seed)
    params = net.weights + net.biases
    opt = Adam(params, lr=config.learning_rate)

    best_loss, best_net, waited = np.inf, net.copy(), 0
    for epoch in range(config.max_epochs):
        order = _epoch_order(len(X), config.rng_seed, epoch)
        for start in range(0, len(X), config.batch_size):
            idx = order[start:start + config.batch_size]
            loss, gw, gb = loss_and_grads(net, X[idx], y[idx])
            if not np.isfinite(loss):
                raise TrainingDivergedError(f"non-finite training loss at epoch {epoch}")
            opt.step(gw + gb)
        val_loss = cross_entropy(net, Xv, yv)
        if not np.isfinite(val_loss):
            raise TrainingDivergedError(f"non-finite validation loss at epoch {epoch}")
        if val_loss < best_loss:
            best_loss, best_net, waited = val_loss, net.copy(), 0
        else:
            waited += 1
            if waited >= config.early_stopping_patience:
                log.debug("early stop at epoch %d (best val loss %.5f)", epoch, best_loss)
                break
    return best_net


# --------------------------------------------------------------------------- persistence


def save_model(net: NeuralNet, path, **extra):
    doc = {
        "format_version": FORMAT_VERSION,
        "layer_dims": net.layer_dims,
        "weights": [w.tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
        "class_labels": list(net.class_labels),
        "feature_names": list(net.feature_names),
        "normalization": net.normalization,
    }
    doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_model(path):
    """Returns ``(net, doc)``; ``doc`` keeps any extra fields written by ``save_model``."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format_version") != FORMAT_VERSION:
        raise DataError(f"unsupported model format_version {doc.get('format_version')!r}")
    net = NeuralNet(
        doc["layer_dims"], doc["weights"], doc["biases"],
        class_labels=doc.get("class_labels") or [],
        normalization=doc.get("normalization"),
        feature_names=doc.get("feature_names") or [],
    )
    return net, doc


class NeuralNetClassifier(ClassifierMixin, BaseEstimator):
    """scikit-learn wrapper around :func:`train`.

    If ``eval_set`` is not given to ``fit``, the last ``validation_fraction`` of
    a seeded permutation of the rows is held out for early stopping.
    """

    def __init__(self, hidden_sizes=(15, 15), batch_size=512, learning_rate=0.001,
                 early_stopping_patience=3, max_epochs=500, validation_fraction=0.1,
                 random_state=0):
        self.hidden_sizes = hidden_sizes
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.early_stopping_patience = early_stopping_patience
        self.max_epochs = max_epochs
        self.validation_fraction = validation_fraction
        self.random_state = random_state

    def fit(self, X, y, eval_set=None):
        X, y = check_X_y(X, y, dtype=np.float64)
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        if eval_set is None:
            perm = np.random.default_rng(self.random_state).permutation(len(X))
            n_val = max(1, int(round(self.validation_fraction * len(X))))
            val_idx, tr_idx = perm[:n_val], perm[n_val:]
            train_set, val_set = (X[tr_idx], y_idx[tr_idx]), (X[val_idx], y_idx[val_idx])
        else:
            Xv, yv = eval_set
            train_set = (X, y_idx)
            val_set = (np.asarray(Xv, dtype=np.float64), np.searchsorted(self.classes_, yv))
        config = TrainConfig(self.hidden_sizes, self.batch_size, self.learning_rate,
                             self.early_stopping_patience, self.max_epochs, self.random_state)
        self.net_ = train(train_set, val_set, config, n_classes=len(self.classes_))
        self.net_.class_labels = [str(c) for c in self.classes_]
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "net_")
        return self.net_.forward(np.asarray(X, dtype=np.float64))

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]
