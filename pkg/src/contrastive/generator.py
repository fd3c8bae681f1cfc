"""Contrastive sample generation: rank features, drop redundant ones, then grow the
perturbed set one feature at a time until the prediction flips."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .data import Dataset, Normalization, in_domain, infer_domains
from .entropy import entropy_filter, su_from_training
from .exceptions import ConfigError, NoContrastiveClassError
from .projection import (Candidate, contrastive_class, generate_contrastive, project_domain,
                         projection_step)
from .ranking import rank_features

__all__ = [
    "GenerationConfig", "ContrastiveResult", "ContrastiveExplainer", "grace",
    "contrastive_class", "projection_step", "project_domain", "generate_contrastive",
]

MODES = ("gradient", "local")


@dataclass
class GenerationConfig:
    k: int = 5
    gamma: float = 0.5
    steps: int = 200
    mode: str = "gradient"
    overshoot: float = 1.02
    anchor: str = "original"
    n_neighbors: int = 4

    def __post_init__(self):
        if int(self.k) < 1:
            raise ConfigError(f"K must be >= 1, got {self.k}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError(f"gamma must lie in [0, 1], got {self.gamma}")
        if int(self.steps) < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if self.overshoot < 1.0:
            raise ConfigError(f"overshoot must be >= 1, got {self.overshoot}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.anchor not in ("original", "current"):
            raise ConfigError(f"anchor must be 'original' or 'current', got {self.anchor!r}")
        if int(self.n_neighbors) < 1:
            raise ConfigError("n_neighbors must be >= 1")


@dataclass
class ContrastiveResult:
    x: np.ndarray
    x_tilde: np.ndarray
    y_orig: int
    y_tilde: int
    S: list
    success: bool
    iterations: int = 0
    k: int = 0
    v: Optional[int] = None
    method: str = "grace"
    warnings: list = field(default_factory=list)

    @property
    def changed(self):
        return [j for j in self.S if self.x_tilde[j] != self.x[j]]

    def to_dict(self, feature_names=None, class_labels=None):
        lab = (lambda c: c) if class_labels is None else (lambda c: None if c is None
                                                           else class_labels[c])
        d = {
            "method": self.method,
            "success": self.success,
            "x": self.x.tolist(),
            "x_tilde": self.x_tilde.tolist(),
            "S": list(self.S),
            "C": lab(self.y_orig),
            "v": lab(self.v),
            "y_tilde": lab(self.y_tilde),
            "iterations": self.iterations,
            "k": self.k,
        }
        if feature_names is not None:
            d["S_names"] = [feature_names[j] for j in self.S]
        if self.warnings:
            d["warnings"] = list(self.warnings)
        return d


def _normalization_of(net, train):
    if train is not None and train.normalization is not None:
        return train.normalization
    if getattr(net, "normalization", None):
        return Normalization.from_dict(net.normalization)
    return Normalization.identity(net.n_features)


def grace(net, x, train: Dataset, config: GenerationConfig = None, *, su=None, domains=None):
    """Explain ``net``'s prediction on the raw sample ``x``.

    ``train`` is the raw training split (with its normalization record); it
    feeds the local neighborhood and, unless ``su`` is given, the SU matrix.
    """
    config = config or GenerationConfig()
    x = np.asarray(x, dtype=np.float64)
    norm = _normalization_of(net, train)
    domains = domains if domains is not None else train.domains
    if domains is None:
        domains = infer_domains(train)
    z = norm.transform(x)
    C = int(np.argmax(net.forward(z)))
    method = f"grace-{config.mode}"

    try:
        v = contrastive_class(net, z)
    except NoContrastiveClassError as exc:
        return ContrastiveResult(x, x.copy(), C, C, [], False, method=method,
                                 warnings=[str(exc)])

    Xn = norm.transform(train.X)
    ranked = rank_features(net, z, config.mode, Xn, config.n_neighbors)
    if su is None:
        su, _ = su_from_training(Xn, train.y)
    U_star = entropy_filter(ranked.order, config.gamma, su)

    cand, S, k = Candidate(x.copy(), False, 0), [], 0
    for k in range(1, min(int(config.k), len(U_star)) + 1):
        S = U_star[:k]
        cand = generate_contrastive(net, x, S, domains, steps=int(config.steps),
                                    overshoot=config.overshoot, anchor=config.anchor,
                                    normalization=norm, v=v)
        if cand.success:
            break
    y_tilde = int(np.argmax(net.forward(norm.transform(cand.x_tilde))))
    return ContrastiveResult(x, cand.x_tilde, C, y_tilde, list(S), cand.success,
                             cand.iterations, k, v, method, list(ranked.warnings))


class ContrastiveExplainer(BaseEstimator):
    """Estimator front-end for :func:`grace`.

    ``fit`` takes the raw training split; it fixes feature domains (unless
    given), the normalization record (the model's own when it carries one)
    and the SU matrix. ``transform`` returns one contrastive sample per row.
    """

    def __init__(self, model=None, k=5, gamma=0.5, steps=200, mode="gradient",
                 overshoot=1.02, anchor="original", n_neighbors=4, domains=None):
        self.model = model
        self.k = k
        self.gamma = gamma
        self.steps = steps
        self.mode = mode
        self.overshoot = overshoot
        self.anchor = anchor
        self.n_neighbors = n_neighbors
        self.domains = domains

    def _net(self):
        net = getattr(self.model, "net_", self.model)
        if net is None:
            raise ConfigError("ContrastiveExplainer needs a model")
        return net

    def fit(self, X, y):
        X = check_array(X, dtype=np.float64)
        y = np.asarray(y)
        net = self._net()
        names = list(getattr(net, "feature_names", None) or
                     [f"x{j}" for j in range(X.shape[1])])
        train = Dataset(X, np.unique(y, return_inverse=True)[1], names,
                        [str(c) for c in np.unique(y)])
        train.normalization = _normalization_of(net, None)
        train.domains = list(self.domains) if self.domains is not None else infer_domains(train)
        self.config_ = GenerationConfig(self.k, self.gamma, self.steps, self.mode,
                                        self.overshoot, self.anchor, self.n_neighbors)
        self.su_, self.cuts_ = su_from_training(train.Xn, train.y)
        for d, cuts in zip(train.domains, self.cuts_):
            d.cuts = list(cuts)
        self.train_ = train
        self.n_features_in_ = X.shape[1]
        return self

    def explain(self, x):
        check_is_fitted(self, "train_")
        return grace(self._net(), x, self.train_, self.config_, su=self.su_,
                     domains=self.train_.domains)

    def explain_many(self, X):
        return [self.explain(row) for row in check_array(X, dtype=np.float64)]

    def transform(self, X):
        return np.array([r.x_tilde for r in self.explain_many(X)])

    def in_domain(self, x):
        check_is_fitted(self, "train_")
        return in_domain(x, self.train_.domains)
