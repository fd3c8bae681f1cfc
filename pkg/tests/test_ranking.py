import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_net

from contrastive.exceptions import ConfigError, SurrogateDegenerateError
from contrastive.nn import LinearSoftmax, NeuralNet
from contrastive.ranking import (LocalSurrogate, fit_local_surrogate, knn_neighborhood,
                                 rank_features, rank_gradient, rank_local)


def _linear(W, b=None):
    W = np.asarray(W, dtype=float)
    return LinearSoftmax(W, np.zeros(W.shape[1]) if b is None else np.asarray(b, float))


def _constant_net(m=3):
    return NeuralNet([m, 2, 2, 2], [np.zeros((m, 2)), np.zeros((2, 2)), np.zeros((2, 2))],
                     [np.zeros(2), np.zeros(2), np.array([1.0, 0.0])])


def test_gradient_rank_linear_closed_form():
    # class-0 minus class-1 weights = (3, -1)
    model = _linear([[3.0, 0.0], [-1.0, 0.0]])
    r = rank_gradient(model, np.array([0.2, 0.1]))
    assert r.order == [0, 1] and r.mode == "gradient" and not r.fallback


def test_gradient_rank_constant_model_falls_back():
    r = rank_gradient(_constant_net(4), np.zeros(4))
    assert r.order == [0, 1, 2, 3] and r.fallback


def test_gradient_rank_ties_by_index():
    model = _linear([[1.0, 0.0], [2.0, 0.0], [2.0, 0.0], [1.0, 0.0]])
    assert rank_gradient(model, np.full(4, 0.1)).order == [1, 2, 0, 3]


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_gradient_rank_is_permutation_with_nonincreasing_scores(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 10))
    r = rank_gradient(random_net(rng, m), rng.normal(size=m))
    assert sorted(r.order) == list(range(m))
    assert np.all(np.diff(r.scores) <= 0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_gradient_rank_permutation_equivariance(seed):
    rng = np.random.default_rng(seed)
    m = 5
    net = random_net(rng, m, z=2)
    x = rng.normal(size=m)
    perm = rng.permutation(m)
    permuted = NeuralNet(net.layer_dims, [net.weights[0][perm]] + net.weights[1:], net.biases)
    a = rank_gradient(net, x)
    b = rank_gradient(permuted, x[perm])
    near_tie = np.any(np.abs(np.diff(a.scores)) < 1e-9)
    assert [int(perm[j]) for j in b.order] == a.order or near_tie


def test_knn_single_predicted_class_gives_q():
    X = np.random.default_rng(0).random((20, 3))
    Q = knn_neighborhood(X, X[0], _constant_net(3), q=4)
    assert len(Q) == 4


def test_knn_two_classes_gives_2q():
    X = np.random.default_rng(1).random((40, 2))
    model = _linear([[5.0, -5.0], [0.0, 0.0]], [-2.5, 2.5])  # class 0 iff x0 > 0.5
    assert len(np.unique(model.predict(X))) == 2
    assert len(knn_neighborhood(X, X[0], model, q=3)) == 6


def test_knn_matches_brute_force():
    X = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0], [3.0, 3.0], [0.5, 0.5]])
    model = _constant_net(2)
    x = np.array([0.4, 0.4])
    Q = knn_neighborhood(X, x, model, q=3)
    brute = sorted(range(5), key=lambda i: np.hypot(*(X[i] - x)))[:3]
    assert np.array_equal(Q, X[brute])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_knn_invariant_to_row_order(seed):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 4, (30, 3)).astype(float)  # coarse grid, so distance ties occur
    net = random_net(rng, 3, z=2)
    a = knn_neighborhood(X, X[0], net, q=4)
    b = knn_neighborhood(X[rng.permutation(30)], X[0], net, q=4)
    assert np.array_equal(a, b)


def test_knn_rejects_bad_q():
    with pytest.raises(ConfigError):
        knn_neighborhood(np.zeros((3, 2)), np.zeros(2), _constant_net(2), q=0)


def _clusters(rng):
    a = rng.normal([0.2, 0.5], 0.05, (4, 2))
    b = rng.normal([0.8, 0.5], 0.05, (4, 2))
    return np.vstack([a, b])


def test_surrogate_reproduces_labels_on_separable_neighborhood(rng):
    model = _linear([[-8.0, 8.0], [0.0, 0.0]], [4.0, -4.0])  # class 1 iff x0 > 0.5
    Q = _clusters(rng)
    g = fit_local_surrogate(Q, model)
    assert g.weight.shape == (2, 2)
    assert np.array_equal(g.predict_proba(Q).argmax(axis=1), model.predict(Q))


def test_surrogate_degenerate_on_single_class(rng):
    with pytest.raises(SurrogateDegenerateError):
        fit_local_surrogate(rng.random((8, 3)), _constant_net(3))


def test_surrogate_top_feature_survives_rescaling_after_standardizing(rng):
    model = _linear([[-8.0, 8.0], [1.0, -1.0]], [4.0, -4.0])
    Q = _clusters(rng)
    labels = _FixedOutputs(model.forward(Q))

    def top(Q):
        Z = (Q - Q.mean(axis=0)) / Q.std(axis=0)
        return rank_local(fit_local_surrogate(Z, labels), 0, 1).order[0]

    assert top(Q) == top(Q * np.array([2.0, 1.0])) == 0


class _FixedOutputs:
    """Stands in for the network: the neighborhood's soft labels do not change when
    the features are rescaled."""

    def __init__(self, P):
        self.P, self.n_classes = P, P.shape[1]

    def forward(self, Z):
        return self.P


def test_rank_local_examples():
    g = LocalSurrogate(np.array([[0.9, 0.1], [-0.9, -0.1]]), np.zeros(2), np.zeros((0, 2)))
    assert rank_local(g, 0, 1).order == [0, 1]
    g = LocalSurrogate(np.ones((2, 3)), np.zeros(2), np.zeros((0, 3)))
    assert rank_local(g, 0, 1).order == [0, 1, 2]
    W = np.array([[1.0, 0.0, 2.0], [0.0, 0.5, 0.0], [1.5, -1.0, 2.1]])
    g = LocalSurrogate(W, np.zeros(3), np.zeros((0, 3)))
    # |w_2 - w_0| = (0.5, 1.0, 0.1)
    r = rank_local(g, 0, 2)
    assert r.order == [1, 0, 2] and r.mode == "local"
    np.testing.assert_allclose(r.scores, [1.0, 0.5, 0.1])


def test_local_mode_falls_back_with_warning(rng):
    X = rng.random((10, 3))
    r = rank_features(_linear([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]]), X[0], "local", X, 4)
    assert r.mode == "gradient" and r.fallback
    assert "falling back" in r.warnings[0]


def test_unknown_mode(rng):
    with pytest.raises(ConfigError):
        rank_features(_constant_net(2), np.zeros(2), "shap", np.zeros((3, 2)))
