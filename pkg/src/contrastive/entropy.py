"""Empirical entropy, information gain and symmetrical uncertainty on discrete columns,
plus the forward redundancy filter built on them."""
import numpy as np

from .discretize import MDLPDiscretizer
from .exceptions import ConfigError, ShapeError


def _entropy_from_counts(counts):
    # summing in sorted order makes the result depend only on the multiset of counts,
    # so H(i, j) == H(j, i) and H(X, X) == H(X) hold bit-for-bit
    counts = np.sort(counts)
    p = counts / counts.sum()
    return 0.0 - float(np.sum(p * np.log2(p)))


def _as_codes(codes):
    codes = np.asarray(codes)
    if codes.ndim != 1 or codes.size == 0:
        raise ShapeError("expected a non-empty 1-D column")
    return np.unique(codes, return_inverse=True)[1].astype(np.int64)


def entropy(codes):
    """Shannon entropy (bits) of the empirical value distribution."""
    _, counts = np.unique(_as_codes(codes), return_counts=True)
    return _entropy_from_counts(counts)


def joint_entropy(codes_i, codes_j):
    a, b = _as_codes(codes_i), _as_codes(codes_j)
    if a.shape != b.shape:
        raise ShapeError(f"column lengths differ: {a.size} vs {b.size}")
    _, counts = np.unique(a * (b.max() + 1) + b, return_counts=True)
    return _entropy_from_counts(counts)


def info_gain(codes_i, codes_j):
    """IG(i | j) = H(i) - H(i | j), computed as H(i) + H(j) - H(i, j)."""
    h_ij = joint_entropy(codes_i, codes_j)
    return max(0.0, entropy(codes_i) + entropy(codes_j) - h_ij)


def symmetrical_uncertainty(codes_i, codes_j):
    h = entropy(codes_i) + entropy(codes_j)
    if h == 0:
        return 0.0
    return min(1.0, 2.0 * info_gain(codes_i, codes_j) / h)


class SUMatrix:
    """Lazily evaluated, memoized pairwise SU over the columns of a code matrix.

    Memo writes are idempotent, so concurrent readers need no lock.
    """

    def __init__(self, codes):
        self.codes = np.asarray(codes)
        if self.codes.ndim != 2:
            raise ShapeError("codes must be an (n_samples, n_features) matrix")
        self._memo = {}

    @property
    def n_features(self):
        return self.codes.shape[1]

    def __call__(self, i, j):
        key = (i, j) if i <= j else (j, i)
        val = self._memo.get(key)
        if val is None:
            val = symmetrical_uncertainty(self.codes[:, key[0]], self.codes[:, key[1]])
            self._memo[key] = val
        return val

    def full(self):
        m = self.n_features
        return np.array([[self(i, j) for j in range(m)] for i in range(m)])


def su_from_training(Xn, y):
    """Discretize normalized training columns against their labels and wrap them in an SUMatrix.

    Returns ``(su, cuts)``.
    """
    disc = MDLPDiscretizer().fit(Xn, y)
    return SUMatrix(disc.transform(Xn)), disc.cuts_


def entropy_filter(U, gamma, su):
    """Keep features of ``U`` (in order) whose SU with every kept feature is at most ``gamma``.

    ``su`` is an :class:`SUMatrix` or a discretized (n_samples, n_features) matrix.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ConfigError(f"gamma must lie in [0, 1], got {gamma}")
    if not isinstance(su, SUMatrix):
        su = SUMatrix(su)
    U = [int(i) for i in U]
    if len(set(U)) != len(U) or any(not 0 <= i < su.n_features for i in U):
        raise ConfigError(f"U must hold distinct indices in [0, {su.n_features})")
    kept = []
    for i in U:
        if all(su(i, j) <= gamma for j in kept):
            kept.append(i)
    return kept
