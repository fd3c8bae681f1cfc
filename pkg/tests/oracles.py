"""Independent reference implementations used as test oracles.

Deliberately naive: pure Python loops and dictionaries, no shared code with the
package.
"""
import math
from collections import Counter

import numpy as np


def bf_entropy(col):
    n = len(col)
    return -sum(c / n * math.log2(c / n) for c in Counter(col).values())


def bf_table(a, b):
    """Contingency table as a dict {(ai, bj): count}."""
    return Counter(zip(a, b))


def bf_info_gain(a, b):
    """I(A;B) = sum p(a,b) log2 p(a,b) / (p(a) p(b)) from the contingency table."""
    n = len(a)
    pa, pb = Counter(a), Counter(b)
    total = 0.0
    for (ai, bj), c in bf_table(a, b).items():
        total += c / n * math.log2(c * n / (pa[ai] * pb[bj]))
    return max(total, 0.0)


def bf_su(a, b):
    h = bf_entropy(a) + bf_entropy(b)
    return 0.0 if h == 0 else 2 * bf_info_gain(a, b) / h


def finite_diff_grad(f, x, h=1e-5):
    g = np.zeros_like(x)
    for j in range(len(x)):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def grad_rel_error(analytic, numeric, floor=1e-7):
    """Norm-wise relative error; ``floor`` keeps saturated (near-zero) gradients
    from amplifying finite-difference round-off."""
    scale = max(np.max(np.abs(analytic)), np.max(np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric)) / scale)


def hyperplane_distance(w, b, x):
    """Signed distance of x to {w.x + b = 0}."""
    return (np.dot(w, x) + b) / np.linalg.norm(w)


def class_entropy(labels):
    return bf_entropy(list(labels)) if len(labels) else 0.0


def bf_mdl_cuts_single(values, labels):
    """Exhaustive search of every midpoint cut; returns (best_cut, accepted) for one split."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    v = [values[i] for i in order]
    y = [labels[i] for i in order]
    n = len(v)
    ent = class_entropy(y)
    best = None
    for i in range(1, n):
        if v[i] == v[i - 1]:
            continue
        left, right = y[:i], y[i:]
        e = (len(left) * class_entropy(left) + len(right) * class_entropy(right)) / n
        if best is None or e < best[1]:
            best = ((v[i - 1] + v[i]) / 2, e, left, right)
    if best is None:
        return None, False
    cut, e, left, right = best
    gain = ent - e
    k, k1, k2 = len(set(y)), len(set(left)), len(set(right))
    delta = math.log2(3 ** k - 2) - (k * ent - k1 * class_entropy(left) - k2 * class_entropy(right))
    return cut, gain > (math.log2(n - 1) + delta) / n
