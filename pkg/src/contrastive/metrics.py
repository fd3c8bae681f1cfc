"""Quality statistics over a set of generated samples, and the two reference methods
(nearest differently-predicted training row; unconstrained boundary projection)."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .data import Dataset, Normalization, in_domain
from .exceptions import ConfigError, DataError, DegenerateStepError, NoContrastiveClassError
from .generator import ContrastiveResult
from .projection import MIN_STEP, contrastive_class, projection_step

LITERAL, OFFDIAG = "literal", "offdiag"


def _require(results):
    if len(results) == 0:
        raise DataError("metrics need at least one result")


def fidelity(results, net, normalization: Normalization | None = None):
    """Share of results whose claimed label is the model's label on x_tilde and differs
    from the original prediction."""
    _require(results)
    norm = normalization or Normalization.identity(net.n_features)
    hits = 0
    for r in results:
        pred = int(np.argmax(net.forward(norm.transform(r.x_tilde))))
        hits += int(r.y_tilde == pred and r.y_tilde != r.y_orig)
    return hits / len(results)


def avg_num_feats(results):
    _require(results)
    return float(np.mean([len(r.S) for r in results]))


def redundancy(S, su, variant=LITERAL):
    s = len(S)
    if variant == LITERAL:
        if s == 0:
            return 0.0
        return sum(su(i, j) for i in S for j in S) / s ** 2
    if variant == OFFDIAG:
        if s <= 1:
            return 0.0
        return sum(su(i, j) for i in S for j in S if i != j) / (s * (s - 1))
    raise ConfigError(f"unknown info-gain variant {variant!r}")


def info_gain_metric(results, su, variant=LITERAL):
    """1 - mean over results of the average pairwise SU inside S."""
    _require(results)
    return 1.0 - float(np.mean([redundancy(list(r.S), su, variant) for r in results]))


def domain_rate(results, domains):
    _require(results)
    return float(np.mean([in_domain(r.x_tilde, domains) for r in results]))


def influence_metric(fid, info, dom, avg_feats):
    if avg_feats <= 0:
        raise ConfigError("influence is undefined when avg#Feats is 0")
    return fid * info * dom / avg_feats


@dataclass
class MetricsReport:
    method: str
    n: int
    fidelity: float
    avg_feats: float
    info_gain: float
    info_gain_star: float
    domain: float
    influence: float

    def as_dict(self):
        return asdict(self)


def compute_report(results, net, *, su, domains, normalization=None, method="",
                   variant=LITERAL):
    fid = fidelity(results, net, normalization)
    avg = avg_num_feats(results)
    info = info_gain_metric(results, su, variant)
    dom = domain_rate(results, domains)
    try:
        infl = influence_metric(fid, info, dom, avg)
    except ConfigError:
        infl = float("nan")
    return MetricsReport(method, len(results), fid, avg, info, info * fid, dom, infl)


def average_reports(reports):
    """Field-wise mean of reports for the same method (e.g. across runs)."""
    first = reports[0]
    fields = [k for k, v in first.as_dict().items() if isinstance(v, float)]
    merged = first.as_dict()
    for k in fields:
        merged[k] = float(np.mean([getattr(r, k) for r in reports]))
    merged["n"] = int(sum(r.n for r in reports))
    return MetricsReport(**merged)


# --------------------------------------------------------------------------- baselines


def baseline_nearest_ct(train: Dataset, net, x):
    """Closest (normalized Euclidean) training row the model labels differently from x."""
    norm = train.normalization or Normalization.identity(train.n_features)
    x = np.asarray(x, dtype=np.float64)
    Xn = norm.transform(train.X)
    C = int(np.argmax(net.forward(norm.transform(x))))
    pred = net.predict(Xn)
    cand = np.flatnonzero(pred != C)
    if cand.size == 0:
        raise DataError("no training row is predicted differently from x")
    dist = np.linalg.norm(Xn[cand] - norm.transform(x), axis=1)
    i = int(cand[np.argmin(dist)])
    x_tilde = train.X[i].copy()
    S = [int(j) for j in np.flatnonzero(x_tilde != x)]
    return ContrastiveResult(x, x_tilde, C, int(pred[i]), S, True, 0, len(S), None, "nearestct")


def baseline_deepfool(net, x, steps=200, *, normalization=None, overshoot=1.02,
                      anchor="original"):
    """Iterative projection on all features, without any domain projection."""
    norm = normalization or Normalization.identity(net.n_features)
    x = np.asarray(x, dtype=np.float64)
    m = len(x)
    z0 = norm.transform(x)
    C = int(np.argmax(net.forward(z0)))
    S = list(range(m))
    try:
        v = contrastive_class(net, z0)
    except NoContrastiveClassError:
        return ContrastiveResult(x, x.copy(), C, C, S, False, 0, m, None, "deepfool")
    z, it, ok = z0.copy(), 0, False
    for it in range(1, steps + 1):
        try:
            z = z + projection_step(net, z, z0, v, C, overshoot=overshoot, anchor=anchor,
                                    eps=MIN_STEP)
        except DegenerateStepError:
            it -= 1
            break
        if int(np.argmax(net.forward(z))) != C:
            ok = True
            break
    x_tilde = norm.inverse(z)
    y_tilde = int(np.argmax(net.forward(norm.transform(x_tilde))))
    return ContrastiveResult(x, x_tilde, C, y_tilde, S, ok, it, m, v, "deepfool")
