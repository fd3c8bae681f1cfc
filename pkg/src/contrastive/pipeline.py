"""End-to-end runs: split, train, explain every test row, score each method."""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, replace

import numpy as np
from sklearn.metrics import accuracy_score, f1_score

from .data import Dataset, Normalization, infer_domains, normalize, split
from .entropy import SUMatrix, su_from_training
from .exceptions import ConfigError
from .generator import GenerationConfig, grace
from .metrics import (LITERAL, average_reports, baseline_deepfool, baseline_nearest_ct,
                      compute_report)
from .nn import NeuralNet, TrainConfig, train

log = logging.getLogger(__name__)

METHODS = ("grace-gradient", "grace-local", "deepfool", "nearestct")
K_SWEEP = tuple(range(1, 11))
GAMMA_SWEEP = (1.0, 0.7, 0.5, 0.3)
RATIOS = (0.8, 0.1, 0.1)


@dataclass
class Prepared:
    name: str
    full: Dataset
    train: Dataset
    val: Dataset
    test: Dataset
    domains: list
    normalization: Normalization
    su: SUMatrix


def prepare(ds: Dataset, seed, name="data", domain_overrides=None, ratios=RATIOS):
    """Split with ``seed``; normalization and SU from the training part only.

    Domains are taken over all loaded rows (plus manual overrides) so that every
    row being explained lies inside them.
    """
    domains = infer_domains(ds, domain_overrides)
    tr, va, te = split(ds, ratios, seed)
    _, record = normalize(tr)
    tr, va, te = (replace(p, normalization=record, domains=domains) for p in (tr, va, te))
    su, cuts = su_from_training(tr.Xn, tr.y)
    for d, c in zip(domains, cuts):
        d.cuts = list(c)
    return Prepared(name, ds, tr, va, te, domains, record, su)


def fit_model(prep: Prepared, config: TrainConfig) -> NeuralNet:
    net = train((prep.train.Xn, prep.train.y), (prep.val.Xn, prep.val.y), config,
                n_classes=prep.full.n_classes)
    net.normalization = prep.normalization.to_dict()
    net.class_labels = list(prep.full.class_names)
    net.feature_names = list(prep.full.feature_names)
    return net


def test_scores(net, part: Dataset):
    pred = net.predict(part.Xn)
    return accuracy_score(part.y, pred), f1_score(part.y, pred, average="macro")


def explain_rows(method, net, prep: Prepared, config: GenerationConfig, rows=None):
    """Generate one result per test row (all rows by default), in row order."""
    X = prep.test.X if rows is None else prep.test.X[rows]
    if method in ("grace-gradient", "grace-local"):
        config = replace(config, mode=method.split("-")[1])
        return [grace(net, x, prep.train, config, su=prep.su, domains=prep.domains) for x in X]
    if method == "deepfool":
        return [baseline_deepfool(net, x, config.steps, normalization=prep.normalization,
                                  overshoot=config.overshoot, anchor=config.anchor) for x in X]
    if method == "nearestct":
        return [baseline_nearest_ct(prep.train, net, x) for x in X]
    raise ConfigError(f"unknown method {method!r}")


def _settings(sweep, base: GenerationConfig):
    if sweep is None:
        return [(base.k, base.gamma)]
    if sweep == "k":
        return [(k, base.gamma) for k in K_SWEEP]
    if sweep == "gamma":
        return [(base.k, g) for g in GAMMA_SWEEP]
    raise ConfigError(f"unknown sweep {sweep!r}")


def _run_methods(net, prep: Prepared, methods, settings, gen_config, variant):
    """Reports keyed by (method, K, gamma) for one trained model."""
    out = {}
    for method in methods:
        fixed = None
        for k, gamma in settings:
            if method in ("deepfool", "nearestct"):
                # neither baseline depends on K or gamma
                fixed = fixed or explain_rows(method, net, prep, gen_config)
                results = fixed
            else:
                results = explain_rows(method, net, prep, replace(gen_config, k=k, gamma=gamma))
            out[(method, k, gamma)] = compute_report(
                results, net, su=prep.su, domains=prep.domains,
                normalization=prep.normalization, method=method, variant=variant)
    return out


def _rows(name, per_key, runs, accs, f1s):
    rows = []
    for (method, k, gamma), reps in per_key.items():
        rep = average_reports(reps)
        rows.append({"dataset": name, "method": method, "K": k, "gamma": gamma, "runs": runs,
                     **{f: v for f, v in rep.as_dict().items() if f != "method"},
                     "model_accuracy": float(np.mean(accs)), "model_f1": float(np.mean(f1s))})
    return rows


def evaluate_model(net, prep: Prepared, *, methods=METHODS, gen_config=None, sweep=None,
                   variant=LITERAL):
    """Metrics rows for an already trained model on ``prep``'s test split."""
    gen_config = gen_config or GenerationConfig()
    acc, f1 = test_scores(net, prep.test)
    reps = _run_methods(net, prep, methods, _settings(sweep, gen_config), gen_config, variant)
    return _rows(prep.name, {k: [r] for k, r in reps.items()}, 1, [acc], [f1])


def evaluate(ds: Dataset, *, name="data", methods=METHODS, seed=0, runs=1,
             train_config: TrainConfig | None = None, gen_config: GenerationConfig | None = None,
             sweep=None, variant=LITERAL, domain_overrides=None):
    """Metrics rows, one per (method, K, gamma), averaged over ``runs`` retrained models.

    Run ``r`` uses seed ``seed + r`` for both the split and the network.
    """
    train_config = train_config or TrainConfig()
    gen_config = gen_config or GenerationConfig()
    settings = _settings(sweep, gen_config)
    per_key, accs, f1s = {}, [], []
    for r in range(runs):
        s = seed + r
        prep = prepare(ds, s, name, domain_overrides)
        net = fit_model(prep, replace(train_config, rng_seed=s))
        acc, f1 = test_scores(net, prep.test)
        accs.append(acc)
        f1s.append(f1)
        log.info("run %d: test accuracy %.3f, macro-F1 %.3f", r, acc, f1)
        for key, rep in _run_methods(net, prep, methods, settings, gen_config, variant).items():
            per_key.setdefault(key, []).append(rep)
    return _rows(name, per_key, runs, accs, f1s)


REPORT_COLUMNS = ["dataset", "method", "K", "gamma", "runs", "n", "fidelity", "avg_feats",
                  "info_gain", "info_gain_star", "domain", "influence", "model_accuracy",
                  "model_f1"]


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for row in rows:
        w.writerow([f"{row[c]:.6f}" if isinstance(row[c], float) else row[c]
                    for c in REPORT_COLUMNS])
    return buf.getvalue()
