"""Command line: ``contrastive train|explain|evaluate|rank|synth``.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 no contrastive
sample found (explain only).
"""
from __future__ import annotations

import csv
import json
import logging
import sys
from pathlib import Path

import click

from . import __version__
from .data import Manifest, load_manifest
from .datasets import DESK, write_desk_dataset
from .exceptions import (ConfigError, DataError, ExplanationError, ShapeError,
                         TrainingDivergedError)
from .explainer import DEFAULT_TEMPLATES, DEGREES, extract_predicate, load_templates, render_text
from .generator import GenerationConfig, grace
from .metrics import LITERAL, OFFDIAG
from .nn import TrainConfig, load_model, save_model
from .pipeline import (METHODS, evaluate, evaluate_model, fit_model, prepare, rows_to_csv,
                       test_scores)
from .entropy import entropy_filter
from .ranking import rank_features

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NO_FLIP = 0, 1, 2, 3


def _load_data(path):
    """A ``.json`` path is a manifest; anything else is a CSV whose last column is the label."""
    path = Path(path)
    if not path.exists():
        raise click.UsageError(f"data file not found: {path}")
    if path.suffix.lower() == ".json":
        man = load_manifest(path)
    else:
        man = Manifest(data=path, name=path.stem)
    return man.load(), man


def _train_config(man, seed, hidden, lr, batch_size, patience, max_epochs):
    t = man.train
    return TrainConfig(
        hidden_sizes=hidden or t.get("hidden_sizes", (15, 15)),
        batch_size=batch_size or t.get("batch_size", 512),
        learning_rate=lr or t.get("learning_rate", 0.001),
        early_stopping_patience=patience or t.get("patience", 3),
        max_epochs=max_epochs or t.get("max_epochs", 500),
        rng_seed=seed,
    )


def _gen_options(f):
    opts = [
        click.option("--k", "k", type=int, default=5, show_default=True,
                     help="Maximum number of perturbed features."),
        click.option("--gamma", type=float, default=0.5, show_default=True,
                     help="Upper bound on pairwise symmetrical uncertainty."),
        click.option("--steps", type=int, default=200, show_default=True),
        click.option("--anchor", type=click.Choice(["original", "current"]), default="original",
                     show_default=True),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _train_options(f):
    opts = [
        click.option("--hidden", type=int, nargs=2, default=None, help="Two hidden layer sizes."),
        click.option("--lr", type=float, default=None),
        click.option("--batch-size", type=int, default=None),
        click.option("--patience", type=int, default=None),
        click.option("--max-epochs", type=int, default=None),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


seed_option = click.option("--seed", type=int, envvar="GRACE_SEED", default=None,
                           help="Random seed (falls back to $GRACE_SEED).")


@click.group()
@click.version_option(__version__)
@click.option("-v", "--verbose", is_flag=True)
def cli(verbose):
    """Contrastive explanations for feed-forward tabular classifiers."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


@cli.command()
@click.option("--data", required=True, help="Dataset manifest (.json) or CSV.")
@click.option("--out", "--model", "out", required=True, help="Where to write the model JSON.")
@seed_option
@_train_options
def train(data, out, seed, hidden, lr, batch_size, patience, max_epochs):
    """Train a network on the training split and report test accuracy / macro-F1."""
    if seed is None:
        raise click.UsageError("--seed (or GRACE_SEED) is required for train")
    ds, man = _load_data(data)
    prep = prepare(ds, seed, man.name or "data", man.domains)
    net = fit_model(prep, _train_config(man, seed, hidden, lr, batch_size, patience, max_epochs))
    save_model(net, out, seed=seed, dataset=prep.name)
    acc, f1 = test_scores(net, prep.test)
    click.echo(f"test_accuracy={acc:.4f} macro_f1={f1:.4f}")
    return EXIT_OK


def _model_and_split(model, data, seed):
    net, doc = load_model(model)
    ds, man = _load_data(data)
    if ds.n_features != net.n_features:
        raise ShapeError(f"model expects {net.n_features} features, data has {ds.n_features}")
    seed = doc.get("seed", seed)
    if seed is None:
        raise click.UsageError("model carries no seed; pass --seed")
    prep = prepare(ds, seed, man.name or "data", man.domains)
    return net, ds, man, prep


@cli.command()
@click.option("--model", required=True)
@click.option("--data", required=True)
@click.option("--row", type=int, required=True, help="0-based data row to explain.")
@click.option("--mode", type=click.Choice(["gradient", "local"]), default="gradient",
              show_default=True)
@_gen_options
@click.option("--template", default=None, help="Template id (default: seeded choice).")
@click.option("--templates", "templates_path", default=None, help="Template file (JSON).")
@click.option("--degree", type=click.Choice(DEGREES), default="exact", show_default=True)
@seed_option
def explain(model, data, row, mode, k, gamma, steps, anchor, template, templates_path, degree,
            seed):
    """Generate a contrastive sample for one row and print it with its explanation."""
    net, ds, man, prep = _model_and_split(model, data, seed)
    if not 0 <= row < ds.n_samples:
        raise DataError(f"row {row} out of range [0, {ds.n_samples})")
    config = GenerationConfig(k=k, gamma=gamma, steps=steps, mode=mode, anchor=anchor)
    res = grace(net, ds.X[row], prep.train, config, su=prep.su, domains=prep.domains)
    for w in res.warnings:
        click.echo(f"warning: {w}", err=True)
    record = res.to_dict(ds.feature_names, net.class_labels)
    record["row"] = row
    text = None
    if res.success:
        templates = load_templates(templates_path) if templates_path else DEFAULT_TEMPLATES
        pred = extract_predicate(res.x, res.x_tilde, ds.feature_names,
                                 net.class_labels[res.y_orig], net.class_labels[res.y_tilde],
                                 order=res.S)
        text = render_text(pred, template, degree, man.plain_names, man.subject, templates,
                           seed=seed or 0).text
    record["text"] = text
    click.echo(json.dumps(record))
    click.echo(text if text is not None else "no contrastive sample found")
    return EXIT_OK if res.success else EXIT_NO_FLIP


@cli.command()
@click.option("--data", required=True)
@click.option("--model", default=None, help="Use this trained model (single run) instead of training.")
@click.option("--methods", default=",".join(METHODS), show_default=True)
@click.option("--runs", type=int, default=1, show_default=True)
@click.option("--sweep", type=click.Choice(["k", "gamma"]), default=None)
@click.option("--info-gain", "variant", type=click.Choice([LITERAL, OFFDIAG]), default=LITERAL,
              show_default=True)
@click.option("--out", default=None, help="CSV report path (default: stdout).")
@_gen_options
@_train_options
@seed_option
def evaluate_cmd(data, model, methods, runs, sweep, variant, out, k, gamma, steps, anchor,
                 hidden, lr, batch_size, patience, max_epochs, seed):
    """Score every method on the test split; one CSV row per (method, K, gamma)."""
    if seed is None and model is None:
        raise click.UsageError("--seed (or GRACE_SEED) is required for evaluate")
    methods = [m.strip() for m in methods.split(",") if m.strip()]
    bad = set(methods) - set(METHODS)
    if bad or not methods:
        raise click.UsageError(f"unknown methods {sorted(bad)}; choose from {METHODS}")
    if runs < 1:
        raise click.UsageError("--runs must be >= 1")
    ds, man = _load_data(data)
    gen = GenerationConfig(k=k, gamma=gamma, steps=steps, anchor=anchor)
    tcfg = _train_config(man, seed, hidden, lr, batch_size, patience, max_epochs)
    if model is not None:
        if runs != 1:
            raise click.UsageError("--model evaluates a single trained model; drop --runs")
        net, _, _, prep = _model_and_split(model, data, seed)
        rows = evaluate_model(net, prep, methods=methods, gen_config=gen, sweep=sweep,
                              variant=variant)
    else:
        rows = evaluate(ds, name=man.name or "data", methods=methods, seed=seed, runs=runs,
                        train_config=tcfg, gen_config=gen, sweep=sweep, variant=variant,
                        domain_overrides=man.domains)
    report = rows_to_csv(rows)
    if out:
        Path(out).write_text(report, encoding="utf-8")
    else:
        click.echo(report, nl=False)
    return EXIT_OK


cli.add_command(evaluate_cmd, name="evaluate")


@cli.command()
@click.option("--model", required=True)
@click.option("--data", required=True)
@click.option("--row", type=int, required=True)
@click.option("--mode", type=click.Choice(["gradient", "local"]), default="gradient",
              show_default=True)
@click.option("--gamma", type=float, default=0.5, show_default=True)
@click.option("--su-out", default=None, help="Also write the SU matrix as CSV.")
@seed_option
def rank(model, data, row, mode, gamma, su_out, seed):
    """Print the ranked features for one row, marking those kept by the SU filter."""
    net, ds, man, prep = _model_and_split(model, data, seed)
    if not 0 <= row < ds.n_samples:
        raise DataError(f"row {row} out of range [0, {ds.n_samples})")
    z = prep.normalization.transform(ds.X[row])
    ranked = rank_features(net, z, mode, prep.train.Xn, 4)
    for w in ranked.warnings:
        click.echo(f"warning: {w}", err=True)
    kept = set(entropy_filter(ranked.order, gamma, prep.su))
    click.echo(f"# mode={ranked.mode} contrastive_class={net.class_labels[ranked.v]}"
               if ranked.v is not None else f"# mode={ranked.mode}")
    for j, s in zip(ranked.order, ranked.scores):
        click.echo(f"{ds.feature_names[j]}\t{s:.6g}\t{'kept' if j in kept else 'filtered'}")
    if su_out:
        mat = prep.su.full()
        with open(su_out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["feature", *ds.feature_names])
            for name, r in zip(ds.feature_names, mat):
                w.writerow([name, *(f"{v:.6f}" for v in r)])
    return EXIT_OK


@cli.command()
@click.option("--name", type=click.Choice(sorted(DESK)), required=True)
@click.option("--out", "directory", required=True, help="Output directory.")
@click.option("--seed", type=int, default=0, show_default=True)
def synth(name, directory, seed):
    """Write a synthetic desk dataset (CSV + manifest)."""
    path = write_desk_dataset(name, directory, seed)
    click.echo(str(path))
    return EXIT_OK


def main(argv=None):
    try:
        code = cli.main(args=argv, prog_name="contrastive", standalone_mode=False)
    except click.exceptions.Abort:
        return EXIT_USAGE
    except (click.UsageError, ConfigError) as exc:
        click.echo(f"error: {exc.format_message() if hasattr(exc, 'format_message') else exc}",
                   err=True)
        return EXIT_USAGE
    except (DataError, ShapeError, ExplanationError, TrainingDivergedError, OSError,
            KeyError, json.JSONDecodeError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_DATA
    return code if isinstance(code, int) else EXIT_OK


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
