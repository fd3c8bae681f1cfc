"""Small synthetic stand-ins for two UCI tables (Pima diabetes, Wisconsin breast
cancer), used for desk-scale runs where the originals are not at hand.

The class-conditional marginals follow the published per-class summary
statistics of the originals; the separation knobs were set so that a min-max
scaled logistic regression lands near the accuracy reported for them.
"""
import json
from pathlib import Path

import numpy as np

from .data import Dataset, write_csv

# name, neg mean, neg sd, pos mean, pos sd, min, max, integer
_DIABETES = [
    ("pregnancies", 3.3, 3.0, 4.9, 3.7, 0, 17, True),
    ("glucose", 110, 26, 141, 32, 44, 199, True),
    ("blood_pressure", 68, 18, 71, 21, 24, 122, True),
    ("skin_thickness", 20, 15, 22, 17.7, 0, 99, True),
    ("insulin", 69, 98, 100, 138, 0, 846, True),
    ("bmi", 30.3, 7.7, 35.1, 7.3, 18.2, 67.1, False),
    ("pedigree", 0.43, 0.30, 0.55, 0.37, 0.078, 2.42, False),
    ("age", 31, 11.7, 37, 11, 21, 81, True),
]
DIABETES_SHRINK = 0.85

CANCER_FEATURES = [
    "clump_thickness", "cell_size_uniformity", "cell_shape_uniformity", "marginal_adhesion",
    "single_epithelial_cell_size", "bare_nuclei", "bland_chromatin", "normal_nucleoli",
    "mitoses",
]
_CANCER_LOAD = np.array([1.3, 1.6, 1.5, 1.2, 1.0, 1.7, 1.2, 1.3, 0.5])
_CANCER_NOISE = np.array([1.0, 1.0, 1.0, 1.2, 1.0, 1.5, 1.0, 1.3, 0.8])
CANCER_SEPARATION = 3.3

# hidden sizes / learning rate / patience per the reference training setup
TRAIN_SETTINGS = {
    "diabetes": {"hidden_sizes": [15, 7], "learning_rate": 0.01, "patience": 10},
    "cancer95": {"hidden_sizes": [15, 15], "learning_rate": 0.001, "patience": 10},
}


def make_diabetes_like(n=768, seed=0):
    rng = np.random.default_rng(seed)
    y = (rng.random(n) < 268 / 768).astype(int)
    X = np.empty((n, len(_DIABETES)))
    for j, (_, m0, s0, m1, s1, lo, hi, integer) in enumerate(_DIABETES):
        m1 = m0 + DIABETES_SHRINK * (m1 - m0)
        v = np.clip(np.where(y == 1, rng.normal(m1, s1, n), rng.normal(m0, s0, n)), lo, hi)
        X[:, j] = np.round(v) if integer else np.round(v, 3)
    return Dataset(X, y, [s[0] for s in _DIABETES], ["negative", "positive"])


def make_cancer95_like(n=699, seed=0):
    """Nine 1..10 cytology scores driven by one latent severity (so they correlate)."""
    rng = np.random.default_rng(seed)
    y = (rng.random(n) < 241 / 699).astype(int)
    sev = np.where(y == 1, rng.normal(CANCER_SEPARATION, 1.2, n), rng.normal(0.0, 0.8, n))
    raw = np.maximum(sev, 0)[:, None] * _CANCER_LOAD + rng.normal(0, 1.2, (n, 9)) * _CANCER_NOISE
    X = 1 + np.clip(np.round(raw), 0, 9)
    return Dataset(X, y, list(CANCER_FEATURES), ["benign", "malignant"])


def with_duplicates(ds: Dataset, columns, suffix="_copy"):
    """Append exact copies of ``columns`` (indices) to a dataset."""
    cols = list(columns)
    X = np.hstack([ds.X, ds.X[:, cols]])
    names = ds.feature_names + [ds.feature_names[j] + suffix for j in cols]
    return Dataset(X, ds.y, names, ds.class_names)


DESK = {
    "diabetes": make_diabetes_like,
    "cancer95": make_cancer95_like,
}

PLAIN_NAMES = {
    "cancer95": {"bare_nuclei": "bare nucleus", "mitoses": "mitosis"},
}
SUBJECTS = {"cancer95": "the patient", "diabetes": "the patient"}


def write_desk_dataset(name, directory, seed=0):
    """Write ``<name>.csv`` and ``<name>.json`` (manifest) into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    ds = DESK[name](seed=seed)
    csv_path = directory / f"{name}.csv"
    write_csv(csv_path, ds, label_column="class")
    integer = [n for j, n in enumerate(ds.feature_names)
               if np.all(ds.X[:, j] == np.round(ds.X[:, j]))]
    manifest = {
        "name": name,
        "data": csv_path.name,
        "label_column": "class",
        "dtypes": {n: ("integer" if n in integer else "real") for n in ds.feature_names},
        "plain_names": PLAIN_NAMES.get(name, {}),
        "subject": SUBJECTS.get(name, "the sample"),
        "train": TRAIN_SETTINGS.get(name, {}),
    }
    man_path = directory / f"{name}.json"
    man_path.write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return man_path
