"""Tabular data loading, splitting, feature domains and min-max normalization."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import ConfigError, DataError

INTEGER, REAL = "integer", "real"


@dataclass
class FeatureDomain:
    name: str
    dtype: str
    min: float
    max: float
    cuts: Optional[list] = None

    def __post_init__(self):
        if self.dtype not in (INTEGER, REAL):
            raise DataError(f"{self.name}: unknown dtype {self.dtype!r}")
        self.min, self.max = float(self.min), float(self.max)
        if self.min > self.max:
            raise DataError(f"{self.name}: min {self.min} > max {self.max}")
        if self.dtype == INTEGER and not (self.min.is_integer() and self.max.is_integer()):
            raise DataError(f"{self.name}: integer domain with fractional bounds")

    def contains(self, value):
        value = float(value)
        if not self.min <= value <= self.max:
            return False
        return self.dtype == REAL or value.is_integer()


def in_domain(x, domains):
    return all(d.contains(v) for v, d in zip(x, domains))


@dataclass
class Normalization:
    """Per-feature min/max used for scaling into [0, 1]."""

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        self.mins = np.asarray(self.mins, dtype=np.float64)
        self.maxs = np.asarray(self.maxs, dtype=np.float64)

    @property
    def _span(self):
        span = self.maxs - self.mins
        return np.where(span > 0, span, 1.0)

    def transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        # constant columns map to 0
        return np.where(self.maxs > self.mins, (X - self.mins) / self._span, 0.0)

    def inverse(self, Z):
        Z = np.asarray(Z, dtype=np.float64)
        return np.where(self.maxs > self.mins, Z * self._span + self.mins, self.mins)

    def to_dict(self):
        return {"min": self.mins.tolist(), "max": self.maxs.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["min"], d["max"])

    @classmethod
    def identity(cls, n_features):
        return cls(np.zeros(n_features), np.ones(n_features))


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: list
    class_names: list
    domains: Optional[list] = None
    normalization: Optional[Normalization] = None
    indices: Optional[np.ndarray] = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.ndim != 2 or len(self.X) != len(self.y):
            raise DataError(f"feature rows ({len(self.X)}) and labels ({len(self.y)}) disagree")
        if self.indices is None:
            self.indices = np.arange(len(self.y))

    @property
    def n_samples(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]

    @property
    def n_classes(self):
        return len(self.class_names)

    @property
    def Xn(self):
        """Normalized features (identity if no record is attached)."""
        if self.normalization is None:
            return self.X
        return self.normalization.transform(self.X)

    def subset(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        return replace(self, X=self.X[idx], y=self.y[idx], indices=self.indices[idx])


# --------------------------------------------------------------------------- loading


def _parse_number(text, row, col):
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"row {row}, column {col!r}: non-numeric value {text!r}") from None
    if not math.isfinite(value):
        raise DataError(f"row {row}, column {col!r}: non-finite value {text!r}")
    return value


def load_csv(path, label_column=None, dtype_hints=None):
    """Read a headed CSV into a :class:`Dataset`.

    ``label_column`` defaults to the last column. Class labels are mapped to
    0..Z-1 in order of first appearance. ``dtype_hints`` maps feature names to
    ``"integer"`` or ``"real"``; integer-hinted columns must hold whole numbers.
    """
    dtype_hints = dtype_hints or {}
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if not rows:
        raise DataError(f"{path}: empty file")
    header, body = [h.strip() for h in rows[0]], rows[1:]
    if not body:
        raise DataError(f"{path}: no data rows")
    if label_column is None:
        label_column = header[-1]
    if label_column not in header:
        raise DataError(f"{path}: label column {label_column!r} not found")
    unknown = set(dtype_hints) - set(header)
    if unknown:
        raise DataError(f"{path}: dtype hints for missing columns {sorted(unknown)}")
    li = header.index(label_column)
    feat_cols = [i for i in range(len(header)) if i != li]
    names = [header[i] for i in feat_cols]

    X = np.empty((len(body), len(feat_cols)))
    classes, y = {}, []
    for r, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise DataError(f"row {r}: expected {len(header)} cells, got {len(row)}")
        cells = [c.strip() for c in row]
        for j, i in enumerate(feat_cols):
            if cells[i] == "":
                raise DataError(f"row {r}, column {header[i]!r}: missing value")
            X[r - 2, j] = _parse_number(cells[i], r, header[i])
        label = cells[li]
        if label == "":
            raise DataError(f"row {r}: missing label")
        y.append(classes.setdefault(label, len(classes)))

    for j, name in enumerate(names):
        if dtype_hints.get(name) == INTEGER:
            bad = np.flatnonzero(X[:, j] != np.round(X[:, j]))
            if bad.size:
                raise DataError(f"row {bad[0] + 2}, column {name!r}: {X[bad[0], j]} "
                                "violates integer domain")
        elif name in dtype_hints and dtype_hints[name] != REAL:
            raise DataError(f"column {name!r}: unknown dtype hint {dtype_hints[name]!r}")
    return Dataset(X, np.array(y), names, list(classes))


def write_csv(path, dataset: Dataset, label_column="class"):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*dataset.feature_names, label_column])
        for row, label in zip(dataset.X, dataset.y):
            w.writerow([repr(float(v)) if not float(v).is_integer() else str(int(v)) for v in row]
                       + [dataset.class_names[label]])


@dataclass
class Manifest:
    """Dataset description: where the CSV lives and how to read it."""

    data: Path
    label_column: Optional[str] = None
    dtypes: dict = field(default_factory=dict)
    domains: dict = field(default_factory=dict)
    plain_names: dict = field(default_factory=dict)
    subject: str = "the sample"
    train: dict = field(default_factory=dict)
    name: Optional[str] = None

    def load(self):
        return load_csv(self.data, self.label_column, self.dtypes)


def load_manifest(path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid manifest ({exc})") from None
    if "data" not in doc:
        raise DataError(f"{path}: manifest needs a 'data' entry")
    data = Path(doc["data"])
    if not data.is_absolute():
        data = path.parent / data
    return Manifest(
        data=data,
        label_column=doc.get("label_column"),
        dtypes=doc.get("dtypes", {}),
        domains=doc.get("domains", {}),
        plain_names=doc.get("plain_names", {}),
        subject=doc.get("subject", "the sample"),
        train=doc.get("train", {}),
        name=doc.get("name", path.stem),
    )


# --------------------------------------------------------------------------- splitting


def split(dataset: Dataset, ratios=(0.8, 0.1, 0.1), seed=0):
    """Seeded, unstratified train/validation/test partition of the rows."""
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or min(ratios) <= 0 or abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"ratios must be three positive numbers summing to 1, got {ratios}")
    n = dataset.n_samples
    n_val = int(round(ratios[1] * n))
    n_test = int(round(ratios[2] * n))
    n_train = n - n_val - n_test
    if min(n_train, n_val, n_test) < 1:
        raise DataError(f"split of {n} rows by {ratios} leaves an empty part")
    perm = np.random.default_rng(seed).permutation(n)
    parts = np.split(perm, [n_train, n_train + n_val])
    return tuple(dataset.subset(np.sort(p)) for p in parts)


# --------------------------------------------------------------------------- domains


def infer_domains(dataset: Dataset, overrides=None):
    """Per-feature min/max (and integer typing) observed in ``dataset``.

    ``overrides`` maps feature names to dicts with any of min/max/dtype.
    """
    if dataset.n_samples == 0:
        raise DataError("cannot infer domains from an empty split")
    overrides = overrides or {}
    domains = []
    for j, name in enumerate(dataset.feature_names):
        col = dataset.X[:, j]
        whole = bool(np.all(col == np.round(col)))
        spec = dict(dtype=INTEGER if whole else REAL, min=col.min(), max=col.max())
        spec.update(overrides.get(name, {}))
        domains.append(FeatureDomain(name, spec["dtype"], spec["min"], spec["max"]))
    return domains


def project_to_domains(x, domains):
    """Clamp to each domain; integer features are rounded half away from zero, then re-clamped."""
    out = np.array(x, dtype=np.float64, copy=True)
    for j, d in enumerate(domains):
        v = min(max(out[j], d.min), d.max)
        if d.dtype == INTEGER:
            v = math.copysign(math.floor(abs(v) + 0.5), v)
            v = min(max(v, d.min), d.max)
        out[j] = v
    return out


# --------------------------------------------------------------------------- normalization


def normalize(dataset: Dataset, record: Optional[Normalization] = None):
    """Min-max scale ``dataset``; statistics come from ``record`` or the data itself.

    Returns the normalized copy and the record used.
    """
    if record is None:
        record = Normalization(dataset.X.min(axis=0), dataset.X.max(axis=0))
    return replace(dataset, X=record.transform(dataset.X), normalization=None), record


class MinMaxNormalizer(TransformerMixin, BaseEstimator):
    """Transformer form of :func:`normalize` (constant columns map to 0)."""

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.record_ = Normalization(X.min(axis=0), X.max(axis=0))
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "record_")
        return self.record_.transform(check_array(X, dtype=np.float64))

    def inverse_transform(self, X):
        check_is_fitted(self, "record_")
        return self.record_.inverse(check_array(X, dtype=np.float64))
