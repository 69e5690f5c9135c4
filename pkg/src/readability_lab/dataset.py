"""Design-matrix assembly, per-fold scaling and variance-targeted PCA.

Conventions, fixed so tests and reports agree: the scaler uses the
population standard deviation (divide by n); PCA uses the sample
covariance (divide by n - 1) and makes each component's largest-magnitude
coordinate positive.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .validation import check_fitted, check_matrix, check_n_features

MODES = ("ling_only", "emb_only", "combined")
PCA_PERCENTAGES = (25, 50, 75, 95, 100)


@dataclass(frozen=True)
class Dataset:
    """Aligned design matrix with labels and named columns.

    ``block_boundary`` is the column index where embedding columns begin
    (equal to the column count when there is no embedding block).
    """

    X: np.ndarray
    y: np.ndarray
    column_names: tuple[str, ...]
    block_boundary: int

    def __post_init__(self):
        if self.X.shape[0] != self.y.shape[0]:
            raise ValueError("X and y row counts differ")
        if len(self.column_names) != self.X.shape[1]:
            raise ValueError("column_names length does not match X")
        if not np.isfinite(self.X).all():
            raise ValueError("X contains non-finite values")

    @property
    def n_documents(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]


def assemble(ling, emb, y, mode: str = "combined", ling_names=None) -> Dataset:
    """Build a dataset from the linguistic block, the embedding block, or both.

    Combined mode concatenates columnwise as [linguistic | embedding].
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    y = np.asarray(y, dtype=int)

    blocks = []
    names: list[str] = []
    if mode in ("ling_only", "combined"):
        ling = check_matrix(ling, name="ling")
        if ling.shape[1] == 0:
            raise ValueError("linguistic block is empty")
        if ling_names is None:
            ling_names = [f"ling_{i}" for i in range(ling.shape[1])]
        if len(ling_names) != ling.shape[1]:
            raise ValueError("ling_names length does not match the linguistic block")
        blocks.append(ling)
        names.extend(ling_names)
    if mode in ("emb_only", "combined"):
        emb = check_matrix(emb, name="emb")
        if emb.shape[1] == 0:
            raise ValueError("embedding block is empty")
        blocks.append(emb)
        names.extend(f"emb_{i}" for i in range(emb.shape[1]))

    if len(blocks) == 2 and blocks[0].shape[0] != blocks[1].shape[0]:
        raise ValueError(
            f"row mismatch: linguistic block has {blocks[0].shape[0]} rows, "
            f"embedding block has {blocks[1].shape[0]}"
        )
    X = np.hstack(blocks)
    boundary = X.shape[1] - (blocks[-1].shape[1] if mode != "ling_only" else 0)
    return Dataset(X=X, y=y, column_names=tuple(names), block_boundary=boundary)


def dataset_to_csv(dataset: Dataset, path: str | Path) -> None:
    """Write as CSV with header ``column_names + label``."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(dataset.column_names) + ["label"])
        for row, label in zip(dataset.X, dataset.y):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def dataset_from_csv(path: str | Path, block_boundary: int | None = None) -> Dataset:
    """Read a dataset written by :func:`dataset_to_csv`.

    The embedding block is recovered from the first ``emb_``-prefixed column
    unless ``block_boundary`` is given.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[-1] != "label":
            raise ValueError(f"{path}: expected a trailing 'label' column")
        names = header[:-1]
        rows = []
        labels = []
        for row in reader:
            rows.append([float(v) for v in row[:-1]])
            labels.append(int(row[-1]))
    if block_boundary is None:
        block_boundary = next(
            (i for i, n in enumerate(names) if n.startswith("emb_")), len(names)
        )
    return Dataset(
        X=np.asarray(rows, dtype=float),
        y=np.asarray(labels, dtype=int),
        column_names=tuple(names),
        block_boundary=block_boundary,
    )


class FeatureScaler(BaseEstimator, TransformerMixin):
    """Column z-scoring with statistics learned from the fit rows only.

    Columns whose population standard deviation is below ``var_floor``
    transform to exactly zero.
    """

    def __init__(self, var_floor: float = 1e-12):
        self.var_floor = var_floor

    def fit(self, X, y=None):
        X = check_matrix(X, min_rows=2)
        self.mean_ = X.mean(axis=0)
        self.std_ = X.std(axis=0)  # population (divide by n)
        self.scale_ = np.zeros_like(self.std_)
        np.divide(1.0, self.std_, out=self.scale_, where=self.std_ >= self.var_floor)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X) -> np.ndarray:
        check_fitted(self, "mean_")
        X = check_matrix(X)
        check_n_features(self.n_features_in_, X)
        return (X - self.mean_) * self.scale_


class VariancePCA(BaseEstimator, TransformerMixin):
    """PCA keeping the smallest component count whose cumulative explained
    variance reaches ``variance_pct`` percent.

    ``variance_pct`` must be one of 25, 50, 75, 95, 100; at 100 every
    component with nonzero variance is kept, which makes the transform
    losslessly invertible.
    """

    def __init__(self, variance_pct: int = 100):
        self.variance_pct = variance_pct

    def fit(self, X, y=None):
        if self.variance_pct not in PCA_PERCENTAGES:
            raise ValueError(
                f"variance_pct must be one of {PCA_PERCENTAGES}, got {self.variance_pct}"
            )
        X = check_matrix(X, min_rows=2)
        n = X.shape[0]
        self.mean_ = X.mean(axis=0)
        centered = X - self.mean_
        _, svals, vt = np.linalg.svd(centered, full_matrices=False)
        variances = svals**2 / (n - 1)  # sample covariance eigenvalues
        total = variances.sum()
        if total <= 0.0:
            raise ValueError("cannot fit PCA on data with zero total variance")
        ratios = variances / total

        if self.variance_pct == 100:
            k = int(np.sum(variances > variances[0] * 1e-12))
        else:
            cumulative = np.cumsum(ratios)
            target = self.variance_pct / 100.0 - 1e-12
            k = int(np.searchsorted(cumulative, target) + 1)
        k = max(1, min(k, len(variances)))

        components = vt[:k].copy()
        # sign convention: largest-magnitude coordinate of each component
        # is positive, so outputs are reproducible across platforms
        for row in components:
            pivot = np.argmax(np.abs(row))
            if row[pivot] < 0:
                row *= -1.0
        self.components_ = components
        self.explained_variance_ratio_ = ratios[:k].copy()
        self.n_components_ = k
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X) -> np.ndarray:
        check_fitted(self, "components_")
        X = check_matrix(X)
        check_n_features(self.n_features_in_, X)
        return (X - self.mean_) @ self.components_.T

    def inverse_transform(self, Z) -> np.ndarray:
        check_fitted(self, "components_")
        Z = check_matrix(Z)
        return Z @ self.components_ + self.mean_
