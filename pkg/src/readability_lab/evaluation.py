"""Stratified cross-validation, weighted F1 and the two rank statistics.

Fold hygiene is structural: scaling and PCA are fitted inside each fold on
the training rows only, and every fold record stores the fitted scaler
statistics so the no-leakage property can be audited from the report.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import stats as _scipy_stats

from .dataset import Dataset, FeatureScaler, VariancePCA
from .models import ModelSpec, make_model
from .rng import SplitMix64, derive_seed

EXACT_MWU_LIMIT = 30  # combined sample size up to which the exact null is used


@dataclass(frozen=True)
class FoldPlan:
    """Per-document fold assignments for k-fold cross-validation."""

    k: int
    assignments: tuple[int, ...]
    seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.assignments) == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.assignments) != fold)


@dataclass
class EvalReport:
    """Per-fold and aggregate scores for one (setup, dataset) evaluation."""

    setup: dict
    fold_scores: list
    mean_f1: float | None
    confusion: list
    folds: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "setup": self.setup,
            "fold_scores": self.fold_scores,
            "mean_f1": self.mean_f1,
            "confusion": self.confusion,
            "folds": self.folds,
            "warnings": self.warnings,
        }


@dataclass(frozen=True)
class TestResult:
    """Outcome of a two-sample test."""

    statistic: float
    p_value: float
    method: str
    sample_sizes: tuple[int, int]


def stratified_kfold(y, k: int, seed: int) -> FoldPlan:
    """Assign documents to k folds, stratified by class.

    Within each class (in class-index order) the document indices are
    shuffled by the seeded stream and dealt to folds by a round-robin
    pointer that persists across classes, which keeps both the fold sizes
    and the per-class fold counts within one of each other.
    """
    y = np.asarray(y, dtype=int)
    n = y.size
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of documents ({n})")
    rng = SplitMix64(seed)
    assignments = np.full(n, -1, dtype=int)
    pointer = 0
    for cls in np.unique(y):
        members = list(np.flatnonzero(y == cls))
        if len(members) < k:
            warnings.warn(
                f"class {cls} has only {len(members)} members for k={k}; "
                "some folds will lack it",
                stacklevel=2,
            )
        rng.shuffle(members)
        for idx in members:
            assignments[idx] = pointer % k
            pointer += 1
    return FoldPlan(k=k, assignments=tuple(int(a) for a in assignments), seed=seed)


def confusion_matrix(y_true, y_pred, n_classes: int | None = None) -> np.ndarray:
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    if n_classes is None:
        n_classes = int(max(y_true.max(), y_pred.max())) + 1
    out = np.zeros((n_classes, n_classes), dtype=int)
    np.add.at(out, (y_true, y_pred), 1)
    return out


def weighted_f1(y_true, y_pred) -> float:
    """Per-class F1 averaged with weights proportional to true-class support.

    A class with no predictions and no true positives contributes F1 = 0.
    """
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise ValueError("y_true and y_pred must be 1-D and the same length")
    if y_true.size == 0:
        raise ValueError("cannot score empty label vectors")
    cm = confusion_matrix(y_true, y_pred)
    tp = np.diag(cm).astype(float)
    support = cm.sum(axis=1).astype(float)
    predicted = cm.sum(axis=0).astype(float)
    denom = support + predicted
    with np.errstate(invalid="ignore", divide="ignore"):
        f1 = np.where(denom > 0, 2.0 * tp / np.where(denom > 0, denom, 1.0), 0.0)
    return float((f1 * support).sum() / support.sum())


def cross_validate(
    dataset: Dataset,
    spec: ModelSpec,
    plan: FoldPlan,
    pca_pct: int | None = None,
) -> EvalReport:
    """Evaluate a model spec over a fold plan with leakage-free preprocessing.

    For every fold the scaler (and PCA when ``pca_pct`` is set) is fitted on
    the training rows only. Folds whose training rows collapse to a single
    class are skipped with a recorded warning.
    """
    if len(plan.assignments) != dataset.n_documents:
        raise ValueError("fold plan does not cover the dataset rows")
    n_classes = int(dataset.y.max()) + 1
    fold_scores: list[float | None] = []
    fold_records: list[dict] = []
    notes: list[str] = []
    confusion = np.zeros((n_classes, n_classes), dtype=int)

    for fold in range(plan.k):
        train_idx = plan.train_indices(fold)
        test_idx = plan.test_indices(fold)
        y_train = dataset.y[train_idx]
        y_test = dataset.y[test_idx]
        if np.unique(y_train).size < 2:
            notes.append(f"fold {fold} skipped: training rows contain a single class")
            fold_scores.append(None)
            fold_records.append({"fold": fold, "skipped": True})
            continue

        scaler = FeatureScaler().fit(dataset.X[train_idx])
        X_train = scaler.transform(dataset.X[train_idx])
        X_test = scaler.transform(dataset.X[test_idx])
        retained = None
        if pca_pct is not None:
            pca = VariancePCA(variance_pct=pca_pct).fit(X_train)
            X_train = pca.transform(X_train)
            X_test = pca.transform(X_test)
            retained = pca.n_components_

        model = make_model(spec, seed=derive_seed(spec.seed, fold))
        model.fit(X_train, y_train)
        y_hat = model.predict(X_test)
        score = weighted_f1(y_test, y_hat)
        fold_scores.append(score)
        confusion += confusion_matrix(y_test, y_hat, n_classes)
        fold_records.append(
            {
                "fold": fold,
                "skipped": False,
                "f1": score,
                "n_train": int(train_idx.size),
                "n_test": int(test_idx.size),
                "scaler_mean": [float(v) for v in scaler.mean_],
                "scaler_std": [float(v) for v in scaler.std_],
                "retained_dims": retained,
            }
        )

    scored = [s for s in fold_scores if s is not None]
    mean_f1 = float(np.mean(scored)) if scored else None
    if not scored:
        notes.append("all folds skipped; no score available")
    setup = {
        "algorithm": spec.algorithm,
        "params": dict(spec.params),
        "seed": spec.seed,
        "k": plan.k,
        "plan_seed": plan.seed,
        "fold_assignments": list(plan.assignments),
        "pca_pct": pca_pct,
        "n_documents": dataset.n_documents,
        "n_features": dataset.n_features,
        "block_boundary": dataset.block_boundary,
    }
    return EvalReport(
        setup=setup,
        fold_scores=fold_scores,
        mean_f1=mean_f1,
        confusion=confusion.tolist(),
        folds=fold_records,
        warnings=notes,
    )


def _midranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with tied values sharing the mean of their rank range."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=float)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


@lru_cache(maxsize=None)
def _u_null_counts(n_a: int, n_b: int) -> tuple[int, ...]:
    """Null distribution of the U statistic: counts[u] over u = 0..n_a*n_b.

    Dynamic programming over the number of rank assignments; counts sum to
    C(n_a + n_b, n_a).
    """
    max_u = n_a * n_b
    # classic two-way recurrence: c(m, n, u) = c(m-1, n, u-n) + c(m, n-1, u)
    prev = [[0] * (max_u + 1) for _ in range(n_a + 1)]
    for m in range(n_a + 1):
        prev[m][0] = 1  # n = 0: only u = 0 is reachable
    for n in range(1, n_b + 1):
        cur = [[0] * (max_u + 1) for _ in range(n_a + 1)]
        cur[0][0] = 1
        for m in range(1, n_a + 1):
            for u in range(0, max_u + 1):
                total = cur[m - 1][u - n] if u >= n else 0
                total += prev[m][u]
                cur[m][u] = total
        prev = cur
    return tuple(prev[n_a])


def mann_whitney_u(a, b) -> TestResult:
    """Two-tailed Mann-Whitney U test.

    U is the smaller of the two one-sided statistics (midranks for ties).
    With a combined size of at most 30 and no ties the p-value is exact,
    from full enumeration of the null distribution; otherwise it is the
    normal approximation with tie-corrected variance and continuity
    correction. The p-value is capped into (0, 1].
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    n_a, n_b = a.size, b.size
    pooled = np.concatenate([a, b])
    ranks = _midranks(pooled)
    r_a = ranks[:n_a].sum()
    u_a = r_a - n_a * (n_a + 1) / 2.0
    u_b = n_a * n_b - u_a
    u_min = min(u_a, u_b)

    has_ties = np.unique(pooled).size < pooled.size
    if n_a + n_b <= EXACT_MWU_LIMIT and not has_ties:
        counts = _u_null_counts(n_a, n_b)
        total = sum(counts)
        tail = sum(counts[: int(u_min) + 1])  # tie-free: u_min is integral
        p = min(1.0, 2.0 * tail / total)
        method = "exact"
    else:
        n = n_a + n_b
        tie_sizes = np.unique(pooled, return_counts=True)[1]
        tie_term = float(((tie_sizes**3 - tie_sizes)).sum()) / (n * (n - 1))
        sigma_sq = n_a * n_b / 12.0 * ((n + 1) - tie_term)
        method = "normal-approximation"
        if sigma_sq <= 0.0:
            p = 1.0  # every pooled value identical
        else:
            mu = n_a * n_b / 2.0
            z = (u_min - mu + 0.5) / np.sqrt(sigma_sq)
            p = min(1.0, 2.0 * float(_scipy_stats.norm.cdf(z)))
    p = max(p, np.finfo(float).tiny)
    return TestResult(
        statistic=float(u_min), p_value=p, method=method, sample_sizes=(n_a, n_b)
    )


def variance_equality(a, b) -> TestResult:
    """Median-centered Levene test of equal spread for two samples.

    The F statistic of the absolute deviations from each group's median has
    (1, n - 2) degrees of freedom. Two degenerate constant samples give
    p = 1.0 by convention.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least 2 values")
    z_a = np.abs(a - np.median(a))
    z_b = np.abs(b - np.median(b))
    n = a.size + b.size
    grand = np.concatenate([z_a, z_b]).mean()
    ss_between = a.size * (z_a.mean() - grand) ** 2 + b.size * (z_b.mean() - grand) ** 2
    ss_within = ((z_a - z_a.mean()) ** 2).sum() + ((z_b - z_b.mean()) ** 2).sum()
    if ss_within <= 0.0:
        if ss_between <= 0.0:
            stat, p = 0.0, 1.0
        else:
            stat, p = float("inf"), float(np.finfo(float).tiny)
    else:
        stat = (n - 2) * ss_between / ss_within
        p = float(_scipy_stats.f.sf(stat, 1, n - 2))
        p = min(1.0, max(p, float(np.finfo(float).tiny)))
    return TestResult(
        statistic=float(stat),
        p_value=p,
        method="median-levene",
        sample_sizes=(a.size, b.size),
    )
