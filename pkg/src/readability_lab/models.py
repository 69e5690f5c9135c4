"""Three classical classifiers trained from scratch on dense matrices.

All three are deterministic: logistic regression starts from zero weights,
and the SVM / random forest draw every random decision from splitmix64
streams derived from (seed, substream index). Ties in predictions always
break toward the lowest class index.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .rng import SplitMix64, derive_seed
from .validation import check_fitted, check_matrix, check_n_features, check_X_y

ALGORITHMS = ("logreg", "svm", "rf")

MODEL_FORMAT_VERSION = 1


def _one_hot(y: np.ndarray, n_classes: int) -> np.ndarray:
    out = np.zeros((y.shape[0], n_classes))
    out[np.arange(y.shape[0]), y] = 1.0
    return out


def _encode_labels(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    classes = np.unique(y)
    return classes, np.searchsorted(classes, y)


class SoftmaxRegression(BaseEstimator, ClassifierMixin):
    """Multinomial logistic regression minimizing mean cross-entropy plus
    ``l2 * ||W||^2`` by full-batch gradient descent with Armijo backtracking.

    Training stops when the gradient norm falls below ``tol`` or after
    ``max_iter`` iterations; the recorded loss trace is strictly decreasing.
    """

    def __init__(self, l2: float = 1e-4, tol: float = 1e-6, max_iter: int = 1000):
        self.l2 = l2
        self.tol = tol
        self.max_iter = max_iter

    @staticmethod
    def _loss_and_grad(W, b, X, Y, l2):
        """Mean softmax cross-entropy + l2*||W||^2 and its gradient."""
        n = X.shape[0]
        scores = X @ W.T + b
        shifted = scores - scores.max(axis=1, keepdims=True)
        log_norm = np.log(np.exp(shifted).sum(axis=1))
        log_probs = shifted - log_norm[:, None]
        loss = -(Y * log_probs).sum() / n + l2 * (W**2).sum()
        probs = np.exp(log_probs)
        grad_W = (probs - Y).T @ X / n + 2.0 * l2 * W
        grad_b = (probs - Y).sum(axis=0) / n
        return loss, grad_W, grad_b

    def fit(self, X, y):
        X, y = check_X_y(X, y, min_rows=2)
        self.classes_, codes = _encode_labels(y)
        n_classes = self.classes_.size
        if n_classes < 2:
            raise ValueError("training data contains a single class")
        Y = _one_hot(codes, n_classes)

        W = np.zeros((n_classes, X.shape[1]))
        b = np.zeros(n_classes)
        trace: list[float] = []
        step = 1.0
        for _ in range(self.max_iter):
            loss, grad_W, grad_b = self._loss_and_grad(W, b, X, Y, self.l2)
            if not math.isfinite(loss):
                raise FloatingPointError("non-finite loss during training")
            trace.append(loss)
            grad_sq = (grad_W**2).sum() + (grad_b**2).sum()
            if math.sqrt(grad_sq) < self.tol:
                break
            # Armijo backtracking: guarantees strict decrease
            step = min(step * 2.0, 1e6)
            while step > 1e-20:
                new_loss, _, _ = self._loss_and_grad(
                    W - step * grad_W, b - step * grad_b, X, Y, self.l2
                )
                if new_loss <= loss - 1e-4 * step * grad_sq:
                    break
                step *= 0.5
            else:
                break  # step underflow: no further progress possible
            W -= step * grad_W
            b -= step * grad_b

        self.coef_ = W
        self.intercept_ = b
        self.loss_trace_ = trace
        self.n_features_in_ = X.shape[1]
        return self

    def predict_scores(self, X) -> np.ndarray:
        check_fitted(self, "coef_")
        X = check_matrix(X)
        check_n_features(self.n_features_in_, X)
        return X @ self.coef_.T + self.intercept_

    def predict_proba(self, X) -> np.ndarray:
        scores = self.predict_scores(X)
        shifted = scores - scores.max(axis=1, keepdims=True)
        expd = np.exp(shifted)
        return expd / expd.sum(axis=1, keepdims=True)

    def predict(self, X) -> np.ndarray:
        return self.classes_[np.argmax(self.predict_scores(X), axis=1)]


class LinearSVM(BaseEstimator, ClassifierMixin):
    """One-vs-rest linear SVM trained by epoch-based subgradient descent.

    Each binary problem minimizes ``lam/2 * ||w||^2 + mean hinge`` with
    ``lam = 1 / (n * C)`` and step size ``1 / (lam * t)``; the example order
    is reshuffled every epoch from a seeded stream. The fitted parameters
    are the running average of the iterates, whose objective descends much
    more smoothly than the raw iterate's; ``objective_trace_[c]`` records
    that averaged iterate's objective at every epoch end. The bias is
    learned as a weight on a constant input and included in the
    regularization term.
    """

    def __init__(self, C: float = 1.0, epochs: int = 100, seed: int = 0):
        self.C = C
        self.epochs = epochs
        self.seed = seed

    def _fit_binary(self, X1, targets, lam, rng):
        n = X1.shape[0]
        theta = np.zeros(X1.shape[1])
        avg = np.zeros(X1.shape[1])
        order = list(range(n))
        t = 0
        trace = []
        for _ in range(self.epochs):
            rng.shuffle(order)
            for i in order:
                t += 1
                eta = 1.0 / (lam * t)
                margin = targets[i] * (theta @ X1[i])
                theta *= 1.0 - eta * lam
                if margin < 1.0:
                    theta += eta * targets[i] * X1[i]
                avg += (theta - avg) / t
            hinge = np.maximum(0.0, 1.0 - targets * (X1 @ avg)).mean()
            trace.append(0.5 * lam * (avg @ avg) + hinge)
        return avg, trace

    def fit(self, X, y):
        X, y = check_X_y(X, y, min_rows=2)
        self.classes_, codes = _encode_labels(y)
        if self.classes_.size < 2:
            raise ValueError("training data contains a single class")
        n = X.shape[0]
        lam = 1.0 / (n * self.C)
        X1 = np.hstack([X, np.ones((n, 1))])  # constant column carries the bias

        weights = []
        biases = []
        traces = []
        for c in range(self.classes_.size):
            targets = np.where(codes == c, 1.0, -1.0)
            rng = SplitMix64(derive_seed(self.seed, c))
            theta, trace = self._fit_binary(X1, targets, lam, rng)
            weights.append(theta[:-1])
            biases.append(theta[-1])
            traces.append(trace)

        self.coef_ = np.vstack(weights)
        self.intercept_ = np.asarray(biases)
        self.objective_trace_ = traces
        self.n_features_in_ = X.shape[1]
        return self

    def predict_scores(self, X) -> np.ndarray:
        check_fitted(self, "coef_")
        X = check_matrix(X)
        check_n_features(self.n_features_in_, X)
        return X @ self.coef_.T + self.intercept_

    def predict(self, X) -> np.ndarray:
        return self.classes_[np.argmax(self.predict_scores(X), axis=1)]


def _gini_from_counts(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return 1.0 - float((p**2).sum())


def gini_impurity(labels) -> float:
    """Gini impurity of a label multiset."""
    labels = np.asarray(labels, dtype=int)
    if labels.size == 0:
        return 0.0
    return _gini_from_counts(np.bincount(labels))


@dataclass
class _TreeNode:
    counts: np.ndarray
    feature: int = -1
    threshold: float = 0.0
    left: "_TreeNode | None" = None
    right: "_TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


def _best_split(X, codes, feat_indices, n_classes):
    """Best (gain, feature, threshold) over candidate features.

    Candidates are midpoints between consecutive distinct sorted values.
    Ties break toward the lowest feature index, then the lowest threshold,
    enforced by iterating features in ascending order and thresholds in
    ascending value with strict improvement.
    """
    parent_counts = np.bincount(codes, minlength=n_classes)
    n = codes.size
    parent_gini = _gini_from_counts(parent_counts)
    best = (0.0, -1, 0.0)
    for f in sorted(feat_indices):
        values = X[:, f]
        order = np.argsort(values, kind="stable")
        sorted_vals = values[order]
        sorted_codes = codes[order]
        change = np.nonzero(np.diff(sorted_vals))[0]
        if change.size == 0:
            continue
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), sorted_codes] = 1.0
        prefix = np.cumsum(onehot, axis=0)
        left_counts = prefix[change]
        right_counts = parent_counts - left_counts
        n_left = left_counts.sum(axis=1)
        n_right = n - n_left
        gini_left = 1.0 - (left_counts**2).sum(axis=1) / n_left**2
        gini_right = 1.0 - (right_counts**2).sum(axis=1) / n_right**2
        gains = parent_gini - (n_left * gini_left + n_right * gini_right) / n
        i = int(np.argmax(gains))  # first max: lowest threshold wins ties
        if gains[i] > best[0]:
            thr = (sorted_vals[change[i]] + sorted_vals[change[i] + 1]) / 2.0
            best = (float(gains[i]), f, float(thr))
    return best


class RandomForest(BaseEstimator, ClassifierMixin):
    """Bagged CART trees with Gini splits over ceil(sqrt(d)) random features.

    Every tree draws its bootstrap sample and feature subsets from its own
    splitmix64 stream derived from (seed, tree index), so training is
    reproducible and trees are independent given the seed.
    """

    def __init__(self, n_trees: int = 100, max_depth: int | None = None, seed: int = 0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.seed = seed

    def _draw_features(self, rng: SplitMix64, d: int, m: int) -> list[int]:
        pool = list(range(d))
        for i in range(m):
            j = i + rng.randrange(d - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:m]

    def _grow(self, X, codes, depth, rng, n_classes, m):
        counts = np.bincount(codes, minlength=n_classes)
        node = _TreeNode(counts=counts)
        if (
            np.count_nonzero(counts) <= 1
            or (self.max_depth is not None and depth >= self.max_depth)
            or codes.size < 2
        ):
            return node
        feats = self._draw_features(rng, X.shape[1], m)
        gain, feature, threshold = _best_split(X, codes, feats, n_classes)
        if feature < 0 or gain <= 0.0:
            return node
        mask = X[:, feature] < threshold
        node.feature = feature
        node.threshold = threshold
        node.left = self._grow(X[mask], codes[mask], depth + 1, rng, n_classes, m)
        node.right = self._grow(X[~mask], codes[~mask], depth + 1, rng, n_classes, m)
        return node

    def fit(self, X, y):
        if self.n_trees < 1:
            raise ValueError("n_trees must be at least 1")
        X, y = check_X_y(X, y, min_rows=1)
        self.classes_, codes = _encode_labels(y)
        if self.classes_.size < 2:
            raise ValueError("training data contains a single class")
        n, d = X.shape
        m = math.ceil(math.sqrt(d))
        self.trees_ = []
        for tree_idx in range(self.n_trees):
            rng = SplitMix64(derive_seed(self.seed, tree_idx))
            boot = np.array([rng.randrange(n) for _ in range(n)], dtype=int)
            self.trees_.append(
                self._grow(X[boot], codes[boot], 0, rng, self.classes_.size, m)
            )
        self.n_features_in_ = d
        return self

    @staticmethod
    def _tree_predict(node: _TreeNode, row: np.ndarray) -> int:
        while not node.is_leaf:
            node = node.left if row[node.feature] < node.threshold else node.right
        return int(np.argmax(node.counts))

    def predict_scores(self, X) -> np.ndarray:
        """Per-class vote fractions across trees."""
        check_fitted(self, "trees_")
        X = check_matrix(X)
        check_n_features(self.n_features_in_, X)
        votes = np.zeros((X.shape[0], self.classes_.size))
        for tree in self.trees_:
            for i, row in enumerate(X):
                votes[i, self._tree_predict(tree, row)] += 1.0
        return votes / len(self.trees_)

    def predict(self, X) -> np.ndarray:
        return self.classes_[np.argmax(self.predict_scores(X), axis=1)]


@dataclass(frozen=True)
class ModelSpec:
    """Algorithm tag, hyperparameter overrides and the training seed."""

    algorithm: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(
                f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}"
            )
        if "seed" in self.params:
            raise ValueError("the seed belongs in ModelSpec.seed, not in params")


def make_model(spec: ModelSpec, seed: int | None = None):
    """Build an unfitted estimator from a spec, optionally overriding the seed."""
    seed = spec.seed if seed is None else seed
    if spec.algorithm == "logreg":
        return SoftmaxRegression(**spec.params)
    if spec.algorithm == "svm":
        return LinearSVM(seed=seed, **spec.params)
    return RandomForest(seed=seed, **spec.params)


def _tree_to_dict(node: _TreeNode) -> dict:
    if node.is_leaf:
        return {"counts": [int(c) for c in node.counts]}
    return {
        "counts": [int(c) for c in node.counts],
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _tree_to_dict(node.left),
        "right": _tree_to_dict(node.right),
    }


def _tree_from_dict(obj: dict) -> _TreeNode:
    node = _TreeNode(counts=np.asarray(obj["counts"], dtype=float))
    if "feature" in obj:
        node.feature = int(obj["feature"])
        node.threshold = float(obj["threshold"])
        node.left = _tree_from_dict(obj["left"])
        node.right = _tree_from_dict(obj["right"])
    return node


def save_model(model, path: str | Path, class_names=None, column_names=None) -> None:
    """Serialize a fitted model to the versioned JSON artifact format."""
    check_fitted(model, "classes_")
    if isinstance(model, SoftmaxRegression):
        algorithm = "logreg"
        parameters = {
            "weights": model.coef_.tolist(),
            "bias": model.intercept_.tolist(),
        }
    elif isinstance(model, LinearSVM):
        algorithm = "svm"
        parameters = {
            "weights": model.coef_.tolist(),
            "bias": model.intercept_.tolist(),
        }
    elif isinstance(model, RandomForest):
        algorithm = "rf"
        parameters = {"trees": [_tree_to_dict(t) for t in model.trees_]}
    else:
        raise TypeError(f"cannot serialize model of type {type(model).__name__}")
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "algorithm": algorithm,
        "hyperparameters": model.get_params(),
        "parameters": parameters,
        "classes": [int(c) for c in model.classes_],
        "n_features": int(model.n_features_in_),
        "class_names": list(class_names) if class_names is not None else None,
        "column_names": list(column_names) if column_names is not None else None,
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1), encoding="utf-8")


def load_model(path: str | Path):
    """Rebuild a fitted model from a JSON artifact."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version: {version}")
    algorithm = doc["algorithm"]
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm in model file: {algorithm!r}")
    if algorithm == "logreg":
        model = SoftmaxRegression(**doc["hyperparameters"])
        model.coef_ = np.asarray(doc["parameters"]["weights"], dtype=float)
        model.intercept_ = np.asarray(doc["parameters"]["bias"], dtype=float)
        model.n_features_in_ = doc["n_features"]
    elif algorithm == "svm":
        model = LinearSVM(**doc["hyperparameters"])
        model.coef_ = np.asarray(doc["parameters"]["weights"], dtype=float)
        model.intercept_ = np.asarray(doc["parameters"]["bias"], dtype=float)
        model.n_features_in_ = doc["n_features"]
    else:
        model = RandomForest(**doc["hyperparameters"])
        model.trees_ = [_tree_from_dict(t) for t in doc["parameters"]["trees"]]
        model.n_features_in_ = doc["n_features"]
    model.classes_ = np.asarray(doc["classes"], dtype=int)
    return model
