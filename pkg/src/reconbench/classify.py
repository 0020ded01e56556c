"""Classifiers used for utility accuracy and as the ARR reference model.

All three are deterministic for a fixed seed; the SVM and tree-split inner
loops are compiled with numba:

* ``LinearSvm``: one-vs-rest hinge loss with L2 penalty
  ``lambda = 1/(C N)``, Pegasos sub-gradient steps ``1/(lambda t)`` over
  samples in a seeded order each epoch.
* ``RandomForest``: bootstrapped CART trees, Gini impurity, ``sqrt(F)``
  candidate features per split, unlimited depth.
* ``LogisticRegression``: multinomial softmax with L2 penalty, full-batch
  gradient descent with a monotone (Armijo) step-size rule.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import NumericalError, ShapeError
from .rng import Stream


class ClassifierKind(str, enum.Enum):
    LINEAR_SVM = "linear_svm"
    RANDOM_FOREST = "random_forest"
    LOGISTIC_REGRESSION = "logistic_regression"


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    svm_c: float = 1.0
    svm_epochs: int = 200
    rf_trees: int = 100
    rf_max_depth: int | None = None
    rf_min_samples_split: int = 2
    lr_l2: float = 1e-4
    lr_epochs: int = 500
    tolerance: float = 1e-6
    standardize: bool = False

    def __post_init__(self):
        counts = [self.svm_epochs, self.rf_trees, self.lr_epochs, self.rf_min_samples_split]
        if any(c <= 0 for c in counts):
            raise ValueError("all iteration and tree counts must be positive")
        if self.rf_max_depth is not None and self.rf_max_depth <= 0:
            raise ValueError("rf_max_depth must be positive or None")
        if self.tolerance <= 0 or self.svm_c <= 0 or self.lr_l2 < 0:
            raise ValueError("tolerance and svm_c must be positive, lr_l2 non-negative")


def _check_training_data(xs, labels, num_classes):
    xs = np.asarray(xs, dtype=np.float64)
    labels = np.asarray(labels)
    if xs.ndim != 2 or labels.ndim != 1 or len(labels) != len(xs):
        raise ShapeError(f"features {xs.shape} and labels {labels.shape} do not line up")
    if not np.all(np.isfinite(xs)):
        raise NumericalError("training features contain non-finite values")
    if not np.issubdtype(labels.dtype, np.integer):
        raise ValueError("labels must be integers")
    labels = labels.astype(np.int64)
    if num_classes is None:
        num_classes = int(labels.max()) + 1 if len(labels) else 0
    if num_classes < 2:
        raise ValueError("need at least two classes")
    if labels.min() < 0 or labels.max() >= num_classes:
        raise ValueError(f"labels must lie in [0, {num_classes})")
    missing = np.setdiff1d(np.arange(num_classes), labels)
    if missing.size:
        raise ValueError(f"classes {missing.tolist()} have no training samples")
    return xs, labels, num_classes


@dataclass
class _Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, xs):
        scale = xs.std(axis=0)
        return cls(xs.mean(axis=0), np.where(scale > 0, scale, 1.0))

    def __call__(self, xs):
        return (xs - self.mean) / self.scale


@dataclass
class Classifier:
    """Trained model; subclasses implement ``_scores`` or ``_predict``."""

    kind: ClassifierKind
    num_classes: int
    input_dim: int
    standardizer: _Standardizer | None = field(default=None, repr=False)
    converged: bool = True
    warnings: list[str] = field(default_factory=list)

    def _prepare(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim == 2 and xs.shape[0] == 0:
            return np.zeros((0, self.input_dim))
        if xs.ndim != 2 or xs.shape[1] != self.input_dim:
            raise ShapeError(f"expected features of width {self.input_dim}, got shape {xs.shape}")
        return self.standardizer(xs) if self.standardizer is not None else xs

    def predict(self, xs) -> np.ndarray:
        xs = self._prepare(xs)
        if len(xs) == 0:
            return np.zeros(0, dtype=np.int64)
        return self._predict(xs)

    def _predict(self, xs) -> np.ndarray:
        return np.argmax(self._scores(xs), axis=1).astype(np.int64)


# -- linear SVM --------------------------------------------------------------


@dataclass
class LinearSvm(Classifier):
    weights: np.ndarray | None = field(default=None, repr=False)  # (F + 1) x C, bias last

    def _scores(self, xs):
        return xs @ self.weights[:-1] + self.weights[-1]


def _train_svm(xs, labels, num_classes, cfg: TrainConfig) -> np.ndarray:
    n = len(xs)
    lam = 1.0 / (cfg.svm_c * n)
    xb = np.ascontiguousarray(np.hstack([xs, np.ones((n, 1))]))
    signs = -np.ones((n, num_classes))
    signs[np.arange(n), labels] = 1.0
    stream = Stream(cfg.seed)
    order = np.stack([stream.permutation(n) for _ in range(cfg.svm_epochs)])
    return _kernels.pegasos_ovr(xb, signs, order, lam)


# -- logistic regression ----------------------------------------------------


@dataclass
class LogisticRegression(Classifier):
    weights: np.ndarray | None = field(default=None, repr=False)  # (F + 1) x C, bias last
    loss_history: list[float] = field(default_factory=list, repr=False)

    def _scores(self, xs):
        return xs @ self.weights[:-1] + self.weights[-1]


def _softmax_loss_grad(w, xb, onehot, l2):
    n = len(xb)
    z = xb @ w
    z -= z.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(z).sum(axis=1, keepdims=True))
    logp = z - logsum
    reg_w = w[:-1]
    loss = -np.sum(onehot * logp) / n + 0.5 * l2 * np.sum(reg_w * reg_w)
    grad = xb.T @ (np.exp(logp) - onehot) / n
    grad[:-1] += l2 * reg_w
    return loss, grad


def _train_logistic(xs, labels, num_classes, cfg: TrainConfig):
    n = len(xs)
    xb = np.hstack([xs, np.ones((n, 1))])
    onehot = np.zeros((n, num_classes))
    onehot[np.arange(n), labels] = 1.0
    # 1/L for the softmax cross-entropy Hessian bound 0.5 * ||X||_2^2 / n
    lipschitz = 0.5 * np.linalg.norm(xb, 2) ** 2 / n + cfg.lr_l2
    step = 1.0 / lipschitz
    w = np.zeros((xb.shape[1], num_classes))
    loss, grad = _softmax_loss_grad(w, xb, onehot, cfg.lr_l2)
    history = [loss]
    converged = False
    for _ in range(cfg.lr_epochs):
        gnorm2 = np.sum(grad * grad)
        step *= 2.0
        while True:
            w_new = w - step * grad
            loss_new, grad_new = _softmax_loss_grad(w_new, xb, onehot, cfg.lr_l2)
            if loss_new <= loss - 0.5 * step * gnorm2 or step < 1e-12 / lipschitz:
                break
            step *= 0.5
        if loss_new > loss:
            # no descent step available at machine precision
            converged = True
            break
        decrease = loss - loss_new
        w, loss, grad = w_new, loss_new, grad_new
        history.append(loss)
        if decrease < cfg.tolerance:
            converged = True
            break
    return w, history, converged


# -- random forest ----------------------------------------------------------


@dataclass
class _Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # class distribution per node

    def apply(self, xs) -> np.ndarray:
        node = np.zeros(len(xs), dtype=np.int64)
        rows = np.arange(len(xs))
        active = self.feature[node] >= 0
        while np.any(active):
            r = rows[active]
            nd = node[r]
            go_left = xs[r, self.feature[nd]] <= self.threshold[nd]
            node[r] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] >= 0
        return node

    def predict_proba(self, xs) -> np.ndarray:
        return self.value[self.apply(xs)]


def _grow_tree(xs, ys, num_classes, stream: Stream, cfg: TrainConfig) -> _Tree:
    n_features = xs.shape[1]
    mtry = max(1, int(np.sqrt(n_features)))
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        counts = np.bincount(ys[idx], minlength=num_classes).astype(np.float64)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(counts / counts.sum())
        return len(feature) - 1

    root = new_node(np.arange(len(ys)))
    stack = [(root, np.arange(len(ys)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        y_node = ys[idx]
        if (
            len(idx) < cfg.rf_min_samples_split
            or np.all(y_node == y_node[0])
            or (cfg.rf_max_depth is not None and depth >= cfg.rf_max_depth)
        ):
            continue
        perm = np.argsort(stream.uniform(n_features), kind="stable")
        f, thr = _kernels.best_gini_split(xs, idx, ys, perm[:mtry], num_classes)
        if f < 0 and mtry < n_features:
            # every sampled feature is constant here; fall back to the rest
            f, thr = _kernels.best_gini_split(xs, idx, ys, perm[mtry:], num_classes)
        if f < 0:
            continue
        mask = xs[idx, f] <= thr
        l_idx, r_idx = idx[mask], idx[~mask]
        feature[node], threshold[node] = f, thr
        left[node], right[node] = new_node(l_idx), new_node(r_idx)
        stack.append((right[node], r_idx, depth + 1))
        stack.append((left[node], l_idx, depth + 1))
    return _Tree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value),
    )


@dataclass
class RandomForest(Classifier):
    trees: list[_Tree] = field(default_factory=list, repr=False)

    def _scores(self, xs):
        proba = np.zeros((len(xs), self.num_classes))
        for tree in self.trees:
            proba += tree.predict_proba(xs)
        return proba / len(self.trees)


def _train_forest(xs, labels, num_classes, cfg: TrainConfig) -> list[_Tree]:
    n = len(xs)
    trees = []
    for t in range(cfg.rf_trees):
        # per-tree stream seeded with seed + tree index
        stream = Stream((cfg.seed + t) % (1 << 64))
        boot = stream.integers(n, n)
        trees.append(_grow_tree(xs[boot], labels[boot], num_classes, stream, cfg))
    return trees


# -- public API -------------------------------------------------------------


def train(kind, xs, labels, cfg: TrainConfig | None = None, num_classes: int | None = None) -> Classifier:
    """Train a classifier of ``kind`` on ``xs`` (N x F) with integer ``labels``."""
    kind = ClassifierKind(kind)
    cfg = cfg or TrainConfig()
    xs, labels, num_classes = _check_training_data(xs, labels, num_classes)
    standardizer = _Standardizer.fit(xs) if cfg.standardize else None
    if standardizer is not None:
        xs = standardizer(xs)
    common = dict(kind=kind, num_classes=num_classes, input_dim=xs.shape[1], standardizer=standardizer)
    if kind is ClassifierKind.LINEAR_SVM:
        return LinearSvm(weights=_train_svm(xs, labels, num_classes, cfg), **common)
    if kind is ClassifierKind.LOGISTIC_REGRESSION:
        w, history, converged = _train_logistic(xs, labels, num_classes, cfg)
        model = LogisticRegression(weights=w, loss_history=history, converged=converged, **common)
        if not converged:
            model.warnings.append(
                f"logistic regression did not reach tolerance {cfg.tolerance} in {cfg.lr_epochs} epochs"
            )
        return model
    return RandomForest(trees=_train_forest(xs, labels, num_classes, cfg), **common)


def predict(c: Classifier, xs) -> np.ndarray:
    return c.predict(xs)


def accuracy(c: Classifier, xs, labels) -> float:
    labels = np.asarray(labels)
    xs = np.asarray(xs, dtype=np.float64)
    if labels.ndim != 1 or len(labels) != len(xs):
        raise ShapeError(f"{len(labels)} labels for {len(xs)} rows")
    if len(labels) == 0:
        raise ShapeError("accuracy needs at least one row")
    return float(np.mean(c.predict(xs) == labels))
