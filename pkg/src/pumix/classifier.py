"""Probabilistic P-vs-U classifiers that reduce the problem to 1-D scores.

Rows of P are pseudo-labelled 1 and rows of U 0; a classifier estimating
P(label = 1 | x) maps both samples to scores in [0, 1]. The random forest
keeps its bootstrap bookkeeping so every training row can be scored out of
bag; the logistic model backs cross-fitting and the split ROC variant.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np
from joblib import Parallel, delayed
from sklearn.tree import DecisionTreeClassifier

from .dataset import PuDataset
from .empirical import ScoreSet
from .errors import DataError, DomainError, NumericError

__all__ = [
    "Scorer",
    "ClassifierConfig",
    "CartTree",
    "ForestModel",
    "LogisticModel",
    "ScoreSet",
    "train_forest",
    "fit_forest",
    "oob_scores",
    "train_logistic",
    "fit_logistic",
    "fit_classifier",
    "cross_fit_scores",
    "split_scores",
    "stratified_folds",
    "default_mtry",
    "default_min_leaf",
]

FOREST_FORMAT = "pumix-forest"


class Scorer(Protocol):
    def score(self, X) -> np.ndarray: ...


@dataclass(frozen=True)
class ClassifierConfig:
    kind: str = "forest"
    n_trees: int = 500
    mtry: int | None = None
    min_leaf: int | None = None
    l2: float = 1e-3
    max_iter: int = 100
    tol: float = 1e-10
    n_jobs: int = 1

    def __post_init__(self):
        if self.kind not in ("forest", "logistic"):
            raise DomainError(f"unknown classifier {self.kind!r}; use 'forest' or 'logistic'")


def default_mtry(p: int) -> int:
    return max(1, math.ceil(math.sqrt(p)))


def default_min_leaf(n_rows: int) -> int:
    """Leaf size growing like sqrt(N) keeps leaf class fractions consistent."""
    return max(5, math.ceil(math.sqrt(n_rows)))


# ------------------------------------------------------------------------ forest


@dataclass(frozen=True)
class CartTree:
    """Array-encoded binary tree; ``feature == -1`` marks a leaf.

    ``value`` is the class-1 fraction of the (bootstrap-weighted) training
    rows reaching each node. Rows with ``x[feature] <= threshold`` go left.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @classmethod
    def from_sklearn(cls, est: DecisionTreeClassifier) -> "CartTree":
        t = est.tree_
        feature = t.feature.astype(np.int64)
        feature[t.children_left < 0] = -1
        counts = t.value[:, 0, :]
        if counts.shape[1] == 1:
            frac = np.full(t.node_count, float(est.classes_[0] == 1))
        else:
            frac = counts[:, 1] / counts.sum(axis=1)
        return cls(
            feature,
            t.threshold.astype(float),
            t.children_left.astype(np.int64),
            t.children_right.astype(np.int64),
            frac.astype(float),
        )

    def apply(self, X: np.ndarray) -> np.ndarray:
        # split thresholds were learned on float32 copies of the features
        X = np.asarray(X, dtype=np.float32).astype(float)
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = np.arange(X.shape[0])
        while active.size:
            f = self.feature[node[active]]
            internal = f >= 0
            active = active[internal]
            if not active.size:
                break
            cur = node[active]
            go_left = X[active, f[internal]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
        return node

    def predict(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    @property
    def leaf_values(self) -> np.ndarray:
        return self.value[self.feature < 0]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CartTree":
        return cls(
            np.asarray(d["feature"], dtype=np.int64),
            np.asarray(d["threshold"], dtype=float),
            np.asarray(d["left"], dtype=np.int64),
            np.asarray(d["right"], dtype=np.int64),
            np.asarray(d["value"], dtype=float),
        )


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[CartTree, ...]
    mtry: int
    min_leaf: int
    seed: int
    inbag: np.ndarray  # (n_trees, n_train) bootstrap multiplicities
    importances: np.ndarray
    n_features: int

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @property
    def n_train(self) -> int:
        return self.inbag.shape[1]

    @property
    def oob_index_sets(self) -> list[np.ndarray]:
        return [np.flatnonzero(row == 0) for row in self.inbag]

    def score(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        total = np.zeros(X.shape[0])
        for tree in self.trees:
            total += tree.predict(X)
        return total / self.n_trees

    def oob_predict(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Out-of-bag mean score for each training row and the number of trees used."""
        X = np.asarray(X, dtype=float)
        if X.shape[0] != self.n_train:
            raise DomainError(f"model was trained on {self.n_train} rows, got {X.shape[0]}")
        total = np.zeros(X.shape[0])
        count = np.zeros(X.shape[0], dtype=np.int64)
        for tree, bag in zip(self.trees, self.inbag):
            oob = np.flatnonzero(bag == 0)
            if oob.size:
                total[oob] += tree.predict(X[oob])
                count[oob] += 1
        return total, count

    def to_dict(self) -> dict:
        return {
            "format": FOREST_FORMAT,
            "version": 1,
            "mtry": self.mtry,
            "min_leaf": self.min_leaf,
            "seed": self.seed,
            "n_features": self.n_features,
            "importances": self.importances.tolist(),
            "inbag": self.inbag.tolist(),
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        if d.get("format") != FOREST_FORMAT:
            raise DataError("not a serialized forest")
        return cls(
            tuple(CartTree.from_dict(t) for t in d["trees"]),
            int(d["mtry"]),
            int(d["min_leaf"]),
            int(d["seed"]),
            np.asarray(d["inbag"], dtype=np.int32),
            np.asarray(d["importances"], dtype=float),
            int(d["n_features"]),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "ForestModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _fit_tree(X, y, mtry, min_leaf, seed_seq):
    rng = np.random.default_rng(seed_seq)
    N = X.shape[0]
    counts = np.bincount(rng.integers(0, N, N), minlength=N)
    est = DecisionTreeClassifier(
        criterion="gini",
        max_features=mtry,
        min_samples_leaf=min_leaf,
        random_state=int(rng.integers(2**31 - 1)),
    )
    est.fit(X, y, sample_weight=counts.astype(float))
    return CartTree.from_sklearn(est), counts, est.feature_importances_


def fit_forest(X, y, n_trees=500, mtry=None, min_leaf=None, seed=0, n_jobs=1) -> ForestModel:
    """Bagged Gini CART trees; each tree draws its bootstrap from its own seed stream."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(np.int64)
    N, p = X.shape
    if n_trees < 1:
        raise DomainError("n_trees must be at least 1")
    if N < 2:
        raise DomainError("need at least two rows")
    mtry = default_mtry(p) if mtry is None else int(mtry)
    if not 1 <= mtry <= p:
        raise DomainError(f"mtry must lie in [1, {p}]")
    min_leaf = default_min_leaf(N) if min_leaf is None else int(min_leaf)
    if min_leaf < 1:
        raise DomainError("min_leaf must be at least 1")
    streams = np.random.SeedSequence(seed).spawn(n_trees)
    jobs = (delayed(_fit_tree)(X, y, mtry, min_leaf, s) for s in streams)
    if n_jobs == 1:
        fitted = [f(*a, **k) for f, a, k in jobs]
    else:
        fitted = Parallel(n_jobs=n_jobs, prefer="threads")(jobs)
    trees, inbag, imps = zip(*fitted)
    return ForestModel(
        tuple(trees),
        mtry,
        int(min_leaf),
        int(seed),
        np.vstack(inbag).astype(np.int32),
        np.mean(imps, axis=0),
        p,
    )


def train_forest(data: PuDataset, n_trees=500, mtry=None, min_leaf=None, seed=0, n_jobs=1) -> ForestModel:
    X, y = data.stacked()
    return fit_forest(X, y, n_trees, mtry, min_leaf, seed, n_jobs)


def oob_scores(model: ForestModel, data: PuDataset) -> ScoreSet:
    """Score every row only with trees whose bootstrap left it out.

    Rows that were in bag for every tree fall back to the all-tree mean and
    are counted in ``diagnostics["no_oob_rows"]``.
    """
    X, _ = data.stacked()
    total, count = model.oob_predict(X)
    missing = count == 0
    scores = np.empty(X.shape[0])
    scores[~missing] = total[~missing] / count[~missing]
    if missing.any():
        scores[missing] = model.score(X[missing])
    return ScoreSet(
        scores[: data.m],
        scores[data.m :],
        data.pi,
        {"source": "oob", "no_oob_rows": int(missing.sum())},
    )


# ---------------------------------------------------------------------- logistic


@dataclass(frozen=True)
class LogisticModel:
    coef: np.ndarray
    intercept: float
    n_iter: int = 0
    converged: bool = True

    def decision(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.coef + self.intercept

    def score(self, X) -> np.ndarray:
        z = self.decision(X)
        return np.exp(-np.logaddexp(0.0, -z))


def fit_logistic(X, y, l2=1e-3, max_iter=100, tol=1e-10) -> LogisticModel:
    """Ridge logistic regression by damped Newton iterations.

    Minimizes mean log-loss + (l2 / 2) ||w||^2 (intercept unpenalized); stops
    when the gradient norm drops below ``tol`` or after ``max_iter`` steps.
    """
    if l2 < 0:
        raise DomainError("l2 must be non-negative")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    N, p = X.shape
    Z = np.hstack([X, np.ones((N, 1))])
    pen = np.full(p + 1, l2)
    pen[-1] = 0.0
    theta = np.zeros(p + 1)

    def objective(th):
        z = Z @ th
        return np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * np.sum(pen * th**2)

    loss = objective(theta)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        z = Z @ theta
        prob = np.exp(-np.logaddexp(0.0, -z))
        grad = Z.T @ (prob - y) / N + pen * theta
        if not np.all(np.isfinite(grad)):
            raise NumericError("non-finite gradient in logistic fit")
        if np.linalg.norm(grad) < tol:
            converged = True
            break
        wts = prob * (1 - prob)
        H = (Z * wts[:, None]).T @ Z / N + np.diag(pen) + 1e-12 * np.eye(p + 1)
        step = np.linalg.solve(H, grad)
        t = 1.0
        while True:
            cand = theta - t * step
            new = objective(cand)
            if new <= loss + 1e-4 * t * (grad @ -step) or t < 1e-10:
                break
            t *= 0.5
        if not np.isfinite(new):
            raise NumericError("non-finite loss in logistic fit")
        theta, loss = cand, new
    return LogisticModel(theta[:-1].copy(), float(theta[-1]), it, converged)


def train_logistic(data: PuDataset, l2=1e-3, max_iter=100, tol=1e-10) -> LogisticModel:
    X, y = data.stacked()
    return fit_logistic(X, y, l2, max_iter, tol)


# ------------------------------------------------------------- generic plumbing


def fit_classifier(config: ClassifierConfig, X, y, seed: int = 0) -> Scorer:
    if config.kind == "forest":
        return fit_forest(X, y, config.n_trees, config.mtry, config.min_leaf, seed, config.n_jobs)
    return fit_logistic(X, y, config.l2, config.max_iter, config.tol)


def stratified_folds(y, folds: int, seed: int = 0) -> np.ndarray:
    """Fold id per row; each pseudo-label class is spread evenly over the folds."""
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    ids = np.empty(y.size, dtype=np.int64)
    for label in (1, 0):
        rows = np.flatnonzero(y == label)
        ids[rows[rng.permutation(rows.size)]] = np.arange(rows.size) % folds
    return ids


def cross_fit_scores(
    data: PuDataset,
    config: ClassifierConfig,
    folds: int = 5,
    seed: int = 0,
    fold_ids=None,
) -> ScoreSet:
    """Score each row with a model fitted on the other folds."""
    if folds < 2:
        raise DomainError("folds must be at least 2")
    if folds > min(data.m, data.n):
        raise DomainError(f"folds={folds} exceeds min(m, n)={min(data.m, data.n)}")
    X, y = data.stacked()
    ids = stratified_folds(y, folds, seed) if fold_ids is None else np.asarray(fold_ids)
    scores = np.empty(X.shape[0])
    for k in range(folds):
        test = ids == k
        model = fit_classifier(config, X[~test], y[~test], seed + k)
        scores[test] = model.score(X[test])
    return ScoreSet(scores[: data.m], scores[data.m :], data.pi, {"source": "cross_fit", "folds": folds})


def split_scores(data: PuDataset, config: ClassifierConfig, seed: int = 0) -> tuple[ScoreSet, Scorer]:
    """Fit on a stratified half of P and U, score the other half.

    Returns the held-out ScoreSet and the fitted model.
    """
    if data.m < 2 or data.n < 2:
        raise DomainError("split scoring needs at least two rows in each sample")
    X, y = data.stacked()
    half = stratified_folds(y, 2, seed) == 0
    model = fit_classifier(config, X[half], y[half], seed)
    s = model.score(X[~half])
    held = y[~half]
    return ScoreSet(s[held == 1], s[held == 0], data.pi, {"source": "split"}), model
