"""Random forest classifier with Gini importances, and stratified k-fold CV."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from adkg.errors import DataError
from adkg.parallel import pmap, substream


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 200
    max_depth: int = 12
    min_leaf: int = 2
    mtry: int | None = None  # default ceil(sqrt(p))
    seed: int = 0


@dataclass
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    proba: np.ndarray  # (n_nodes, n_classes)
    importance: np.ndarray
    depth: int

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=int)
        rows = np.arange(X.shape[0])
        for _ in range(self.depth):
            f = self.feature[node]
            inner = f >= 0
            if not inner.any():
                break
            go_left = X[rows, np.where(inner, f, 0)] <= self.threshold[node]
            node = np.where(inner, np.where(go_left, self.left[node], self.right[node]), node)
        return node


def _gini(counts):
    n = counts.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = counts / n[..., None]
    return np.where(n > 0, 1.0 - (frac * frac).sum(axis=-1), 0.0)


def _best_split(X, y, idx, feats, n_classes, min_leaf):
    """Lowest weighted child impurity; ties go to the lowest feature index, then lowest threshold."""
    best = None
    n = idx.size
    for j in sorted(feats):
        x = X[idx, j]
        order = np.argsort(x, kind="stable")
        xs, ys = x[order], y[idx][order]
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), ys] = 1.0
        left = np.cumsum(onehot, axis=0)[:-1]
        right = left[-1] + onehot[-1] - left
        n_left = np.arange(1, n)
        ok = (xs[:-1] < xs[1:]) & (n_left >= min_leaf) & (n - n_left >= min_leaf)
        if not ok.any():
            continue
        score = n_left * _gini(left) + (n - n_left) * _gini(right)
        score = np.where(ok, score, np.inf)
        i = int(np.argmin(score))
        if best is None or score[i] < best[0] - 1e-12:
            best = (float(score[i]), j, float((xs[i] + xs[i + 1]) / 2.0))
    return best


def _grow(X, y, n_classes, params: ForestParams, mtry: int, rng) -> Tree:
    n, p = X.shape
    sample = rng.integers(0, n, size=n)
    feature, threshold, left, right, proba = [], [], [], [], []
    importance = np.zeros(p)
    stack = [(sample, 0, None, None)]
    max_seen = 0
    while stack:
        idx, depth, parent, is_left = stack.pop()
        node = len(feature)
        if parent is not None:
            (left if is_left else right)[parent] = node
        counts = np.bincount(y[idx], minlength=n_classes).astype(float)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        proba.append(counts / counts.sum())
        max_seen = max(max_seen, depth)
        if depth >= params.max_depth or np.count_nonzero(counts) < 2 or idx.size < 2 * params.min_leaf:
            continue
        feats = rng.choice(p, size=mtry, replace=False)
        split = _best_split(X, y, idx, feats, n_classes, params.min_leaf)
        if split is None:
            continue
        score, j, thr = split
        gain = idx.size * float(_gini(counts)) - score
        if gain <= 1e-12:
            continue
        feature[node], threshold[node] = j, thr
        importance[j] += gain
        mask = X[idx, j] <= thr
        # right pushed first so the left subtree is numbered first
        stack.append((idx[~mask], depth + 1, node, False))
        stack.append((idx[mask], depth + 1, node, True))
    return Tree(np.array(feature), np.array(threshold), np.array(left), np.array(right),
                np.array(proba), importance, max_seen + 1)


@dataclass
class RandomForest:
    trees: list
    classes: np.ndarray
    n_features: int
    params: ForestParams = field(default_factory=ForestParams)

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        total = np.zeros((X.shape[0], self.classes.size))
        for t in self.trees:
            total += t.proba[t.apply(X)]
        return total / len(self.trees)

    def predict(self, X) -> np.ndarray:
        return self.classes[np.argmax(self.predict_proba(X), axis=1)]


def random_forest_fit(X, y, params: ForestParams = ForestParams(), workers: int = 1) -> RandomForest:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] == 0:
        raise DataError("random forest needs a nonempty feature matrix")
    if np.isnan(X).any():
        raise DataError("missing values in feature matrix")
    classes, yi = np.unique(np.asarray(y), return_inverse=True)
    if X.shape[0] < 4:
        raise DataError("random forest needs at least 4 rows")
    if classes.size < 2:
        raise DataError("random forest needs at least two classes")
    p = X.shape[1]
    mtry = params.mtry or math.ceil(math.sqrt(p))
    mtry = min(max(mtry, 1), p)
    trees = pmap(lambda i: _grow(X, yi, classes.size, params, mtry, substream(params.seed, i)),
                 range(params.n_trees), workers)
    return RandomForest(trees, classes, p, params)


def random_forest_predict(model: RandomForest, X) -> np.ndarray:
    return model.predict(X)


def gini_importances(model: RandomForest) -> np.ndarray:
    """Mean decrease in Gini impurity, normalized per tree and overall to sum to 1."""
    acc = np.zeros(model.n_features)
    for t in model.trees:
        s = t.importance.sum()
        if s > 0:
            acc += t.importance / s
    total = acc.sum()
    if total == 0:
        return np.full(model.n_features, 1.0 / model.n_features)
    return acc / total


@dataclass(frozen=True)
class CVResult:
    mean: float
    sd: float
    fold_accuracy: tuple
    folds: tuple  # test-row index arrays


def stratified_folds(y, k: int, seed: int) -> list:
    y = np.asarray(y)
    n = y.size
    if k < 2:
        raise DataError("k-fold CV needs k >= 2")
    if n < k:
        raise DataError(f"cannot split {n} rows into {k} folds")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    assign = np.empty(n, dtype=int)
    cursor = 0
    for cls in np.unique(y):
        rows = np.flatnonzero(y == cls)
        rows = rows[rng.permutation(rows.size)]
        assign[rows] = (cursor + np.arange(rows.size)) % k
        cursor = (cursor + rows.size) % k
    return [np.flatnonzero(assign == f) for f in range(k)]


def k_fold_cv(fit, predict, X, y, k: int = 10, seed: int = 0) -> CVResult:
    """Stratified k-fold accuracy. ``fit(X, y) -> model``, ``predict(model, X) -> labels``."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    folds = stratified_folds(y, k, seed)
    classes = np.unique(y)
    accs = []
    for f, test in enumerate(folds):
        train = np.setdiff1d(np.arange(y.size), test)
        missing = set(classes) - set(np.unique(y[train]))
        if missing:
            raise DataError(f"fold {f}: class {sorted(missing)} absent from training rows; n too small")
        model = fit(X[train], y[train])
        accs.append(float(np.mean(predict(model, X[test]) == y[test])))
    accs = np.array(accs)
    sd = float(accs.std(ddof=1)) if accs.size > 1 else 0.0
    return CVResult(float(accs.mean()), sd, tuple(accs), tuple(folds))
