"""Random forest of Gini-impurity decision trees on bootstrap samples."""

import math
from dataclasses import dataclass, field

import numpy as np

from .. import _rng
from ..features import as_matrix
from ._common import FORMAT_VERSION, as_binary_labels, check_two_classes

_PREDICT_CHUNK = 256


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int = None  # None = unbounded
    min_leaf: int = 1
    seed: int = 0


@dataclass(frozen=True, eq=False)
class Tree:
    """Array-encoded binary tree; ``feature == -1`` marks a leaf.

    Samples go left when ``x[feature] <= threshold``.  ``counts[node]`` holds
    the (NON_AI, AI) bootstrap counts that reached a leaf.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray

    @property
    def n_nodes(self):
        return len(self.feature)

    def leaf_proba(self):
        tot = self.counts.sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(tot > 0, self.counts[:, 1] / np.maximum(tot, 1), 0.0)

    def apply(self, Xd):
        node = np.zeros(Xd.shape[0], dtype=np.int64)
        rows = np.arange(Xd.shape[0])
        while True:
            f = self.feature[node]
            live = f >= 0
            if not live.any():
                return node
            r, n = rows[live], node[live]
            go_left = Xd[r, f[live]] <= self.threshold[n]
            node[live] = np.where(go_left, self.left[n], self.right[n])

    def depth(self):
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def to_dict(self):
        return {
            "feature": self.feature.tolist(),
            "threshold": [float(v) for v in self.threshold],
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "counts": self.counts.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            np.asarray(d["feature"], dtype=np.int64),
            np.asarray(d["threshold"], dtype=np.float64),
            np.asarray(d["left"], dtype=np.int64),
            np.asarray(d["right"], dtype=np.int64),
            np.asarray(d["counts"], dtype=np.int64).reshape(-1, 2),
        )


def _gini(n_pos, n):
    p = n_pos / n
    return 2.0 * p * (1.0 - p)


def _best_split(Xd, rows, y, feats, min_leaf):
    """Best Gini split among ``feats`` for this node, or None if none is valid.

    Ties break toward the lowest feature index, then the lowest threshold.
    """
    k = len(rows)
    vals = Xd[np.ix_(rows, feats)]
    order = np.argsort(vals, axis=0, kind="stable")
    sv = np.take_along_axis(vals, order, axis=0)
    sy = y[rows][order]
    n_left = np.arange(1, k)[:, None]
    pos_left = np.cumsum(sy, axis=0)[:-1]
    pos_total = sy.sum(axis=0)[None, :]
    n_right = k - n_left
    pos_right = pos_total - pos_left
    valid = (sv[1:] > sv[:-1]) & (n_left >= min_leaf) & (n_right >= min_leaf)
    if not valid.any():
        return None
    child = (n_left * _gini(pos_left, n_left) + n_right * _gini(pos_right, n_right)) / k
    parent = _gini(pos_total[0, 0], k)
    gain = np.where(valid, parent - child, -np.inf)
    thresholds = (sv[1:] + sv[:-1]) / 2.0
    # Guard against a midpoint rounding onto the upper value.
    thresholds = np.where(thresholds >= sv[1:], sv[:-1], thresholds)
    best = gain.max()
    cand_i, cand_j = np.nonzero(gain == best)
    cand = sorted(zip(feats[cand_j].tolist(), thresholds[cand_i, cand_j].tolist()))
    feat, thr = cand[0]
    return int(feat), float(thr), float(best)


def _build_tree(Xd, y, sample, config, rng):
    d = Xd.shape[1]
    m = max(1, math.ceil(math.sqrt(d)))
    feature, threshold, left, right, counts = [], [], [], [], []

    def new_node(rows):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        n_pos = int(y[rows].sum())
        counts.append((len(rows) - n_pos, n_pos))
        return len(feature) - 1

    root = new_node(sample)
    stack = [(root, sample, 0)]
    while stack:
        node, rows, depth = stack.pop()
        n_non, n_pos = counts[node]
        if n_non == 0 or n_pos == 0:
            continue
        if config.max_depth is not None and depth >= config.max_depth:
            continue
        if len(rows) < config.min_leaf:
            continue
        # Sample sqrt(d) candidates; keep drawing further batches only when a
        # batch holds no valid split (e.g. all-zero sparse columns).
        perm = rng.permutation(d)
        split = None
        for start in range(0, d, m):
            split = _best_split(Xd, rows, y, np.sort(perm[start:start + m]), config.min_leaf)
            if split is not None:
                break
        if split is None:
            continue
        f, thr, _ = split
        go_left = Xd[rows, f] <= thr
        l_rows, r_rows = rows[go_left], rows[~go_left]
        li, ri = new_node(l_rows), new_node(r_rows)
        feature[node], threshold[node], left[node], right[node] = f, thr, li, ri
        stack.append((ri, r_rows, depth + 1))
        stack.append((li, l_rows, depth + 1))
    return Tree(
        np.asarray(feature, dtype=np.int64), np.asarray(threshold, dtype=np.float64),
        np.asarray(left, dtype=np.int64), np.asarray(right, dtype=np.int64),
        np.asarray(counts, dtype=np.int64).reshape(-1, 2),
    )


def fit_tree(Xd, y, config, tree_index):
    """One bootstrap tree; its random stream depends only on (seed, tree_index)."""
    rng = _rng.make_rng(config.seed, _rng.STREAM_FOREST, tree_index)
    n = Xd.shape[0]
    sample = np.sort(rng.integers(0, n, size=n))
    return _build_tree(Xd, y, sample, config, rng)


@dataclass(frozen=True, eq=False)
class ForestModel:
    trees: tuple
    config: ForestConfig
    dim: int
    metadata: dict = field(default_factory=dict)

    kind = "FOREST"

    @property
    def n_trees(self):
        return len(self.trees)

    def predict_proba_matrix(self, X):
        X = as_matrix(X)
        out = np.zeros(X.shape[0])
        leaf_p = [t.leaf_proba() for t in self.trees]
        for start in range(0, X.shape[0], _PREDICT_CHUNK):
            Xd = X[start:start + _PREDICT_CHUNK].toarray()
            acc = np.zeros(Xd.shape[0])
            for tree, lp in zip(self.trees, leaf_p):
                acc += lp[tree.apply(Xd)]
            out[start:start + len(acc)] = acc / len(self.trees)
        return out

    def predict_proba(self, x):
        return float(self.predict_proba_matrix([x])[0])

    def to_dict(self):
        out = {
            "format_version": FORMAT_VERSION,
            "kind": self.kind,
            "parameters": {"dim": self.dim, "trees": [t.to_dict() for t in self.trees]},
            "config": vars(self.config).copy(),
            "training_trace": {
                "n_nodes": [t.n_nodes for t in self.trees],
                "depth": [t.depth() for t in self.trees],
            },
        }
        out.update(self.metadata)
        return out

    @classmethod
    def from_dict(cls, data):
        p = data["parameters"]
        meta = {k: v for k, v in data.items()
                if k not in ("format_version", "kind", "parameters", "config", "training_trace")}
        return cls(
            tuple(Tree.from_dict(t) for t in p["trees"]),
            ForestConfig(**data["config"]), int(p["dim"]), meta,
        )


def train_forest(X, y, config=None, metadata=None):
    config = config or ForestConfig()
    X = as_matrix(X)
    y = as_binary_labels(y)
    check_two_classes(X, y)
    if config.n_trees < 1 or config.min_leaf < 1:
        raise ValueError("n_trees and min_leaf must be at least 1")
    Xd = X.toarray()
    trees = tuple(fit_tree(Xd, y, config, i) for i in range(config.n_trees))
    return ForestModel(trees, config, X.shape[1], dict(metadata or {}))
