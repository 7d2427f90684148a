"""Random forest built from scratch: axis-aligned Gini splits, bootstrap
resampling, per-node random feature subsets, class-count leaves.

Split enumeration is canonical so results are reproducible and checkable
against a brute-force oracle: candidate features ascend, thresholds are
midpoints between consecutive distinct sorted values in ascending order, and
a candidate replaces the incumbent only when strictly better. Each tree
draws from its own random stream, spawned from the forest seed by tree
index, so the forest is identical regardless of growth order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RFConfig:
    n_trees: int = 200
    max_depth: int = 8
    min_samples_leaf: int = 1
    features_per_split: int | str = "sqrt"  # "sqrt", "all", or an explicit count
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_samples_leaf < 1:
            raise ValueError(f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}")
        if isinstance(self.features_per_split, str):
            if self.features_per_split not in ("sqrt", "all"):
                raise ValueError(
                    f"features_per_split must be 'sqrt', 'all' or an int, "
                    f"got {self.features_per_split!r}")
        elif self.features_per_split < 1:
            raise ValueError("features_per_split count must be >= 1")

    def n_candidates(self, n_features: int) -> int:
        if self.features_per_split == "sqrt":
            return max(1, int(math.sqrt(n_features)))
        if self.features_per_split == "all":
            return n_features
        return min(self.features_per_split, n_features)


@dataclass
class Forest:
    trees: list[dict]
    schema: tuple[str, ...]
    config: RFConfig
    n_classes: int = 2

    @property
    def n_features(self) -> int:
        return len(self.schema)


def _gini_weighted(n_left, pos_left, n_right, pos_right):
    """Size-weighted Gini impurity of a two-way split, vectorized over cuts."""
    p1l = pos_left / n_left
    p0l = (n_left - pos_left) / n_left
    gl = 1.0 - p1l * p1l - p0l * p0l
    p1r = pos_right / n_right
    p0r = (n_right - pos_right) / n_right
    gr = 1.0 - p1r * p1r - p0r * p0r
    return (n_left * gl + n_right * gr) / (n_left + n_right)


def best_split(x: np.ndarray, y: np.ndarray, feature_ids: np.ndarray,
               min_samples_leaf: int):
    """Best (feature, threshold, impurity) over the candidate features.

    Returns None when no split leaves ``min_samples_leaf`` samples on each
    side. Thresholds are midpoints between consecutive distinct values.
    """
    n = len(y)
    best = None
    for f in feature_ids:
        values = x[:, f]
        order = np.argsort(values, kind="stable")
        v = values[order]
        pos = np.cumsum(y[order])
        cuts = np.arange(1, n)
        valid = (v[1:] != v[:-1]) & (cuts >= min_samples_leaf) & (n - cuts >= min_samples_leaf)
        if not valid.any():
            continue
        n_left = cuts[valid].astype(np.float64)
        pos_left = pos[:-1][valid].astype(np.float64)
        impurity = _gini_weighted(n_left, pos_left, n - n_left, pos[-1] - pos_left)
        i = int(np.argmin(impurity))
        if best is None or impurity[i] < best[2]:
            cut = cuts[valid][i]
            threshold = (v[cut - 1] + v[cut]) / 2.0
            best = (int(f), float(threshold), float(impurity[i]))
    return best


def _grow(x, y, idx, depth, cfg: RFConfig, n_features, rng) -> dict:
    labels = y[idx]
    counts = [int((labels == 0).sum()), int((labels == 1).sum())]
    if depth >= cfg.max_depth or counts[0] == 0 or counts[1] == 0 \
            or len(idx) < 2 * cfg.min_samples_leaf:
        return {"leaf": counts}
    m = cfg.n_candidates(n_features)
    feature_ids = np.sort(rng.choice(n_features, size=m, replace=False))
    split = best_split(x[idx], labels, feature_ids, cfg.min_samples_leaf)
    if split is None:
        return {"leaf": counts}
    f, threshold, _ = split
    go_left = x[idx, f] <= threshold
    return {
        "feature": f,
        "threshold": threshold,
        "left": _grow(x, y, idx[go_left], depth + 1, cfg, n_features, rng),
        "right": _grow(x, y, idx[~go_left], depth + 1, cfg, n_features, rng),
    }


def rf_train(x: np.ndarray, y: np.ndarray, cfg: RFConfig,
             schema: tuple[str, ...] | None = None) -> Forest:
    """Grow ``cfg.n_trees`` trees on bootstrap resamples of (x, y)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 2 or x.shape[1] == 0:
        raise ValueError(f"x must be a non-empty 2-D matrix, got shape {x.shape}")
    if len(x) != len(y):
        raise ValueError(f"{len(x)} rows but {len(y)} labels")
    if len(y) < 2:
        raise ValueError("need at least 2 training rows")
    if not (np.any(y == 0) and np.any(y == 1)):
        raise ValueError("training labels must contain both classes")
    if schema is None:
        schema = tuple(f"f{j}" for j in range(x.shape[1]))
    if len(schema) != x.shape[1]:
        raise ValueError(f"schema has {len(schema)} names for {x.shape[1]} columns")
    n, n_features = x.shape
    trees = []
    for ss in np.random.SeedSequence(cfg.seed).spawn(cfg.n_trees):
        rng = np.random.default_rng(ss)
        if cfg.bootstrap:
            idx = rng.integers(0, n, size=n)
        else:
            idx = np.arange(n)
        trees.append(_grow(x, y, idx, 0, cfg, n_features, rng))
    return Forest(trees=trees, schema=tuple(schema), config=cfg)


def _tree_leaf(node: dict, row: np.ndarray) -> list:
    while "leaf" not in node:
        node = node["left"] if row[node["feature"]] <= node["threshold"] else node["right"]
    return node["leaf"]


def rf_predict(forest: Forest, x: np.ndarray) -> np.ndarray:
    """Mean over trees of the leaf positive-class frequency, per row."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != forest.n_features:
        raise ValueError(
            f"feature matrix has shape {x.shape}, forest expects {forest.n_features} columns")
    out = np.zeros(len(x), dtype=np.float64)
    for i, row in enumerate(x):
        acc = 0.0
        for tree in forest.trees:
            n0, n1 = _tree_leaf(tree, row)
            acc += n1 / (n0 + n1)
        out[i] = acc / len(forest.trees)
    return out


def forest_to_json(forest: Forest) -> str:
    """Canonical JSON rendering; byte-stable for a given forest."""
    payload = {
        "config": {
            "n_trees": forest.config.n_trees,
            "max_depth": forest.config.max_depth,
            "min_samples_leaf": forest.config.min_samples_leaf,
            "features_per_split": forest.config.features_per_split,
            "bootstrap": forest.config.bootstrap,
            "seed": forest.config.seed,
        },
        "schema": list(forest.schema),
        "trees": forest.trees,
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def forest_from_json(text: str) -> Forest:
    payload = json.loads(text)
    cfg = RFConfig(**payload["config"])
    return Forest(trees=payload["trees"], schema=tuple(payload["schema"]), config=cfg)
