"""Shared test helpers: tiny model configs, synthetic example builders, and
independent brute-force oracles that the fast implementations are checked
against."""

from __future__ import annotations

import numpy as np

from memefusion.data import Example, MemeRecord
from memefusion.fusion.config import ModelConfig

WORDS = ("zorg", "blap", "frop", "quux", "wibble", "snarf", "plonk", "dweezil")


def tiny_model_config(**overrides) -> ModelConfig:
    """Smallest config that still exercises every architectural feature."""
    base = dict(vocab_size=11, d_model=8, n_layers=1, n_heads=2, d_ff=12,
                max_text_len=6, max_boxes=3, region_dim=5, dropout_rate=0.0,
                seed=0)
    base.update(overrides)
    return ModelConfig(**base)


def make_examples(n: int, region_dim: int = 5, seed: int = 0,
                  labeled: bool = True, id_start: int = 0,
                  max_boxes: int = 3) -> list[Example]:
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        k = int(rng.integers(1, 6))
        text = " ".join(WORDS[j] for j in rng.integers(0, len(WORDS), size=k))
        label = int(rng.integers(0, 2)) if labeled else None
        feats = rng.normal(size=(int(rng.integers(1, max_boxes + 1)),
                                 region_dim)).astype(np.float32)
        record = MemeRecord(id=id_start + i, img=f"img/{i:04d}.png",
                            text=text, label=label)
        out.append(Example(record=record, features=feats))
    return out


def auroc_by_pairs(scores, labels) -> float:
    """Quadratic pair-counting AUROC: wins plus half-credited ties."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    pos = s[y == 1]
    neg = s[y == 0]
    wins = np.sum(pos[:, None] > neg[None, :])
    ties = np.sum(pos[:, None] == neg[None, :])
    return (float(wins) + 0.5 * float(ties)) / (len(pos) * len(neg))


def enumerate_best_split(x, y, min_samples_leaf: int):
    """Brute-force split oracle: every feature, every midpoint threshold, in
    ascending order, strictly-better-wins. Mirrors the documented convention
    but not the implementation (scalar loop vs. vectorized prefix sums)."""
    n, n_features = x.shape
    best = None
    for f in range(n_features):
        v = np.sort(x[:, f], kind="stable")
        for cut in range(1, n):
            if v[cut] == v[cut - 1]:
                continue
            if cut < min_samples_leaf or n - cut < min_samples_leaf:
                continue
            threshold = (v[cut - 1] + v[cut]) / 2.0
            left = x[:, f] <= threshold
            impurity = 0.0
            for side in (left, ~left):
                m = float(side.sum())
                p1 = float(y[side].sum()) / m
                p0 = (m - float(y[side].sum())) / m
                impurity += m * (1.0 - p1 * p1 - p0 * p0)
            impurity /= n
            if best is None or impurity < best[2]:
                best = (f, threshold, impurity)
    return best
