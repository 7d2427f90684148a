"""Seeded synthetic meme generator.

Stands in for the license-gated challenge data so the pipeline is testable
end to end: random caption texts with invented lexicon terms planted in
hateful examples, region feature vectors whose leading coordinates are
shifted by the label, and simulated base-model prediction sets of a chosen
AUROC. Lexicon terms are science-fiction nonsense words, so nothing in the
repository is actually offensive.
"""

from __future__ import annotations

from statistics import NormalDist

import numpy as np

from .data import FeatureBank, MemeRecord, SplitSet
from .predictions import PredictionSet
from .tagging import Lexicon

PLACEHOLDER_TERMS = {
    "racism": ("zorgon", "vexling", "blorpoid"),
    "nationality": ("quuxlander", "fribbian", "outer quux"),
    "sex": ("thorpling", "glimmeroid"),
    "religion": ("moonculter", "sporewisher"),
    "pregnancy": ("podbearing", "eggful"),
    "disability": ("fognoggin", "wobblekneed"),
    "profanity": ("frak", "smeg", "gorram", "frell"),
}

FILLER_WORDS = (
    "when", "the", "you", "see", "a", "sandwich", "cat", "monday", "boss",
    "coffee", "meeting", "weekend", "pizza", "homework", "wifi", "battery",
    "alarm", "gym", "diet", "salad", "nap", "rain", "traffic", "inbox",
    "deadline", "printer", "laundry", "socks", "fridge", "leftovers",
)

SIGNAL_COORDS = 8  # leading feature coordinates carry the label signal


def placeholder_lexicon() -> Lexicon:
    """Invented sensitive-term lexicon covering all seven categories."""
    return Lexicon(PLACEHOLDER_TERMS)


def generate_split(n: int, seed: int, name: str = "train", id_start: int = 0,
                   region_dim: int = 64, max_boxes: int = 8,
                   hateful_rate: float = 0.35, signal: float = 1.0,
                   plant_rate: float = 0.8,
                   noise_plant_rate: float = 0.05) -> tuple[SplitSet, FeatureBank]:
    """Labeled records plus a feature bank, fully determined by the seed.

    Hateful examples get one or two lexicon terms planted with probability
    ``plant_rate`` (non-hateful ones with ``noise_plant_rate``), and their
    leading ``SIGNAL_COORDS`` feature coordinates are shifted by +-``signal``
    so the set is linearly separable from region features alone.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    terms = [term for cat_terms in PLACEHOLDER_TERMS.values() for term in cat_terms]
    records = []
    feats = {}
    for i in range(n):
        meme_id = id_start + i
        label = int(rng.random() < hateful_rate)
        k = int(rng.integers(4, 9))
        words = [FILLER_WORDS[j] for j in rng.integers(0, len(FILLER_WORDS), size=k)]
        plant_p = plant_rate if label else noise_plant_rate
        if rng.random() < plant_p:
            for _ in range(int(rng.integers(1, 3))):
                pos = int(rng.integers(0, len(words) + 1))
                words.insert(pos, terms[int(rng.integers(0, len(terms)))])
        records.append(MemeRecord(id=meme_id, img=f"img/{meme_id:05d}.png",
                                  text=" ".join(words), label=label))
        n_boxes = int(rng.integers(2, max_boxes + 1))
        m = rng.normal(0.0, 1.0, size=(n_boxes, region_dim))
        m[:, :SIGNAL_COORDS] += signal if label else -signal
        feats[meme_id] = m.astype(np.float32)
    return SplitSet(name=name, records=tuple(records)), FeatureBank(feats)


def simulate_hatexplain(split: SplitSet, seed: int) -> dict[int, float]:
    """Label-correlated pseudo-probabilities for a side text classifier."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    out = {}
    for r in split:
        center = 0.7 if r.label == 1 else 0.3
        out[r.id] = float(np.clip(rng.normal(center, 0.15), 0.0, 1.0))
    return out


def simulate_predictions(split: SplitSet, target_auroc: float,
                         seed: int) -> PredictionSet:
    """A base-model prediction set with expected AUROC ``target_auroc``.

    Scores are unit-variance normal with the positive class shifted by
    sqrt(2) * Phi^-1(target), which makes P(score_pos > score_neg) equal the
    target; the logistic squash to [0,1] is monotone, so AUROC is unchanged.
    """
    if not 0.5 <= target_auroc < 1.0:
        raise ValueError(f"target AUROC must lie in [0.5, 1), got {target_auroc}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    labels = split.labels()
    delta = np.sqrt(2.0) * NormalDist().inv_cdf(target_auroc)
    scores = rng.normal(0.0, 1.0, size=len(labels)) + delta * labels
    probas = 1.0 / (1.0 + np.exp(-scores))
    return PredictionSet(ids=tuple(split.ids()), probas=probas)


INCIDENCE_FALSE_ROW = (3284, 1982, 203, 12, 0)
INCIDENCE_TRUE_ROW = (967, 1411, 590, 49, 2)


def incidence_mock() -> tuple[np.ndarray, np.ndarray]:
    """(labels, flags) realizing the published label-by-category-count table.

    For each cell, emits that many rows whose flag vector sets exactly the
    needed number of distinct categories (cycled so no category is special).
    """
    labels = []
    flag_rows = []
    offset = 0
    for label, row in ((0, INCIDENCE_FALSE_ROW), (1, INCIDENCE_TRUE_ROW)):
        for n_cats, count in enumerate(row):
            for _ in range(count):
                flags = [0] * 7
                for j in range(n_cats):
                    flags[(offset + j) % 7] = 1
                labels.append(label)
                flag_rows.append(flags)
                offset += 1
    return (np.asarray(labels, dtype=np.int64),
            np.asarray(flag_rows, dtype=np.int64).reshape(len(labels), 7))
