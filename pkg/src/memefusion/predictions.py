"""Per-model prediction sets and their CSV interchange format.

One file per base model, header ``id,proba,label``: proba is the probability
of "hateful" with six decimal digits, label the 0.5-thresholded prediction.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

PREDICTION_HEADER = ("id", "proba", "label")


@dataclass(frozen=True)
class PredictionSet:
    """Aligned (id, probability-of-hateful) pairs from one model."""

    ids: tuple[int, ...]
    probas: np.ndarray
    name: str = "model"

    def __post_init__(self):
        probas = np.asarray(self.probas, dtype=np.float64)
        if probas.ndim != 1 or len(probas) != len(self.ids):
            raise ValueError("ids and probas must be parallel 1-D sequences")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("duplicate ids in prediction set")
        if len(probas) and (not np.all(np.isfinite(probas)) or probas.min() < 0 or probas.max() > 1):
            raise ValueError("probabilities must be finite and in [0, 1]")
        probas.flags.writeable = False
        object.__setattr__(self, "probas", probas)

    def __len__(self) -> int:
        return len(self.ids)

    def labels(self, threshold: float = 0.5) -> np.ndarray:
        return (self.probas >= threshold).astype(np.int64)


def write_predictions(path, preds: PredictionSet, labels: np.ndarray | None = None) -> None:
    """Write a prediction CSV; ``labels`` defaults to thresholding at 0.5."""
    if labels is None:
        labels = preds.labels()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(PREDICTION_HEADER) + "\n")
        for meme_id, proba, label in zip(preds.ids, preds.probas, labels):
            fh.write(f"{meme_id},{proba:.6f},{int(label)}\n")


def read_predictions(path, name: str | None = None) -> PredictionSet:
    """Read a prediction CSV; the label column is tolerated but ignored."""
    if name is None:
        import os

        name = os.path.splitext(os.path.basename(str(path)))[0]
    ids: list[int] = []
    probas: list[float] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header[:2]) != PREDICTION_HEADER[:2]:
            raise ValueError(f"{path}: expected header starting 'id,proba', got {header}")
        for row in reader:
            if not row:
                continue
            ids.append(int(row[0]))
            probas.append(float(row[1]))
    return PredictionSet(ids=tuple(ids), probas=np.asarray(probas), name=name)
