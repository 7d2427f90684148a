"""Estimator-style façade over the training loop.

``FusionClassifier`` follows the fit/predict convention: constructor
arguments are stored verbatim, fitted state lives in trailing-underscore
attributes, and ``get_params``/``set_params``/``clone`` work as usual. The
heavy lifting stays in :mod:`memefusion.fusion.trainer`.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ..data import Example
from .config import LossSpec, ModelConfig, TrainConfig
from .trainer import train


def _as_examples(x) -> list[Example]:
    xs = list(x)
    for item in xs:
        if not isinstance(item, Example):
            raise TypeError(f"expected Example instances, got {type(item).__name__}")
    return xs


def _with_labels(examples: list[Example], y) -> list[Example]:
    labels = np.asarray(y)
    if labels.shape != (len(examples),):
        raise ValueError(f"y has shape {labels.shape}, expected ({len(examples)},)")
    out = []
    for ex, label in zip(examples, labels):
        record = dataclasses.replace(ex.record, label=int(label))
        out.append(dataclasses.replace(ex, record=record))
    return out


class FusionClassifier(ClassifierMixin, BaseEstimator):
    """Two-class fusion transformer with best-by-validation-AUROC selection.

    Parameters
    ----------
    model_config, train_config:
        Architecture and optimization settings; defaults are the desk-scale
        configuration.
    loss:
        "cross_entropy" or "focal".
    gamma:
        Focal-loss exponent, ignored for cross-entropy.
    """

    def __init__(self, model_config: ModelConfig | None = None,
                 train_config: TrainConfig | None = None,
                 loss: str = "cross_entropy", gamma: float = 2.0):
        self.model_config = model_config
        self.train_config = train_config
        self.loss = loss
        self.gamma = gamma

    def fit(self, X, y=None, val=None):
        """Train on a list of examples.

        ``y`` optionally overrides the labels carried by the records. ``val``
        is the validation split used for model selection; when omitted the
        training set doubles as validation, which is only sensible for smoke
        tests.
        """
        examples = _as_examples(X)
        if y is not None:
            examples = _with_labels(examples, y)
        val_examples = _as_examples(val) if val is not None else examples
        model_cfg = self.model_config if self.model_config is not None else ModelConfig()
        train_cfg = self.train_config if self.train_config is not None else TrainConfig()
        spec = LossSpec(kind=self.loss, gamma=self.gamma)
        self.model_ = train(examples, val_examples, model_cfg, train_cfg, spec)
        self.classes_ = np.array([0, 1], dtype=np.int64)
        self.history_ = self.model_.history
        self.best_step_ = self.model_.best_step
        self.best_val_auroc_ = self.model_.best_val_auroc
        return self

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "model_")
        p = self.model_.predict_probs(_as_examples(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(np.int64)
