"""Ensembling over base-model prediction files: majority vote, average vote,
and random-forest stacking on base probabilities plus sensitive-tag features,
with stratified-CV random search for the forest hyperparameters.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_X_y, check_array, check_is_fitted

from .forest import Forest, RFConfig, rf_predict, rf_train
from .metrics import auroc
from .predictions import PredictionSet
from .tagging import CATEGORIES, TagVector

CV_REPORT_HEADER = "config_id,n_trees,max_depth,min_samples_leaf,mean_cv_auroc"


@dataclass(frozen=True)
class PredictionMatrix:
    """Base-model probabilities aligned on one id list.

    Columns are sorted by model name so the matrix layout never depends on
    input file order.
    """
    ids: tuple[int, ...]
    model_names: tuple[str, ...]
    probas: np.ndarray  # (n, m) float64

    def __post_init__(self):
        if self.probas.shape != (len(self.ids), len(self.model_names)):
            raise ValueError(
                f"probability matrix shape {self.probas.shape} does not match "
                f"{len(self.ids)} ids x {len(self.model_names)} models")
        if len(self.model_names) < 1:
            raise ValueError("need at least one base model")
        if not np.all(np.isfinite(self.probas)):
            raise ValueError("probabilities must be finite")
        if np.any(self.probas < 0) or np.any(self.probas > 1):
            raise ValueError("probabilities must lie in [0, 1]")

    @property
    def n_models(self) -> int:
        return len(self.model_names)


def prediction_matrix(named_sets: dict[str, PredictionSet]) -> PredictionMatrix:
    """Align one PredictionSet per model into a matrix.

    All sets must carry the identical id sequence; predictions made on
    different splits are a caller error, not something to silently join.
    """
    if not named_sets:
        raise ValueError("need at least one base model")
    names = tuple(sorted(named_sets))
    first = named_sets[names[0]]
    for name in names[1:]:
        if named_sets[name].ids != first.ids:
            raise ValueError(
                f"base model {name!r} is not aligned with {names[0]!r}: "
                "id lists differ")
    probas = np.column_stack([named_sets[name].probas for name in names])
    return PredictionMatrix(ids=first.ids, model_names=names, probas=probas)


def majority_vote(pm: PredictionMatrix, threshold: float = 0.5):
    """Per-id majority label and vote-fraction pseudo-probability.

    Each model votes (proba >= threshold); ties with an even model count go
    to 0 (non-hateful).
    """
    votes = pm.probas >= threshold
    pseudo = votes.mean(axis=1)
    labels = (votes.sum(axis=1) * 2 > pm.n_models).astype(np.int64)
    return labels, pseudo


def average_vote(pm: PredictionMatrix) -> np.ndarray:
    """Arithmetic mean probability across models, per id."""
    return pm.probas.mean(axis=1)


@dataclass(frozen=True)
class StackFeatures:
    """Feature rows for the stacker, one per id.

    Column order: base-model probabilities (model names sorted), the 7 tag
    flags, then a hatexplain presence flag and the hatexplain probability
    (0.5 when absent).
    """
    ids: tuple[int, ...]
    x: np.ndarray
    schema: tuple[str, ...]

    def __post_init__(self):
        if self.x.shape != (len(self.ids), len(self.schema)):
            raise ValueError(
                f"stack matrix shape {self.x.shape} does not match "
                f"{len(self.ids)} ids x {len(self.schema)} columns")


def build_stack(pm: PredictionMatrix, tags: dict[int, TagVector]) -> StackFeatures:
    missing = [i for i in pm.ids if i not in tags]
    if missing:
        raise ValueError(f"no tag row for ids {missing[:10]}"
                         + (" ..." if len(missing) > 10 else ""))
    schema = pm.model_names + CATEGORIES + ("hatexplain_present", "hatexplain_proba")
    n = len(pm.ids)
    x = np.zeros((n, len(schema)), dtype=np.float64)
    x[:, :pm.n_models] = pm.probas
    for row, meme_id in enumerate(pm.ids):
        tv = tags[meme_id]
        x[row, pm.n_models:pm.n_models + 7] = tv.flags()
        if tv.hatexplain_proba is None:
            x[row, -2:] = (0.0, 0.5)
        else:
            x[row, -2:] = (1.0, tv.hatexplain_proba)
    return StackFeatures(ids=pm.ids, x=x, schema=schema)


def write_stack_csv(path, stack: StackFeatures) -> None:
    lines = ["id," + ",".join(stack.schema)]
    for meme_id, row in zip(stack.ids, stack.x):
        lines.append(str(meme_id) + "," + ",".join(f"{v:.6f}" for v in row))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


# -- cross-validated random search -------------------------------------------

@dataclass(frozen=True)
class SearchSpace:
    """Inclusive sampling ranges for the forest hyperparameters."""
    n_trees: tuple[int, int] = (50, 400)
    max_depth: tuple[int, int] = (2, 12)
    min_samples_leaf: tuple[int, int] = (1, 8)

    def __post_init__(self):
        for name in ("n_trees", "max_depth", "min_samples_leaf"):
            lo, hi = getattr(self, name)
            if lo > hi or lo < 1:
                raise ValueError(f"{name} range ({lo}, {hi}) is invalid")


def stratified_folds(y: np.ndarray, n_folds: int,
                     rng: np.random.Generator) -> list[np.ndarray]:
    """Index arrays for k folds with per-class counts balanced within 1.

    When the rarer class has fewer than n_folds members the fold count is
    reduced to that size, with a warning.
    """
    y = np.asarray(y, dtype=np.int64)
    min_class = min(int((y == 0).sum()), int((y == 1).sum()))
    if min_class < n_folds:
        warnings.warn(f"reducing folds from {n_folds} to {min_class}: "
                      "not enough members of the rarer class")
        n_folds = min_class
    if n_folds < 2:
        raise ValueError("cannot build stratified folds: "
                         "each class needs at least 2 members")
    folds: list[list[int]] = [[] for _ in range(n_folds)]
    for cls in (0, 1):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(len(idx))]
        for fold, member in zip(np.arange(len(idx)) % n_folds, idx):
            folds[fold].append(int(member))
    return [np.sort(np.asarray(f, dtype=np.int64)) for f in folds]


@dataclass(frozen=True)
class CVResult:
    config_id: int
    config: RFConfig
    mean_cv_auroc: float


def random_search_cv(x: np.ndarray, y: np.ndarray,
                     space: SearchSpace = SearchSpace(),
                     n_folds: int = 5, budget: int = 10,
                     seed: int = 0) -> tuple[RFConfig, list[CVResult]]:
    """Sample ``budget`` forest configurations, score each by mean
    out-of-fold AUROC over stratified folds, return the winner.

    Ties go to the smaller n_trees, then the smaller max_depth.
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    sample_ss, fold_ss, forest_ss = np.random.SeedSequence(seed).spawn(3)
    sample_rng = np.random.default_rng(sample_ss)
    folds = stratified_folds(y, n_folds, np.random.default_rng(fold_ss))
    forest_seeds = [int(ss.generate_state(1)[0]) for ss in forest_ss.spawn(budget)]

    results: list[CVResult] = []
    best: CVResult | None = None
    for config_id in range(budget):
        cfg = RFConfig(
            n_trees=int(sample_rng.integers(space.n_trees[0], space.n_trees[1] + 1)),
            max_depth=int(sample_rng.integers(space.max_depth[0], space.max_depth[1] + 1)),
            min_samples_leaf=int(sample_rng.integers(space.min_samples_leaf[0],
                                                     space.min_samples_leaf[1] + 1)),
            seed=forest_seeds[config_id],
        )
        scores = []
        for held in range(len(folds)):
            train_idx = np.concatenate([folds[i] for i in range(len(folds)) if i != held])
            forest = rf_train(x[train_idx], y[train_idx], cfg)
            scores.append(auroc(rf_predict(forest, x[folds[held]]), y[folds[held]]))
        result = CVResult(config_id=config_id, config=cfg,
                          mean_cv_auroc=float(np.mean(scores)))
        results.append(result)
        if best is None or result.mean_cv_auroc > best.mean_cv_auroc or (
                result.mean_cv_auroc == best.mean_cv_auroc
                and (cfg.n_trees, cfg.max_depth) < (best.config.n_trees,
                                                    best.config.max_depth)):
            best = result
    return best.config, results


def write_cv_report(path, results: list[CVResult]) -> None:
    lines = [CV_REPORT_HEADER]
    for r in results:
        lines.append(f"{r.config_id},{r.config.n_trees},{r.config.max_depth},"
                     f"{r.config.min_samples_leaf},{r.mean_cv_auroc:.6f}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


class RandomForestStacker(ClassifierMixin, BaseEstimator):
    """Random-forest stacker with the fit/predict estimator interface.

    Works on any numeric feature matrix; pair with :func:`build_stack` to
    reproduce the base-probabilities-plus-tags stacking setup.
    """

    def __init__(self, n_trees: int = 200, max_depth: int = 8,
                 min_samples_leaf: int = 1,
                 features_per_split: int | str = "sqrt",
                 bootstrap: bool = True, seed: int = 0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.features_per_split = features_per_split
        self.bootstrap = bootstrap
        self.seed = seed

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        self.forest_ = rf_train(X, y, RFConfig(
            n_trees=self.n_trees, max_depth=self.max_depth,
            min_samples_leaf=self.min_samples_leaf,
            features_per_split=self.features_per_split,
            bootstrap=self.bootstrap, seed=self.seed))
        self.classes_ = np.array([0, 1], dtype=np.int64)
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "forest_")
        X = check_array(X, dtype=np.float64)
        p = rf_predict(self.forest_, X)
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(np.int64)
