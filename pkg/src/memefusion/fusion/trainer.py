"""Training loop: AdamW with decoupled weight decay, cosine warmup/decay,
periodic validation, best-by-val-AUROC model selection.

Everything downstream of the seed is deterministic: parameter init, epoch
shuffling and dropout draw from independent streams spawned from one
``SeedSequence``, batches are consecutive slices of each shuffled epoch, and
evaluation order is fixed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..data import Example
from ..metrics import accuracy, auroc
from ..predictions import PredictionSet
from .config import LossSpec, ModelConfig, TrainConfig
from .loss import loss_and_dlogits
from .network import backward, forward, init_params, pack_batch, predict_probs
from .schedule import lr_at

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

LOG_HEADER = "step,train_loss,val_auroc,val_acc,lr"


def decays(name: str) -> bool:
    """Weight decay applies to weight matrices and embedding tables only."""
    return name.endswith("_w") or name.endswith("_emb")


class AdamW:
    """Adaptive-moment optimizer with weight decay decoupled from the
    gradient (decay is added to the update, not to the gradient)."""

    def __init__(self, params: dict[str, np.ndarray], weight_decay: float = 0.01):
        self.weight_decay = weight_decay
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
             lr: float) -> None:
        self.t += 1
        bc1 = 1.0 - ADAM_BETA1 ** self.t
        bc2 = 1.0 - ADAM_BETA2 ** self.t
        for name, p in params.items():
            g = grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= ADAM_BETA1
            m += (1.0 - ADAM_BETA1) * g
            v *= ADAM_BETA2
            v += (1.0 - ADAM_BETA2) * g * g
            update = (m / bc1) / (np.sqrt(v / bc2) + ADAM_EPS)
            if decays(name):
                update = update + self.weight_decay * p
            p -= lr * update


@dataclass(frozen=True)
class LogRow:
    step: int
    train_loss: float
    val_auroc: float
    val_acc: float
    lr: float


@dataclass
class TrainedModel:
    params: dict[str, np.ndarray]
    model_config: ModelConfig
    train_config: TrainConfig
    loss_spec: LossSpec
    best_step: int
    best_val_auroc: float
    history: list[LogRow] = field(default_factory=list)

    def predict_probs(self, examples: list[Example]) -> np.ndarray:
        if not examples:
            return np.empty(0, dtype=np.float64)
        return predict_probs(self.params, self.model_config, examples)


def _epoch_batches(n: int, batch_size: int, rng: np.random.Generator):
    """Yield index arrays forever: shuffled epochs cut into consecutive
    batches, the last batch of an epoch possibly short."""
    while True:
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            yield order[start:start + batch_size]


def train(train_examples: list[Example], val_examples: list[Example],
          model_cfg: ModelConfig, train_cfg: TrainConfig,
          loss_spec: LossSpec = LossSpec()) -> TrainedModel:
    """Run up to ``max_updates`` optimizer steps, evaluating on the
    validation split every ``eval_every`` steps and keeping the parameters
    with the best validation AUROC."""
    if not train_examples:
        raise ValueError("empty training split")
    if not val_examples:
        raise ValueError("empty validation split")
    for ex in train_examples + val_examples:
        if ex.record.label is None:
            raise ValueError(f"example {ex.id} has no label; training needs labeled data")
    tcfg = train_cfg.resolve(len(train_examples))
    val_labels = np.asarray([ex.record.label for ex in val_examples], dtype=np.int64)

    init_ss, shuffle_ss, dropout_ss = np.random.SeedSequence(tcfg.seed).spawn(3)
    params = init_params(model_cfg, np.random.default_rng(init_ss))
    dropout_rng = np.random.default_rng(dropout_ss)
    optimizer = AdamW(params, weight_decay=tcfg.weight_decay)
    batches = _epoch_batches(len(train_examples), tcfg.batch_size,
                             np.random.default_rng(shuffle_ss))

    history: list[LogRow] = []
    best_auroc = -np.inf
    best_step = 0
    best_params = {k: v.copy() for k, v in params.items()}
    for step in range(1, tcfg.max_updates + 1):
        idx = next(batches)
        batch = pack_batch([train_examples[i] for i in idx], model_cfg,
                           require_labels=True)
        probs, cache = forward(params, model_cfg, batch, train=True,
                               dropout_rng=dropout_rng)
        loss, dlogits = loss_and_dlogits(cache["logits"], batch.labels, loss_spec)
        grads = backward(params, model_cfg, cache, dlogits)
        optimizer.step(params, grads, lr_at(step, tcfg))

        if step % tcfg.eval_every == 0:
            val_probs = predict_probs(params, model_cfg, val_examples)
            val_auroc = auroc(val_probs, val_labels)
            val_acc = accuracy(val_probs, val_labels)
            history.append(LogRow(step=step, train_loss=loss,
                                  val_auroc=val_auroc, val_acc=val_acc,
                                  lr=lr_at(step, tcfg)))
            if val_auroc > best_auroc:
                best_auroc = val_auroc
                best_step = step
                best_params = {k: v.copy() for k, v in params.items()}

    return TrainedModel(params=best_params, model_config=model_cfg,
                        train_config=tcfg, loss_spec=loss_spec,
                        best_step=best_step, best_val_auroc=float(best_auroc),
                        history=history)


def predict(model: TrainedModel, examples: list[Example]) -> PredictionSet:
    """Predictions for a split, order preserved; labels are not required."""
    probas = model.predict_probs(examples)
    return PredictionSet(ids=tuple(ex.id for ex in examples),
                         probas=probas)


def write_training_log(path, history: list[LogRow]) -> None:
    lines = [LOG_HEADER]
    for row in history:
        lines.append(f"{row.step},{row.train_loss:.6f},{row.val_auroc:.6f},"
                     f"{row.val_acc:.6f},{row.lr:.8g}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_training_log(path) -> list[LogRow]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != LOG_HEADER:
        raise ValueError(f"{path}: expected header {LOG_HEADER!r}")
    rows = []
    for line in lines[1:]:
        step, loss, roc, acc, lr = line.split(",")
        rows.append(LogRow(step=int(step), train_loss=float(loss),
                           val_auroc=float(roc), val_acc=float(acc),
                           lr=float(lr)))
    return rows
