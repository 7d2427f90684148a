"""Configuration for the fusion classifier and its training recipe."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

N_RESERVED_TOKENS = 3  # PAD, CLS, UNK


@dataclass(frozen=True)
class ModelConfig:
    """Architecture of the single-stream fusion transformer.

    Region features (``region_dim``-wide per detected box) are projected onto
    the ``d_model`` text embedding space and concatenated after the token
    embeddings; defaults are desk-scale, see the "visualbert-full" preset
    for the full-width layout.
    """

    vocab_size: int = 4096
    d_model: int = 64
    n_layers: int = 2
    n_heads: int = 4
    d_ff: int = 128
    max_text_len: int = 32
    max_boxes: int = 16
    region_dim: int = 2048
    dropout_rate: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.vocab_size <= N_RESERVED_TOKENS:
            raise ValueError(f"vocab_size must exceed {N_RESERVED_TOKENS}")
        for name in ("d_model", "n_layers", "n_heads", "d_ff", "max_text_len",
                     "max_boxes", "region_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.d_model % self.n_heads != 0:
            raise ValueError(f"d_model {self.d_model} not divisible by n_heads {self.n_heads}")
        if self.max_boxes > 120:
            raise ValueError("max_boxes must be <= 120")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")


@dataclass(frozen=True)
class LossSpec:
    """Training loss: plain cross-entropy or focal loss with exponent gamma."""

    kind: str = "cross_entropy"
    gamma: float = 2.0

    def __post_init__(self):
        if self.kind not in ("cross_entropy", "focal"):
            raise ValueError(f"loss kind must be 'cross_entropy' or 'focal', got {self.kind!r}")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer recipe: AdamW, cosine warmup then cosine decay, periodic
    validation with best-by-AUROC checkpointing.

    When ``epochs`` is set, ``max_updates`` is recomputed at training time as
    ``epochs * ceil(n_train / batch_size)``.
    """

    learning_rate: float = 5e-5
    batch_size: int = 32
    max_updates: int = 3000
    eval_every: int = 50
    warmup_fraction: float = 0.1
    weight_decay: float = 0.01
    seed: int = 0
    epochs: int | None = None
    preset_name: str | None = None

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.eval_every < 1:
            raise ValueError("eval_every must be >= 1")
        if self.max_updates < self.eval_every:
            raise ValueError("max_updates must be >= eval_every")
        if not 0.0 <= self.warmup_fraction <= 1.0:
            raise ValueError("warmup_fraction must be in [0, 1]")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")

    def resolve(self, n_train: int) -> "TrainConfig":
        """Concretize ``epochs`` into ``max_updates`` for a given train size."""
        if self.epochs is None:
            return self
        updates = self.epochs * math.ceil(n_train / self.batch_size)
        return replace(self, max_updates=max(updates, self.eval_every), epochs=None)


# Named presets. "desk" is the default footprint; "visualbert-full" is the
# full-width VisualBERT fine-tuning recipe; "uniter-finetune" carries the
# published UNITER hyperparameters (epoch-based, resolved against dataset
# size); "synthetic-demo" is tuned for the bundled synthetic dataset.
PRESETS: dict[str, dict[str, dict]] = {
    "desk": {
        "model": {},
        "train": {},
        "loss": {},
    },
    "visualbert-full": {
        "model": {
            "d_model": 768,
            "n_layers": 12,
            "n_heads": 12,
            "d_ff": 3072,
            "max_text_len": 128,
            "max_boxes": 120,
            "dropout_rate": 0.1,
        },
        "train": {
            "learning_rate": 5e-5,
            "batch_size": 32,
            "max_updates": 3000,
            "eval_every": 50,
        },
        "loss": {},
    },
    "uniter-finetune": {
        "model": {"dropout_rate": 0.1},
        "train": {
            "learning_rate": 1e-5,
            "batch_size": 8,
            "epochs": 5,
        },
        "loss": {},
    },
    "synthetic-demo": {
        "model": {
            "vocab_size": 512,
            "d_model": 64,
            "n_layers": 2,
            "n_heads": 4,
            "d_ff": 128,
            "max_text_len": 16,
            "max_boxes": 8,
            "region_dim": 64,
            "dropout_rate": 0.1,
        },
        "train": {
            "learning_rate": 2e-3,
            "batch_size": 32,
            "max_updates": 500,
            "eval_every": 50,
        },
        "loss": {},
    },
}


def preset(name: str) -> dict[str, dict]:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    return {section: dict(values) for section, values in PRESETS[name].items()}


def configs_from_preset(name: str) -> tuple[ModelConfig, TrainConfig, LossSpec]:
    p = preset(name)
    return (
        ModelConfig(**p["model"]),
        TrainConfig(preset_name=name, **p["train"]),
        LossSpec(**p["loss"]),
    )
