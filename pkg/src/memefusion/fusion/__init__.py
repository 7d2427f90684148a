"""Single-stream fusion transformer: configuration, numpy network with
hand-written backprop, AdamW training loop, checkpointing, and an
estimator-style wrapper.
"""

from .checkpoint import load_checkpoint, save_checkpoint
from .config import (LossSpec, ModelConfig, PRESETS, TrainConfig,
                     configs_from_preset, preset)
from .estimator import FusionClassifier
from .loss import loss_and_dlogits, loss_from_pt
from .network import (Batch, backward, forward, init_params, pack_batch,
                      param_spec, params_to_vector, predict_probs,
                      vector_to_params)
from .schedule import lr_at
from .tokenizer import CLS_ID, PAD_ID, UNK_ID, encode, token_id
from .trainer import AdamW, LogRow, TrainedModel, predict, read_training_log, train, write_training_log

__all__ = [
    "load_checkpoint", "save_checkpoint",
    "LossSpec", "ModelConfig", "PRESETS", "TrainConfig",
    "configs_from_preset", "preset",
    "FusionClassifier",
    "loss_and_dlogits", "loss_from_pt",
    "Batch", "backward", "forward", "init_params", "pack_batch", "param_spec",
    "params_to_vector", "predict_probs", "vector_to_params",
    "lr_at",
    "CLS_ID", "PAD_ID", "UNK_ID", "encode", "token_id",
    "AdamW", "LogRow", "TrainedModel", "predict", "read_training_log",
    "train", "write_training_log",
]
