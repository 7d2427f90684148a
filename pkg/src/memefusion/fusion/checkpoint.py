"""Versioned binary model checkpoint.

Layout: magic ``FMC1``, little-endian u32 header length, a UTF-8 JSON header
(sorted keys) holding the model/training/loss configs and best-model
metadata, then every parameter as little-endian float32 in the order given
by :func:`memefusion.fusion.network.param_spec`. Loading therefore rounds
parameters to float32; saving again reproduces the same bytes.
"""

from __future__ import annotations

import dataclasses
import json
import struct

import numpy as np

from .config import LossSpec, ModelConfig, TrainConfig
from .network import param_spec, params_to_vector, vector_to_params
from .trainer import TrainedModel

MAGIC = b"FMC1"
FORMAT_VERSION = 1


def save_checkpoint(path, model: TrainedModel) -> None:
    header = {
        "format_version": FORMAT_VERSION,
        "model": dataclasses.asdict(model.model_config),
        "train": dataclasses.asdict(model.train_config),
        "loss": dataclasses.asdict(model.loss_spec),
        "best_step": model.best_step,
        "best_val_auroc": model.best_val_auroc,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    vec = params_to_vector(model.params, model.model_config).astype("<f4")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        fh.write(vec.tobytes())


def load_checkpoint(path) -> TrainedModel:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise ValueError(f"{path}: not a model checkpoint (bad magic {blob[:4]!r})")
    if len(blob) < 8:
        raise ValueError(f"{path}: truncated header")
    (header_len,) = struct.unpack_from("<I", blob, 4)
    header_end = 8 + header_len
    if header_end > len(blob):
        raise ValueError(f"{path}: truncated header")
    header = json.loads(blob[8:header_end].decode("utf-8"))
    if header.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {header.get('format_version')}")
    model_cfg = ModelConfig(**header["model"])
    train_cfg = TrainConfig(**header["train"])
    loss_spec = LossSpec(**header["loss"])
    n_params = sum(int(np.prod(shape)) for _, shape in param_spec(model_cfg))
    body = blob[header_end:]
    if len(body) != 4 * n_params:
        raise ValueError(
            f"{path}: expected {4 * n_params} parameter bytes, found {len(body)}")
    vec = np.frombuffer(body, dtype="<f4").astype(np.float64)
    return TrainedModel(params=vector_to_params(vec, model_cfg),
                        model_config=model_cfg, train_config=train_cfg,
                        loss_spec=loss_spec, best_step=header["best_step"],
                        best_val_auroc=header["best_val_auroc"], history=[])
