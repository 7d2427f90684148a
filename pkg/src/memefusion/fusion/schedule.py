"""Cosine warmup / cosine decay learning-rate schedule."""

from __future__ import annotations

import math

from .config import TrainConfig


def lr_at(step: int, cfg: TrainConfig) -> float:
    """Learning rate at an update step in [0, max_updates].

    With W = warmup_fraction * max_updates:
      step <  W: lr_max * 0.5 * (1 - cos(pi * step / W))
      step >= W: lr_max * 0.5 * (1 + cos(pi * (step - W) / (max_updates - W)))
    Continuous at W, peaks at lr_max there, decays to 0 at max_updates.
    """
    if not 0 <= step <= cfg.max_updates:
        raise ValueError(f"step must be in [0, {cfg.max_updates}], got {step}")
    lr_max = cfg.learning_rate
    warmup = cfg.warmup_fraction * cfg.max_updates
    if step < warmup:
        return lr_max * 0.5 * (1.0 - math.cos(math.pi * step / warmup))
    decay_span = cfg.max_updates - warmup
    if decay_span <= 0:
        return lr_max
    return lr_max * 0.5 * (1.0 + math.cos(math.pi * (step - warmup) / decay_span))
