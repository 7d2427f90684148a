"""Cross-entropy and focal loss over two-class logits.

Losses are evaluated in log space via log-sum-exp, so the probability of the
true class never underflows to zero on the gradient path. For two classes,
``1 - p_t`` is taken as the probability of the other class rather than
subtracting, which stays accurate as ``p_t`` approaches 1.
"""

from __future__ import annotations

import numpy as np

from .config import LossSpec


def loss_from_pt(probs_true_class, spec: LossSpec) -> float:
    """Mean loss over a batch of true-class probabilities.

    CE(p_t) = -ln p_t;  FL(p_t) = -(1 - p_t)^gamma * ln p_t.
    """
    p = np.asarray(probs_true_class, dtype=np.float64)
    if p.size == 0:
        raise ValueError("empty batch")
    if np.any(p <= 0) or np.any(p > 1):
        raise ValueError("p_t must lie in (0, 1]; values outside signal an upstream bug")
    ce = -np.log(p)
    if spec.kind == "focal":
        return float(np.mean((1.0 - p) ** spec.gamma * ce))
    return float(np.mean(ce))


def loss_and_dlogits(logits: np.ndarray, labels: np.ndarray,
                     spec: LossSpec) -> tuple[float, np.ndarray]:
    """Mean batch loss and its gradient w.r.t. the (B, 2) logits."""
    z = np.asarray(logits, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    batch = len(y)
    rows = np.arange(batch)
    m = z.max(axis=1, keepdims=True)
    logsumexp = m[:, 0] + np.log(np.exp(z - m).sum(axis=1))
    logp = z - logsumexp[:, None]
    p = np.exp(logp)
    pt = p[rows, y]
    logpt = logp[rows, y]
    one_minus_pt = p[rows, 1 - y]

    if spec.kind == "focal" and spec.gamma > 0:
        g = spec.gamma
        losses = -(one_minus_pt ** g) * logpt
        # d loss / d logit_j = (delta_tj - p_j) * c, with the pt -> 1 limit c -> 0
        with np.errstate(divide="ignore", invalid="ignore"):
            c = g * one_minus_pt ** (g - 1.0) * pt * logpt - one_minus_pt ** g
        c = np.where(one_minus_pt == 0.0, 0.0, c)
    else:
        losses = -logpt
        c = np.full(batch, -1.0)

    delta = np.zeros_like(p)
    delta[rows, y] = 1.0
    dlogits = (delta - p) * c[:, None] / batch
    return float(losses.mean()), dlogits
