"""Single-stream fusion transformer, implemented directly on numpy arrays.

The sequence fed to the encoder is [CLS] + text tokens + projected region
vectors. Positional embeddings cover the CLS/text positions only, so the
output is invariant to the order of an example's boxes; segment embeddings
distinguish the two modalities. Forward/backward are hand-written in float64
and verified against central finite differences by the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..data import Example
from .config import ModelConfig
from .tokenizer import CLS_ID, PAD_ID, encode

LN_EPS = 1e-12
MASK_BIAS = -1e9  # large enough that masked attention weights underflow to exactly 0
_GELU_C = math.sqrt(2.0 / math.pi)
_GELU_A = 0.044715


# -- parameters -----------------------------------------------------------

def param_spec(cfg: ModelConfig) -> list[tuple[str, tuple[int, ...]]]:
    """Parameter names and shapes in the fixed serialization order."""
    d, f = cfg.d_model, cfg.d_ff
    spec: list[tuple[str, tuple[int, ...]]] = [
        ("tok_emb", (cfg.vocab_size, d)),
        ("pos_emb", (cfg.max_text_len + 1, d)),
        ("seg_emb", (2, d)),
        ("reg_w", (cfg.region_dim, d)),
        ("reg_b", (d,)),
        ("emb_ln_g", (d,)),
        ("emb_ln_b", (d,)),
    ]
    for i in range(cfg.n_layers):
        pre = f"l{i}."
        spec += [
            (pre + "q_w", (d, d)), (pre + "q_b", (d,)),
            (pre + "k_w", (d, d)), (pre + "k_b", (d,)),
            (pre + "v_w", (d, d)), (pre + "v_b", (d,)),
            (pre + "o_w", (d, d)), (pre + "o_b", (d,)),
            (pre + "ln1_g", (d,)), (pre + "ln1_b", (d,)),
            (pre + "ffn1_w", (d, f)), (pre + "ffn1_b", (f,)),
            (pre + "ffn2_w", (f, d)), (pre + "ffn2_b", (d,)),
            (pre + "ln2_g", (d,)), (pre + "ln2_b", (d,)),
        ]
    spec += [
        ("pool_w", (d, d)), ("pool_b", (d,)),
        ("head_w", (d, 2)), ("head_b", (2,)),
    ]
    return spec


def init_params(cfg: ModelConfig, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Weights ~ N(0, 0.02), biases 0, LayerNorm gains 1.

    The classification head starts at zero, so an untrained model outputs
    probability exactly 0.5 for every input.
    """
    params: dict[str, np.ndarray] = {}
    for name, shape in param_spec(cfg):
        if name.endswith("_g"):
            params[name] = np.ones(shape)
        elif name.endswith("_b") or name.startswith("head_"):
            params[name] = np.zeros(shape)
        else:
            params[name] = rng.normal(0.0, 0.02, size=shape)
    return params


def params_to_vector(params: dict[str, np.ndarray], cfg: ModelConfig) -> np.ndarray:
    return np.concatenate([params[name].ravel() for name, _ in param_spec(cfg)])


def vector_to_params(vec: np.ndarray, cfg: ModelConfig) -> dict[str, np.ndarray]:
    params = {}
    offset = 0
    for name, shape in param_spec(cfg):
        size = int(np.prod(shape))
        params[name] = vec[offset:offset + size].reshape(shape).copy()
        offset += size
    if offset != vec.size:
        raise ValueError(f"parameter vector has {vec.size} entries, expected {offset}")
    return params


# -- batching --------------------------------------------------------------

@dataclass
class Batch:
    ids: np.ndarray     # (B, 1 + T) int64: CLS + token ids, PAD-padded
    feats: np.ndarray   # (B, R, region_dim) float64, zero-padded
    mask: np.ndarray    # (B, 1 + T + R) bool: True at real positions
    labels: np.ndarray | None = None

    def __len__(self) -> int:
        return self.ids.shape[0]


def pack_batch(examples: list[Example], cfg: ModelConfig, require_labels: bool = False) -> Batch:
    """Tokenize, truncate and pad a list of examples into one batch.

    Texts are truncated to ``max_text_len`` tokens and feature matrices to
    the first ``max_boxes`` boxes.
    """
    if not examples:
        raise ValueError("cannot pack an empty batch")
    token_lists = []
    box_counts = []
    for ex in examples:
        if ex.features.shape[1] != cfg.region_dim:
            raise ValueError(
                f"example {ex.id}: feature dim {ex.features.shape[1]} != region_dim {cfg.region_dim}"
            )
        token_lists.append(encode(ex.record.text, cfg.vocab_size, cfg.max_text_len))
        box_counts.append(min(ex.features.shape[0], cfg.max_boxes))
    n = len(examples)
    t_max = max(len(t) for t in token_lists)
    r_max = max(box_counts)
    ids = np.full((n, 1 + t_max), PAD_ID, dtype=np.int64)
    ids[:, 0] = CLS_ID
    feats = np.zeros((n, r_max, cfg.region_dim), dtype=np.float64)
    mask = np.zeros((n, 1 + t_max + r_max), dtype=bool)
    for i, (ex, toks, nb) in enumerate(zip(examples, token_lists, box_counts)):
        ids[i, 1:1 + len(toks)] = toks
        feats[i, :nb] = ex.features[:nb]
        mask[i, :1 + len(toks)] = True
        mask[i, 1 + t_max:1 + t_max + nb] = True
    labels = None
    if require_labels:
        unlabeled = [ex.id for ex in examples if ex.record.label is None]
        if unlabeled:
            raise ValueError(f"unlabeled examples: ids {unlabeled[:10]}")
        labels = np.asarray([ex.record.label for ex in examples], dtype=np.int64)
    return Batch(ids=ids, feats=feats, mask=mask, labels=labels)


# -- primitive ops ----------------------------------------------------------

def _layer_norm(x, g, b):
    mu = x.mean(-1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LN_EPS)
    xhat = xc * inv
    return g * xhat + b, (xhat, inv)


def _layer_norm_back(dy, g, ln_cache):
    xhat, inv = ln_cache
    axes = tuple(range(dy.ndim - 1))
    dg = (dy * xhat).sum(axis=axes)
    db = dy.sum(axis=axes)
    dxhat = dy * g
    dx = inv * (
        dxhat
        - dxhat.mean(-1, keepdims=True)
        - xhat * (dxhat * xhat).mean(-1, keepdims=True)
    )
    return dx, dg, db


def _gelu(x):
    t = np.tanh(_GELU_C * (x + _GELU_A * x ** 3))
    return 0.5 * x * (1.0 + t), t


def _gelu_back(dy, x, t):
    du_dx = _GELU_C * (1.0 + 3.0 * _GELU_A * x * x)
    return dy * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du_dx)


def _dropout(x, rate, rng, train):
    if not train or rate == 0.0:
        return x, None
    keep = rng.random(x.shape) >= rate
    scale = 1.0 / (1.0 - rate)
    return x * keep * scale, (keep, scale)


def _dropout_back(dy, do_cache):
    if do_cache is None:
        return dy
    keep, scale = do_cache
    return dy * keep * scale


def _softmax_last(x):
    m = x.max(-1, keepdims=True)
    e = np.exp(x - m)
    return e / e.sum(-1, keepdims=True)


# -- forward / backward ------------------------------------------------------

def forward(params: dict[str, np.ndarray], cfg: ModelConfig, batch: Batch,
            train: bool = False, dropout_rng: np.random.Generator | None = None):
    """Class probabilities (B, 2) plus a cache for :func:`backward`."""
    ids, feats, mask = batch.ids, batch.feats, batch.mask
    n, t_tok = ids.shape
    d, heads = cfg.d_model, cfg.n_heads
    d_head = d // heads
    scale = 1.0 / math.sqrt(d_head)

    x_text = params["tok_emb"][ids] + params["pos_emb"][:t_tok][None, :, :] + params["seg_emb"][0]
    x_reg = feats @ params["reg_w"] + params["reg_b"] + params["seg_emb"][1]
    x0 = np.concatenate([x_text, x_reg], axis=1)
    x1, emb_ln = _layer_norm(x0, params["emb_ln_g"], params["emb_ln_b"])
    h, emb_do = _dropout(x1, cfg.dropout_rate, dropout_rng, train)

    bias = np.where(mask[:, None, None, :], 0.0, MASK_BIAS)
    layer_caches = []
    for i in range(cfg.n_layers):
        pre = f"l{i}."
        h_in = h
        q = h @ params[pre + "q_w"] + params[pre + "q_b"]
        k = h @ params[pre + "k_w"] + params[pre + "k_b"]
        v = h @ params[pre + "v_w"] + params[pre + "v_b"]
        s = h.shape[1]
        qh = q.reshape(n, s, heads, d_head).transpose(0, 2, 1, 3)
        kh = k.reshape(n, s, heads, d_head).transpose(0, 2, 1, 3)
        vh = v.reshape(n, s, heads, d_head).transpose(0, 2, 1, 3)
        scores = qh @ kh.transpose(0, 1, 3, 2) * scale + bias
        attn = _softmax_last(scores)
        attn_d, attn_do = _dropout(attn, cfg.dropout_rate, dropout_rng, train)
        ctx = (attn_d @ vh).transpose(0, 2, 1, 3).reshape(n, s, d)
        ao = ctx @ params[pre + "o_w"] + params[pre + "o_b"]
        aod, ao_do = _dropout(ao, cfg.dropout_rate, dropout_rng, train)
        y, ln1 = _layer_norm(h_in + aod, params[pre + "ln1_g"], params[pre + "ln1_b"])
        f1 = y @ params[pre + "ffn1_w"] + params[pre + "ffn1_b"]
        g1, gelu_t = _gelu(f1)
        f2 = g1 @ params[pre + "ffn2_w"] + params[pre + "ffn2_b"]
        f2d, f2_do = _dropout(f2, cfg.dropout_rate, dropout_rng, train)
        h, ln2 = _layer_norm(y + f2d, params[pre + "ln2_g"], params[pre + "ln2_b"])
        layer_caches.append({
            "h_in": h_in, "qh": qh, "kh": kh, "vh": vh,
            "attn": attn, "attn_d": attn_d, "attn_do": attn_do,
            "ctx": ctx, "ao_do": ao_do, "y": y, "f1": f1,
            "gelu_t": gelu_t, "g1": g1, "f2_do": f2_do,
            "ln1": ln1, "ln2": ln2,
        })

    cls = h[:, 0, :]
    pooled = np.tanh(cls @ params["pool_w"] + params["pool_b"])
    logits = pooled @ params["head_w"] + params["head_b"]
    probs = _softmax_last(logits)
    cache = {
        "batch": batch, "x1": x1, "emb_ln": emb_ln, "emb_do": emb_do,
        "layers": layer_caches, "cls": cls, "pooled": pooled,
        "logits": logits, "t_tok": t_tok, "scale": scale,
    }
    return probs, cache


def backward(params: dict[str, np.ndarray], cfg: ModelConfig, cache: dict,
             dlogits: np.ndarray) -> dict[str, np.ndarray]:
    """Gradients of the scalar loss w.r.t. every parameter."""
    batch: Batch = cache["batch"]
    ids, feats = batch.ids, batch.feats
    n, t_tok = ids.shape
    d, heads = cfg.d_model, cfg.n_heads
    d_head = d // heads
    scale = cache["scale"]
    grads: dict[str, np.ndarray] = {}

    pooled, cls = cache["pooled"], cache["cls"]
    grads["head_w"] = pooled.T @ dlogits
    grads["head_b"] = dlogits.sum(0)
    dpooled = dlogits @ params["head_w"].T
    dpre = dpooled * (1.0 - pooled * pooled)
    grads["pool_w"] = cls.T @ dpre
    grads["pool_b"] = dpre.sum(0)
    dcls = dpre @ params["pool_w"].T

    s = ids.shape[1] + feats.shape[1]
    dh = np.zeros((n, s, d))
    dh[:, 0, :] = dcls

    def matmul_grads(x, dout):
        return x.reshape(-1, x.shape[-1]).T @ dout.reshape(-1, dout.shape[-1])

    for i in reversed(range(cfg.n_layers)):
        pre = f"l{i}."
        lc = cache["layers"][i]
        dr2, grads[pre + "ln2_g"], grads[pre + "ln2_b"] = _layer_norm_back(
            dh, params[pre + "ln2_g"], lc["ln2"])
        dy = dr2.copy()
        df2 = _dropout_back(dr2, lc["f2_do"])
        grads[pre + "ffn2_w"] = matmul_grads(lc["g1"], df2)
        grads[pre + "ffn2_b"] = df2.sum((0, 1))
        dg1 = df2 @ params[pre + "ffn2_w"].T
        df1 = _gelu_back(dg1, lc["f1"], lc["gelu_t"])
        grads[pre + "ffn1_w"] = matmul_grads(lc["y"], df1)
        grads[pre + "ffn1_b"] = df1.sum((0, 1))
        dy += df1 @ params[pre + "ffn1_w"].T

        dr1, grads[pre + "ln1_g"], grads[pre + "ln1_b"] = _layer_norm_back(
            dy, params[pre + "ln1_g"], lc["ln1"])
        dh_in = dr1.copy()
        dao = _dropout_back(dr1, lc["ao_do"])
        grads[pre + "o_w"] = matmul_grads(lc["ctx"], dao)
        grads[pre + "o_b"] = dao.sum((0, 1))
        dctx = (dao @ params[pre + "o_w"].T).reshape(n, s, heads, d_head).transpose(0, 2, 1, 3)
        dattn_d = dctx @ lc["vh"].transpose(0, 1, 3, 2)
        dvh = lc["attn_d"].transpose(0, 1, 3, 2) @ dctx
        dattn = _dropout_back(dattn_d, lc["attn_do"])
        attn = lc["attn"]
        dscores = attn * (dattn - (dattn * attn).sum(-1, keepdims=True))
        dqh = dscores @ lc["kh"] * scale
        dkh = dscores.transpose(0, 1, 3, 2) @ lc["qh"] * scale
        dq = dqh.transpose(0, 2, 1, 3).reshape(n, s, d)
        dk = dkh.transpose(0, 2, 1, 3).reshape(n, s, d)
        dv = dvh.transpose(0, 2, 1, 3).reshape(n, s, d)
        h_in = lc["h_in"]
        for mat, dmat in (("q", dq), ("k", dk), ("v", dv)):
            grads[pre + mat + "_w"] = matmul_grads(h_in, dmat)
            grads[pre + mat + "_b"] = dmat.sum((0, 1))
        dh_in += dq @ params[pre + "q_w"].T + dk @ params[pre + "k_w"].T + dv @ params[pre + "v_w"].T
        dh = dh_in

    dx1 = _dropout_back(dh, cache["emb_do"])
    dx0, grads["emb_ln_g"], grads["emb_ln_b"] = _layer_norm_back(
        dx1, params["emb_ln_g"], cache["emb_ln"])
    dx_text = dx0[:, :t_tok]
    dx_reg = dx0[:, t_tok:]
    grads["tok_emb"] = np.zeros_like(params["tok_emb"])
    np.add.at(grads["tok_emb"], ids, dx_text)
    grads["pos_emb"] = np.zeros_like(params["pos_emb"])
    grads["pos_emb"][:t_tok] = dx_text.sum(0)
    grads["seg_emb"] = np.stack([dx_text.sum((0, 1)), dx_reg.sum((0, 1))])
    grads["reg_w"] = matmul_grads(feats, dx_reg)
    grads["reg_b"] = dx_reg.sum((0, 1))
    return grads


def predict_probs(params: dict[str, np.ndarray], cfg: ModelConfig,
                  examples: list[Example], batch_size: int = 64) -> np.ndarray:
    """Probability of the "hateful" class per example, in input order."""
    out = np.empty(len(examples), dtype=np.float64)
    for start in range(0, len(examples), batch_size):
        chunk = examples[start:start + batch_size]
        probs, _ = forward(params, cfg, pack_batch(chunk, cfg), train=False)
        out[start:start + len(chunk)] = probs[:, 1]
    return out
