"""Hashing tokenizer.

No pretrained vocabulary is available, so normalized tokens are hashed into a
fixed-size id space with a stable digest (process-independent, unlike
``hash``). Ids 0..2 are reserved for padding, the leading CLS slot, and the
unknown token used when a text normalizes to nothing.
"""

from __future__ import annotations

import hashlib

from ..tagging import normalize
from .config import N_RESERVED_TOKENS

PAD_ID = 0
CLS_ID = 1
UNK_ID = 2


def token_id(token: str, vocab_size: int) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return N_RESERVED_TOKENS + int.from_bytes(digest, "little") % (vocab_size - N_RESERVED_TOKENS)


def encode(text: str, vocab_size: int, max_text_len: int) -> list[int]:
    """Token ids for a text, truncated to ``max_text_len``; never empty."""
    tokens = normalize(text)[:max_text_len]
    if not tokens:
        return [UNK_ID]
    return [token_id(t, vocab_size) for t in tokens]
