"""Pre-norm Transformer encoder-decoder with learned positional embeddings."""

from __future__ import annotations

import numpy as np

from .. import autodiff as ad
from ..autodiff import ShapeError, Tensor
from ..data import PAD, Batch
from .attention import multi_head_attention
from .params import TransformerParams


def _sub(params: TransformerParams, prefix: str) -> dict[str, Tensor]:
    return {w: params[f"{prefix}.{w}"] for w in ("W_Q", "W_K", "W_V", "W_O")}


def _norm(params, prefix: str, x: Tensor) -> Tensor:
    return ad.layer_norm(x, params[f"{prefix}_g"], params[f"{prefix}_b"], params.config.ln_eps)


def _ffn(params, prefix: str, x: Tensor) -> Tensor:
    h = ad.relu(ad.add(ad.matmul(x, params[f"{prefix}.W1"]), params[f"{prefix}.b1"]))
    return ad.add(ad.matmul(h, params[f"{prefix}.W2"]), params[f"{prefix}.b2"])


def _embed(params, table: str, pos_table: str, ids: np.ndarray) -> Tensor:
    length = ids.shape[1]
    if length > params.config.max_len:
        raise ShapeError(f"sequence length {length} exceeds positional table length {params.config.max_len}")
    tok = ad.embedding_lookup(params[table], ids)
    pos = ad.embedding_lookup(params[pos_table], np.arange(length))
    return ad.add(tok, pos)


def transformer_encode(params: TransformerParams, src_ids: np.ndarray) -> tuple[Tensor, np.ndarray]:
    """Encoder output (B, S, d_model) and the source key mask (B, 1, 1, S)."""
    src_ids = np.asarray(src_ids)
    key_mask = (src_ids != PAD)[:, None, None, :]
    h = params.config.n_heads
    x = _embed(params, "src_emb", "src_pos", src_ids)
    for i in range(params.config.n_layers):
        p = f"enc.{i}"
        y = _norm(params, f"{p}.ln1", x)
        x = ad.add(x, multi_head_attention(y, y, _sub(params, f"{p}.self"), h, key_mask))
        x = ad.add(x, _ffn(params, f"{p}.ffn", _norm(params, f"{p}.ln2", x)))
    return _norm(params, "enc.ln_f", x), key_mask


def causal_mask(tgt_ids: np.ndarray) -> np.ndarray:
    """(B, 1, T, T) mask: query t sees non-pad keys at positions <= t."""
    t = tgt_ids.shape[1]
    lower = np.tril(np.ones((t, t), dtype=bool))
    return lower[None, None] & (tgt_ids != PAD)[:, None, None, :]


def transformer_decode(params: TransformerParams, memory: Tensor, src_key_mask: np.ndarray,
                       tgt_in_ids: np.ndarray) -> Tensor:
    tgt_in_ids = np.asarray(tgt_in_ids)
    h = params.config.n_heads
    self_mask = causal_mask(tgt_in_ids)
    x = _embed(params, "tgt_emb", "tgt_pos", tgt_in_ids)
    for i in range(params.config.n_layers):
        p = f"dec.{i}"
        y = _norm(params, f"{p}.ln1", x)
        x = ad.add(x, multi_head_attention(y, y, _sub(params, f"{p}.self"), h, self_mask))
        y = _norm(params, f"{p}.ln2", x)
        x = ad.add(x, multi_head_attention(y, memory, _sub(params, f"{p}.cross"), h, src_key_mask))
        x = ad.add(x, _ffn(params, f"{p}.ffn", _norm(params, f"{p}.ln3", x)))
    x = _norm(params, "dec.ln_f", x)
    return ad.add(ad.matmul(x, params["out.W"]), params["out.b"])


def transformer_forward(params: TransformerParams, batch: Batch) -> Tensor:
    """Teacher-forced logits of shape (B, T, V_tgt)."""
    memory, key_mask = transformer_encode(params, batch.src_ids)
    return transformer_decode(params, memory, key_mask, batch.tgt_in_ids)
