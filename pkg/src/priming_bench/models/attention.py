from __future__ import annotations

import math
from typing import Mapping, Optional

import numpy as np

from .. import autodiff as ad
from ..autodiff import ShapeError, Tensor


def scaled_dot_attention(q: Tensor, k: Tensor, v: Tensor,
                         mask: Optional[np.ndarray] = None) -> tuple[Tensor, Tensor]:
    """softmax(q k^T / sqrt(d_k)) v over the last two axes.

    ``mask`` is boolean, broadcastable to the (..., Tq, Tk) score shape, with
    True marking keys a query may attend to.
    """
    if q.shape[-1] != k.shape[-1]:
        raise ShapeError(f"query dim {q.shape} and key dim {k.shape} differ")
    if k.shape[-2] != v.shape[-2]:
        raise ShapeError(f"keys {k.shape} and values {v.shape} have different lengths")
    if mask is not None:
        score_shape = q.shape[:-1] + (k.shape[-2],)
        mask = np.broadcast_to(mask, np.broadcast_shapes(mask.shape, score_shape))
        if not mask.any(axis=-1).all():
            raise ValueError("attention row with every key masked")
    kt = ad.transpose(k, tuple(range(k.ndim - 2)) + (k.ndim - 1, k.ndim - 2))
    scores = ad.scale(ad.matmul(q, kt), 1.0 / math.sqrt(q.shape[-1]))
    weights = ad.softmax(scores, axis=-1, mask=mask)
    return ad.matmul(weights, v), weights


def split_heads(x: Tensor, n_heads: int) -> Tensor:
    b, t, d = x.shape
    return ad.transpose(ad.reshape(x, (b, t, n_heads, d // n_heads)), (0, 2, 1, 3))


def merge_heads(x: Tensor) -> Tensor:
    b, h, t, dk = x.shape
    return ad.reshape(ad.transpose(x, (0, 2, 1, 3)), (b, t, h * dk))


def multi_head_attention(x_q: Tensor, x_kv: Tensor, weights: Mapping[str, Tensor], n_heads: int,
                         mask: Optional[np.ndarray] = None, return_weights: bool = False):
    """Concat(head_1..head_h) @ W_O, each head attending in its own d_k slice.

    ``weights`` holds W_Q, W_K, W_V, W_O; ``mask`` broadcasts to (B, h, Tq, Tk).
    """
    d_model = x_q.shape[-1]
    if d_model % n_heads:
        raise ValueError(f"d_model={d_model} is not divisible by n_heads={n_heads}")
    q = split_heads(ad.matmul(x_q, weights["W_Q"]), n_heads)
    k = split_heads(ad.matmul(x_kv, weights["W_K"]), n_heads)
    v = split_heads(ad.matmul(x_kv, weights["W_V"]), n_heads)
    heads, attn = scaled_dot_attention(q, k, v, mask)
    out = ad.matmul(merge_heads(heads), weights["W_O"])
    return (out, attn) if return_weights else out
