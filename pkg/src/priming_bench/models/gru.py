"""GRU encoder-decoder with dot-product attention over encoder states.

Gates::

    z = sigmoid(x W_z + h U_z + b_z)
    r = sigmoid(x W_r + h U_r + b_r)
    h~ = tanh(x W_h + (r * h) U_h + b_h)
    h' = (1 - z) * h + z * h~

The decoder starts from the final encoder state.  At each step the context
vector is an attention-weighted sum of encoder states, and logits come from
the concatenation [decoder state; context].
"""

from __future__ import annotations

import math
from typing import Mapping, Optional

import numpy as np

from .. import autodiff as ad
from ..autodiff import ShapeError, Tensor
from ..data import PAD, Batch
from .params import GruParams


def _step(xz: Tensor, xr: Tensor, xh: Tensor, h_prev: Tensor, g: Mapping[str, Tensor]) -> Tensor:
    # x-side projections (bias included) are precomputed by the caller
    z = ad.sigmoid(ad.add(xz, ad.matmul(h_prev, g["U_z"])))
    r = ad.sigmoid(ad.add(xr, ad.matmul(h_prev, g["U_r"])))
    cand = ad.tanh(ad.add(xh, ad.matmul(ad.mul(r, h_prev), g["U_h"])))
    # (1 - z) * h + z * h~  ==  h + z * (h~ - h)
    return ad.add(h_prev, ad.mul(z, ad.sub(cand, h_prev)))


def _project(x: Tensor, g: Mapping[str, Tensor]) -> tuple[Tensor, Tensor, Tensor]:
    return tuple(ad.add(ad.matmul(x, g[f"W_{k}"]), g[f"b_{k}"]) for k in "zrh")


def gru_cell(x_t: Tensor, h_prev: Tensor, gates: Mapping[str, Tensor]) -> Tensor:
    """One GRU update for a batch: x_t (B, E), h_prev (B, H) -> (B, H)."""
    e, h = gates["W_z"].shape
    if x_t.shape[-1] != e or h_prev.shape[-1] != h:
        raise ShapeError(f"gru_cell expects x (..., {e}) and h (..., {h}), got {x_t.shape} and {h_prev.shape}")
    return _step(*_project(x_t, gates), h_prev, gates)


def gru_attention_context(eh: Tensor, dh: Tensor, mask: Optional[np.ndarray] = None) -> tuple[Tensor, Tensor]:
    """Context c = sum_i alpha_i eh_i with alpha = softmax_i(eh_i . dh / sqrt(H)).

    eh is (B, S, H); dh is (B, H) for one step or (B, T, H) for all steps.
    mask is (B, S), True at real (non-pad) encoder positions.
    """
    if eh.shape[1] == 0:
        raise ValueError("no encoder states to attend over")
    single = dh.ndim == 2
    if single:
        dh = ad.reshape(dh, (dh.shape[0], 1, dh.shape[1]))
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)[:, None, :]
        if not mask.any(axis=-1).all():
            raise ValueError("every encoder position is masked")
    scores = ad.scale(ad.matmul(dh, ad.transpose(eh, (0, 2, 1))), 1.0 / math.sqrt(eh.shape[-1]))
    alpha = ad.softmax(scores, axis=-1, mask=mask)
    context = ad.matmul(alpha, eh)
    if single:
        b, _, h = context.shape
        context = ad.reshape(context, (b, h))
        alpha = ad.reshape(alpha, (b, alpha.shape[-1]))
    return context, alpha


def gru_encode(params: GruParams, src_ids: np.ndarray) -> tuple[Tensor, Tensor, np.ndarray]:
    """Encoder states eh (B, S, H), final state (B, H) and the source mask (B, S).

    Padded positions carry the previous state forward, so the final state of
    each row is its state after the last real token.
    """
    src_ids = np.asarray(src_ids)
    b, s = src_ids.shape
    if s == 0:
        raise ValueError("empty source sequence")
    mask = src_ids != PAD
    g = params.gates("enc")
    xz, xr, xh = _project(ad.embedding_lookup(params["src_emb"], src_ids), g)
    h = Tensor(np.zeros((b, params.config.hidden)))
    states = []
    for t in range(s):
        new = _step(ad.select(xz, t, 1), ad.select(xr, t, 1), ad.select(xh, t, 1), h, g)
        m = mask[:, t]
        if m.all():
            h = new
        else:
            h = ad.add(h, ad.mul(Tensor(m[:, None].astype(np.float64)), ad.sub(new, h)))
        states.append(h)
    return ad.stack(states, axis=1), h, mask


def _output(params: GruParams, dh: Tensor, context: Tensor) -> Tensor:
    return ad.add(ad.matmul(ad.concat([dh, context], axis=-1), params["out.W"]), params["out.b"])


def gru_decode_step(params: GruParams, eh: Tensor, mask: np.ndarray, prev_ids: np.ndarray,
                    dh: Tensor) -> tuple[Tensor, Tensor]:
    """Feed the previous target token; return (logits (B, V), new decoder state)."""
    m = ad.embedding_lookup(params["tgt_emb"], np.asarray(prev_ids))
    dh = gru_cell(m, dh, params.gates("dec"))
    context, _ = gru_attention_context(eh, dh, mask)
    return _output(params, dh, context), dh


def gru_seq2seq_forward(params: GruParams, batch: Batch) -> Tensor:
    """Teacher-forced logits of shape (B, T, V_tgt)."""
    eh, dh, mask = gru_encode(params, batch.src_ids)
    tgt = np.asarray(batch.tgt_in_ids)
    b, t = tgt.shape
    if t == 0:
        return Tensor(np.zeros((b, 0, params.config.tgt_vocab)))
    g = params.gates("dec")
    xz, xr, xh = _project(ad.embedding_lookup(params["tgt_emb"], tgt), g)
    states = []
    for i in range(t):
        dh = _step(ad.select(xz, i, 1), ad.select(xr, i, 1), ad.select(xh, i, 1), dh, g)
        states.append(dh)
    dhs = ad.stack(states, axis=1)
    context, _ = gru_attention_context(eh, dhs, mask)
    return _output(params, dhs, context)
