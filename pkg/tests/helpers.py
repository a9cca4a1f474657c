"""Small model and batch builders shared by the test modules."""

import numpy as np

from priming_bench.data import BOS, EOS, PAD, Batch, pad_rows
from priming_bench.models import GruConfig, GruParams, TransformerConfig, TransformerParams

V_SRC, V_TGT = 12, 12


def tiny_transformer(seed=0, d_model=8, n_heads=8, n_layers=1, d_ff=16, max_len=8, vocab=(V_SRC, V_TGT)):
    cfg = TransformerConfig(src_vocab=vocab[0], tgt_vocab=vocab[1], d_model=d_model, n_heads=n_heads,
                            n_layers=n_layers, d_ff=d_ff, max_len=max_len)
    return TransformerParams.init(cfg, seed)


def tiny_gru(seed=0, emb=8, hidden=8, vocab=(V_SRC, V_TGT)):
    return GruParams.init(GruConfig(src_vocab=vocab[0], tgt_vocab=vocab[1], emb_dim=emb, hidden=hidden), seed)


def tiny(kind, seed=0, **kw):
    return tiny_transformer(seed, **kw) if kind == "transformer" else tiny_gru(seed, **kw)


def random_batch(rng, b=3, s=4, t=4, vocab=(V_SRC, V_TGT), ragged=True):
    """Token ids drawn above the special range; rows shortened when ``ragged``."""
    src, tgt = [], []
    for i in range(b):
        ls = s if (not ragged or i == 0) else int(rng.integers(1, s + 1))
        lt = t if (not ragged or i == 0) else int(rng.integers(1, t + 1))
        src.append(list(rng.integers(4, vocab[0], size=ls)))
        tgt.append(list(rng.integers(4, vocab[1], size=lt - 1)))
    return Batch(src_ids=pad_rows(src, PAD),
                 tgt_in_ids=pad_rows([[BOS] + x for x in tgt], PAD),
                 labels=pad_rows([x + [EOS] for x in tgt], -100))
