"""Library-level generate / train / evaluate steps shared by the CLI and demos."""

from __future__ import annotations

import logging
import math
from typing import Callable, Optional, Sequence

import numpy as np

from .bleu import BleuConfig, bleu_score
from .config import RunConfig
from .data import ParallelPair, build_vocabulary, make_batches, tokenize
from .models import GruConfig, GruParams, TransformerConfig, TransformerParams, TranslationModel, train_epoch
from .optim import AdamState
from .priming.evaluate import EvalConfig

log = logging.getLogger(__name__)


class NonFiniteLossError(RuntimeError):
    pass


def fits(pair: ParallelPair, max_len: int) -> bool:
    return len(tokenize(pair.source, "source")) <= max_len and len(tokenize(pair.target, "target")) < max_len


def init_model(kind: str, corpus: Sequence[ParallelPair], config: RunConfig) -> TranslationModel:
    src_vocab = build_vocabulary(corpus, "source", config.training.min_count)
    tgt_vocab = build_vocabulary(corpus, "target", config.training.min_count)
    if kind == "transformer":
        t = config.transformer
        cfg = TransformerConfig(len(src_vocab), len(tgt_vocab), t.d_model, t.n_heads, t.n_layers, t.d_ff, t.max_len)
        params = TransformerParams.init(cfg, config.seed)
    elif kind == "gru":
        cfg = GruConfig(len(src_vocab), len(tgt_vocab), config.gru.emb_dim, config.gru.hidden)
        params = GruParams.init(cfg, config.seed)
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    return TranslationModel(params, src_vocab, tgt_vocab, max_decode_len=config.training.max_len)


def train_model(kind: str, corpus: Sequence[ParallelPair], config: RunConfig,
                on_epoch: Optional[Callable[[int, float, TranslationModel], bool]] = None
                ) -> tuple[TranslationModel, list[float]]:
    """Initialise and train a model; ``on_epoch`` may return True to stop early."""
    kept = [p for p in corpus if fits(p, config.training.max_len)]
    if len(kept) < len(corpus):
        log.warning("dropped %d pairs longer than max_len=%d", len(corpus) - len(kept), config.training.max_len)
    if not kept:
        raise ValueError("no training pairs left")
    model = init_model(kind, kept, config)
    state = AdamState(learning_rate=config.training.learning_rate)
    rng = np.random.default_rng([config.seed, 3])
    losses = []
    for epoch in range(1, config.training.epochs + 1):
        order = rng.permutation(len(kept))
        batches = make_batches([kept[i] for i in order], model.src_vocab, model.tgt_vocab,
                               config.training.batch_size)
        loss = train_epoch(model.params, kind, batches, state)
        if not math.isfinite(loss):
            raise NonFiniteLossError(f"{kind}: non-finite loss {loss} at epoch {epoch}")
        losses.append(loss)
        log.info("%s epoch %d loss %.6f", kind, epoch, loss)
        if on_epoch is not None and on_epoch(epoch, loss, model):
            break
    return model, losses


def eval_config(config: RunConfig, threads: Optional[int] = None) -> EvalConfig:
    return EvalConfig(bleu=config.bleu.to_config(), per_n_smoothing=config.bleu.per_n_smoothing,
                      seed=config.seed, threads=threads)


def mean_sentence_bleu(model: TranslationModel, corpus: Sequence[ParallelPair], max_n: int = 4) -> float:
    """Mean sentence BLEU of greedy translations against the gold targets."""
    cfg = BleuConfig(max_n=max_n)
    return math.fsum(bleu_score(model.translate(p.source), tokenize(p.target, "target"), cfg)
                     for p in corpus) / len(corpus)
