"""Forward dispatch, greedy decoding, sequence scoring and the training loop."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import autodiff as ad
from ..autodiff import Tape, Tensor
from ..data import BOS, EOS, PAD, Batch, Vocabulary, pad_rows, tokenize
from ..optim import AdamState, adam_step, zero_grads
from .gru import gru_decode_step, gru_encode, gru_seq2seq_forward
from .params import GruParams, ModelParams, TransformerParams
from .transformer import transformer_decode, transformer_encode, transformer_forward


def _check_kind(params: ModelParams, model_kind: str) -> None:
    if params.kind != model_kind:
        raise ValueError(f"model_kind {model_kind!r} does not match {params.kind} parameters")


def forward(params: ModelParams, batch: Batch) -> Tensor:
    if isinstance(params, TransformerParams):
        return transformer_forward(params, batch)
    if isinstance(params, GruParams):
        return gru_seq2seq_forward(params, batch)
    raise TypeError(f"unknown parameter set {type(params).__name__}")


@dataclass(frozen=True)
class DecodeResult:
    token_ids: tuple
    log_probs: tuple
    terminated_by: str  # "EOS" or "max_len"


def greedy_decode(params: ModelParams, model_kind: str, source_ids: Sequence[int], max_len: int) -> DecodeResult:
    """Argmax decoding from BOS; ties go to the lowest id.  EOS is not emitted."""
    _check_kind(params, model_kind)
    src = np.asarray([list(source_ids)], dtype=np.int64)
    ids, lps = [], []
    if isinstance(params, GruParams):
        eh, dh, mask = gru_encode(params, src)
        prev = BOS
    else:
        memory, key_mask = transformer_encode(params, src)
    while len(ids) < max_len:
        if isinstance(params, GruParams):
            logits, dh = gru_decode_step(params, eh, mask, np.array([prev]), dh)
            row = logits.data[0]
        else:
            tgt = np.asarray([[BOS] + ids], dtype=np.int64)
            row = transformer_decode(params, memory, key_mask, tgt).data[0, -1]
        logp = ad.log_softmax_array(row)
        step = int(np.argmax(logp))  # first maximum, i.e. lowest id on ties
        if step == EOS:
            return DecodeResult(tuple(ids), tuple(lps), "EOS")
        ids.append(step)
        lps.append(float(logp[step]))
        prev = step
    return DecodeResult(tuple(ids), tuple(lps), "max_len")


def sequence_log_probs(params: ModelParams, model_kind: str, source_ids: Sequence[int],
                       targets: Sequence[Sequence[int]]) -> list[float]:
    """log P(target + EOS | source) for several targets sharing one source."""
    _check_kind(params, model_kind)
    vocab = params.config.tgt_vocab
    for tgt in targets:
        if len(tgt) == 0:
            raise ValueError("target must be non-empty")
        bad = [t for t in tgt if not 0 <= t < vocab]
        if bad:
            raise IndexError(f"target token id {bad[0]} outside vocabulary of size {vocab}")
    n = len(targets)
    batch = Batch(
        src_ids=np.repeat(np.asarray([list(source_ids)], dtype=np.int64), n, axis=0),
        tgt_in_ids=pad_rows([[BOS] + list(t) for t in targets], PAD),
        labels=pad_rows([list(t) + [EOS] for t in targets], ad.IGNORE_INDEX),
    )
    logp = ad.log_softmax_array(forward(params, batch).data)
    out = []
    for i, tgt in enumerate(targets):
        gold = list(tgt) + [EOS]
        out.append(float(sum(logp[i, j, tok] for j, tok in enumerate(gold))))
    return out


def sequence_log_prob(params: ModelParams, model_kind: str, source_ids: Sequence[int],
                      target_ids: Sequence[int]) -> float:
    return sequence_log_probs(params, model_kind, source_ids, [target_ids])[0]


def batch_loss(params: ModelParams, batch: Batch) -> float:
    return float(ad.cross_entropy_masked(forward(params, batch), batch.labels).data)


def train_epoch(params: ModelParams, model_kind: str, batches: Sequence[Batch], adam_state: AdamState) -> float:
    """One pass of forward, masked cross-entropy, backward and Adam per batch."""
    _check_kind(params, model_kind)
    if not batches:
        raise ValueError("no batches to train on")
    losses = []
    for batch in batches:
        with Tape():
            loss = ad.cross_entropy_masked(forward(params, batch), batch.labels)
            ad.backward(loss)
        adam_step(params.tensors, adam_state)
        zero_grads(params.tensors)
        losses.append(float(loss.data))
    return float(np.mean(losses))


class TranslationModel:
    """Parameters bundled with their vocabularies, working on raw sentences."""

    def __init__(self, params: ModelParams, src_vocab: Vocabulary, tgt_vocab: Vocabulary, max_decode_len: int = 32):
        if len(src_vocab) != params.config.src_vocab or len(tgt_vocab) != params.config.tgt_vocab:
            raise ValueError("vocabulary sizes do not match the model")
        self.params = params
        self.src_vocab = src_vocab
        self.tgt_vocab = tgt_vocab
        self.max_decode_len = max_decode_len

    @property
    def kind(self) -> str:
        return self.params.kind

    def encode_source(self, sentence: str) -> list[int]:
        return self.src_vocab.encode(tokenize(sentence, "source"))

    def encode_target(self, sentence: str) -> list[int]:
        return self.tgt_vocab.encode(tokenize(sentence, "target"))

    def decode(self, sentence: str) -> DecodeResult:
        return greedy_decode(self.params, self.kind, self.encode_source(sentence), self.max_decode_len)

    def translate(self, sentence: str) -> list[str]:
        return self.tgt_vocab.decode(self.decode(sentence).token_ids)

    def log_probs(self, source: str, targets: Sequence[str]) -> list[float]:
        return sequence_log_probs(self.params, self.kind, self.encode_source(source),
                                  [self.encode_target(t) for t in targets])

    def log_prob(self, source: str, target: str) -> float:
        return self.log_probs(source, [target])[0]
