"""Sentence-level, single-reference BLEU."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence


@dataclass(frozen=True)
class BleuConfig:
    """``smoothing`` is None, or an epsilon added to zero n-gram matches."""

    max_n: int = 4
    weights: Optional[tuple] = None
    smoothing: Optional[float] = None

    def __post_init__(self):
        if self.max_n < 1:
            raise ValueError("max_n must be at least 1")
        if self.weights is None:
            object.__setattr__(self, "weights", tuple([1.0 / self.max_n] * self.max_n))
        w = tuple(float(x) for x in self.weights)
        if len(w) != self.max_n:
            raise ValueError(f"need {self.max_n} weights, got {len(w)}")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {math.fsum(w)}")
        object.__setattr__(self, "weights", w)
        if self.smoothing is not None and self.smoothing <= 0:
            raise ValueError("smoothing epsilon must be positive")

    @classmethod
    def single_order(cls, n: int, max_n: int, smoothing: Optional[float] = None) -> "BleuConfig":
        """Weight 1 on order ``n`` only: the per-n score."""
        return cls(max_n=max_n, weights=tuple(1.0 if k == n else 0.0 for k in range(1, max_n + 1)),
                   smoothing=smoothing)


def ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def clipped_ngram_precision(candidate: Sequence[str], reference: Sequence[str], n: int) -> tuple[int, int]:
    if n < 1:
        raise ValueError("n must be at least 1")
    cand = ngram_counts(candidate, n)
    ref = ngram_counts(reference, n)
    matched = sum(min(c, ref[g]) for g, c in cand.items())
    return matched, max(0, len(candidate) - n + 1)


def brevity_penalty(candidate_len: int, reference_len: int) -> float:
    if candidate_len == 0:
        return 0.0
    if candidate_len >= reference_len:
        return 1.0
    return math.exp(1.0 - reference_len / candidate_len)


def bleu_score(candidate: Sequence[str], reference: Sequence[str], config: BleuConfig = BleuConfig()) -> float:
    bp = brevity_penalty(len(candidate), len(reference))
    if bp == 0.0:
        return 0.0
    log_sum = 0.0
    for n, w in zip(range(1, config.max_n + 1), config.weights):
        if w == 0.0:
            continue
        matched, total = clipped_ngram_precision(candidate, reference, n)
        if matched == 0:
            if config.smoothing is None:
                return 0.0
            p = config.smoothing / max(total, 1)
        else:
            p = matched / total
        log_sum += w * math.log(p)
    return bp * math.exp(log_sum)


def bleu_difference(prediction: Sequence[str], correct_ref: Sequence[str], incorrect_ref: Sequence[str],
                    config: BleuConfig = BleuConfig()) -> float:
    """Positive when the prediction is closer to the structure-congruent reference."""
    return bleu_score(prediction, correct_ref, config) - bleu_score(prediction, incorrect_ref, config)
