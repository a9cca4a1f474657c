import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from priming_bench.bleu import (
    BleuConfig,
    bleu_difference,
    bleu_score,
    brevity_penalty,
    clipped_ngram_precision,
)

CAT = "the cat is on the mat".split()
SEVEN_THE = ["the"] * 7


def brute_force_bleu(cand, ref, max_n=4):
    """Nested-loop BLEU: every candidate n-gram is compared against every
    reference n-gram position, with clipping done by marking used positions."""
    c, r = len(cand), len(ref)
    if c == 0:
        return 0.0
    log_p = 0.0
    for n in range(1, max_n + 1):
        total = max(0, c - n + 1)
        used = [False] * max(0, r - n + 1)
        matched = 0
        for i in range(total):
            for j in range(len(used)):
                if used[j]:
                    continue
                same = True
                for k in range(n):
                    if cand[i + k] != ref[j + k]:
                        same = False
                        break
                if same:
                    used[j] = True
                    matched += 1
                    break
        if matched == 0:
            return 0.0
        log_p += math.log(matched / total) / max_n
    bp = 1.0 if c >= r else math.exp(1 - r / c)
    return bp * math.exp(log_p)


class TestPrecision:
    def test_identical_bigrams(self):
        s = "a b c d e".split()
        assert clipped_ngram_precision(s, s, 2) == (4, 4)

    def test_clipping(self):
        assert clipped_ngram_precision(SEVEN_THE, CAT, 1) == (2, 7)

    def test_disjoint(self):
        assert clipped_ngram_precision("x y z".split(), CAT, 1) == (0, 3)

    def test_short_candidate(self):
        assert clipped_ngram_precision(["a"], ["a", "b"], 3) == (0, 0)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            clipped_ngram_precision(["a"], ["a"], 0)


class TestBrevity:
    def test_longer(self):
        assert brevity_penalty(10, 8) == 1.0

    def test_half_length(self):
        assert brevity_penalty(4, 8) == pytest.approx(math.exp(-1), rel=1e-15)
        assert brevity_penalty(4, 8) == pytest.approx(0.36788, abs=5e-6)

    def test_empty(self):
        assert brevity_penalty(0, 5) == 0.0

    @given(st.integers(1, 40), st.integers(0, 40))
    def test_shortening_never_raises_bp(self, c, r):
        assert brevity_penalty(c - 1, r) <= brevity_penalty(c, r)


class TestBleu:
    def test_identical(self):
        assert bleu_score(CAT, CAT) == 1.0

    def test_no_four_gram_overlap(self):
        assert bleu_score("the mat is on the cat".split(), CAT) == 0.0

    def test_unigram_clipping(self):
        assert bleu_score(SEVEN_THE, CAT, BleuConfig(max_n=1, weights=(1.0,))) == pytest.approx(2 / 7, rel=1e-15)

    def test_oracle_agreement_on_random_pairs(self):
        rng = np.random.default_rng(0)
        nonzero = 0
        for _ in range(100):
            vocab = int(rng.integers(2, 11))
            cand = [str(x) for x in rng.integers(0, vocab, size=int(rng.integers(0, 13)))]
            ref = [str(x) for x in rng.integers(0, vocab, size=int(rng.integers(1, 13)))]
            want = brute_force_bleu(cand, ref)
            assert abs(bleu_score(cand, ref) - want) <= 1e-12
            nonzero += want > 0
        assert nonzero >= 5  # the sample is not trivially all zeros

    def test_oracle_agreement_small_vocab_mostly_nonzero(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            cand = list(rng.integers(0, 2, size=int(rng.integers(4, 13))))
            ref = list(rng.integers(0, 2, size=int(rng.integers(4, 13))))
            assert abs(bleu_score(cand, ref) - brute_force_bleu(cand, ref)) <= 1e-12

    def test_smoothing_keeps_score_positive(self):
        cfg = BleuConfig(smoothing=1e-9)
        score = bleu_score("the mat is on the cat".split(), CAT, cfg)
        assert 0 < score < 1e-2

    def test_single_order_uses_only_that_order(self):
        cand = "the cat sat on the mat".split()
        for n in range(1, 5):
            m, t = clipped_ngram_precision(cand, CAT, n)
            got = bleu_score(cand, CAT, BleuConfig.single_order(n, 4))
            assert got == pytest.approx(m / t if m else 0.0, rel=1e-14)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            BleuConfig(max_n=0)
        with pytest.raises(ValueError):
            BleuConfig(max_n=2, weights=(0.7, 0.7))
        with pytest.raises(ValueError):
            BleuConfig(max_n=2, weights=(1.0,))
        assert sum(BleuConfig().weights) == 1.0

    @settings(max_examples=200)
    @given(st.lists(st.integers(0, 5), max_size=12), st.lists(st.integers(0, 5), min_size=1, max_size=12))
    def test_range(self, cand, ref):
        assert 0.0 <= bleu_score(cand, ref) <= 1.0

    @settings(max_examples=200)
    @given(st.lists(st.integers(0, 3), min_size=4, max_size=10), st.lists(st.integers(0, 3), min_size=4, max_size=10))
    def test_one_iff_equal(self, cand, ref):
        assert (bleu_score(cand, ref) == 1.0) == (cand == ref)


class TestDifference:
    def test_correct_prediction(self):
        other = "a b c d e".split()
        assert bleu_difference(CAT, CAT, other) == 1.0

    def test_identical_references(self):
        assert bleu_difference(SEVEN_THE, CAT, CAT) == 0.0

    def test_compositional(self):
        rng = np.random.default_rng(2)
        cfg = BleuConfig(max_n=2)
        for _ in range(50):
            p, a, b = ([int(x) for x in rng.integers(0, 4, size=int(rng.integers(1, 9)))] for _ in range(3))
            assert bleu_difference(p, a, b, cfg) == bleu_score(p, a, cfg) - bleu_score(p, b, cfg)
