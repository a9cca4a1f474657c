"""
Sentence BLEU, one piece at a time
==================================
"""

import math

from priming_bench.bleu import BleuConfig, bleu_difference, bleu_score, brevity_penalty, clipped_ngram_precision

ref = "the cat is on the mat".split()
cand = "the the the the the the the".split()

# "the" appears twice in the reference, so only two of seven count
print("clipped unigrams:", clipped_ngram_precision(cand, ref, 1))
print("unigram-only BLEU:", bleu_score(cand, ref, BleuConfig(max_n=1, weights=(1.0,))))

# a short candidate pays exp(1 - r/c)
print(f"BP(4, 8) = {brevity_penalty(4, 8):.5f}  (e^-1 = {math.exp(-1):.5f})")

# default BLEU-4 is zero as soon as one order has no match; epsilon smoothing keeps a trace
near = "the cat sat on the mat".split()
print("BLEU-4:", bleu_score(near, ref))
print("per-order:", [round(bleu_score(near, ref, BleuConfig.single_order(n, 4)), 4) for n in range(1, 5)])

# the structural score: closer to the congruent reference is positive
po = "the cowboy gave the book to the sailor".split()
do = "the cowboy gave the sailor the book".split()
print("BLEU difference for a PO output:", round(bleu_difference(po, po, do), 4))
