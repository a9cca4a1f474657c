"""
The templated Chinese-English corpus
====================================

Each combination of content words can be realised in either member of its
alternation pair, which is what makes congruent and incongruent targets
meaning-equivalent.
"""

from collections import Counter

from priming_bench.data import StructureLabel, tokenize
from priming_bench.priming import classify_structure, generate_parallel_corpus, generate_test_set, realize
from priming_bench.priming.generate import find_combo

i = find_combo(StructureLabel.ACTIVE, "they", "plant", "trees")
for s in (StructureLabel.ACTIVE, StructureLabel.PASSIVE):
    print(s, realize(s, i))

i = find_combo(StructureLabel.PO, "cowboy", "give", "book", "sailor")
for s in (StructureLabel.PO, StructureLabel.DO):
    print(s, realize(s, i))

corpus = generate_parallel_corpus(seed=1, n_per_structure=250)
print(Counter(str(p.structure) for p in corpus))

# the rule-based classifier recovers every generated label
agree = sum(classify_structure(tokenize(p.target, "target")) is p.structure for p in corpus)
print(f"classifier agreement {agree}/{len(corpus)}")

item = generate_test_set(seed=1)[45]
print(item.prime_source, "|", item.congruent_target, "|", item.incongruent_target, "|", item.structure)
