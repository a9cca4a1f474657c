"""
A small priming experiment end to end
=====================================

Trains both architectures on 600 templated pairs and prints the
report table.  Takes a few seconds on a laptop; raise the corpus size
and epochs for the desk-scale version (see the README).
"""

from priming_bench.config import RunConfig
from priming_bench.pipeline import eval_config, train_model
from priming_bench.priming import generate_corpus_with_keys, generate_test_set, priming_report
from priming_bench.render import render_table

config = RunConfig(seed=4)
config.training.epochs = 12
config.transformer.d_model, config.transformer.d_ff = 32, 64
config.gru.emb_dim = config.gru.hidden = 32

corpus, keys = generate_corpus_with_keys(config.seed, 150)
items = generate_test_set(config.seed, 10, exclude_keys=keys)

models = {}
for kind in ("gru", "transformer"):
    models[kind], losses = train_model(kind, corpus, config)
    print(kind, "loss by epoch:", [round(x, 3) for x in losses])

report = priming_report(models, items, eval_config(config), metadata=config.provenance())
print(render_table(report))

# P_N for one item, straight from the model
it = items[0]
row = next(r for r in report.items if r["model"] == "transformer" and r["index"] == 0)
print(it.prime_source, "->", row["prediction"])
print(f"P_N(congruent) = {row['p_congruent']:.3f}")
