"""Four-category BLEU evaluation, normalized target probabilities and the
per-structure priming report."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from ..bleu import BleuConfig, bleu_score
from ..data import STRUCTURES, StructureLabel, tokenize
from .classify import classify_structure
from .generate import PrimingItem

# (1) same meaning + same structure, (2) same meaning + other structure,
# (3) other meaning + same structure, (4) other meaning + other structure
CATEGORIES = ("congruent", "incongruent", "donor_congruent", "donor_incongruent")
MODEL_KINDS = ("gru", "transformer")
THREADS_ENV = "PRIMING_BENCH_THREADS"


class InsufficientDonorsError(ValueError):
    pass


@dataclass(frozen=True)
class EvalConfig:
    bleu: BleuConfig = field(default_factory=BleuConfig)
    per_n_smoothing: float = 1e-9
    seed: int = 0
    threads: Optional[int] = None

    def worker_count(self) -> int:
        if self.threads is not None:
            return max(1, self.threads)
        return max(1, int(os.environ.get(THREADS_ENV, "1")))


def choose_donors(items: Sequence[PrimingItem], seed: int) -> list[int]:
    """For each item, a seeded pick among same-structure items sharing no lexeme."""
    rng = np.random.default_rng([seed, 2])
    donors = []
    for i, item in enumerate(items):
        pool = [j for j, other in enumerate(items)
                if j != i and other.structure is item.structure and not (item.lexemes & other.lexemes)]
        if not pool:
            raise InsufficientDonorsError(f"item {i} ({item.structure}) has no lexically disjoint donor")
        donors.append(pool[int(rng.integers(len(pool)))])
    return donors


def category_references(item: PrimingItem, donor: PrimingItem) -> dict[str, str]:
    return {
        "congruent": item.congruent_target,
        "incongruent": item.incongruent_target,
        "donor_congruent": donor.congruent_target,
        "donor_incongruent": donor.incongruent_target,
    }


def normalized_pair(logp_a: float, logp_b: float) -> tuple[float, float]:
    """P_N for two alternatives from their log-probabilities.

    Returns ``(p, 1 - p)`` with ``p = P(a) / (P(a) + P(b))``.  Written as the
    logistic of the log-ratio, which equals exp(logp_a - logsumexp(logp_a, logp_b))
    but gives exactly 0.5 on ties and never overflows.
    """
    if logp_a == -math.inf and logp_b == -math.inf:
        raise ValueError("both targets have probability zero")
    d = logp_b - logp_a
    if d > 0:
        e = math.exp(-d)
        p = e / (1.0 + e)
    else:
        p = 1.0 / (1.0 + math.exp(d))
    return p, 1.0 - p


def normalized_from_raw(p_a: float, p_b: float) -> float:
    """Same normalisation on raw probabilities (used as a cross-check)."""
    if p_a < 0 or p_b < 0 or p_a + p_b == 0:
        raise ValueError("raw probabilities must be non-negative and not both zero")
    return p_a / (p_a + p_b)


def normalized_target_prob(model, item: PrimingItem) -> float:
    """P_N(congruent target | prime)."""
    lc, li = model.log_probs(item.prime_source, [item.congruent_target, item.incongruent_target])
    return normalized_pair(lc, li)[0]


def priming_score(p_congruent: float) -> float:
    if p_congruent > 0.5:
        return 1.0
    return 0.5 if p_congruent == 0.5 else 0.0


def _per_n(pred, ref, max_n, smoothing):
    return [bleu_score(pred, ref, BleuConfig.single_order(n, max_n, smoothing)) for n in range(1, max_n + 1)]


def evaluate_item(model, item: PrimingItem, donor: PrimingItem, config: EvalConfig) -> dict:
    """Everything the report needs about one (model, item) pair."""
    result = model.decode(item.prime_source)
    pred = model.tgt_vocab.decode(result.token_ids)
    lc, li = model.log_probs(item.prime_source, [item.congruent_target, item.incongruent_target])
    pc, pi = normalized_pair(lc, li)
    refs = {c: tokenize(s, "target") for c, s in category_references(item, donor).items()}
    max_n = config.bleu.max_n
    return {
        "prediction": " ".join(pred),
        "predicted_structure": str(classify_structure(pred)),
        "bleu": {c: bleu_score(pred, r, config.bleu) for c, r in refs.items()},
        "per_n": {c: {"unsmoothed": _per_n(pred, r, max_n, None),
                      "smoothed": _per_n(pred, r, max_n, config.per_n_smoothing)} for c, r in refs.items()},
        "logp_congruent": lc,
        "logp_incongruent": li,
        "p_congruent": pc,
        "p_incongruent": pi,
    }


def _evaluate_all(model, items, donors, config: EvalConfig) -> list[dict]:
    jobs = [(item, items[d]) for item, d in zip(items, donors)]
    workers = config.worker_count()
    if workers == 1:
        return [evaluate_item(model, it, dn, config) for it, dn in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: evaluate_item(model, job[0], job[1], config), jobs))


def _group_mean(values, structures) -> dict[str, float]:
    out = {}
    for s in STRUCTURES:
        vals = [v for v, st in zip(values, structures) if st is s]
        if vals:
            out[s.value] = float(math.fsum(vals) / len(vals))
    return out


def evaluate_reference_categories(model, items: Sequence[PrimingItem], config: EvalConfig = EvalConfig()
                                  ) -> dict[str, dict[str, float]]:
    """Mean BLEU of the model's greedy translation against each reference category, per structure."""
    donors = choose_donors(items, config.seed)
    rows = _evaluate_all(model, items, donors, config)
    structures = [it.structure for it in items]
    means = {c: _group_mean([r["bleu"][c] for r in rows], structures) for c in CATEGORIES}
    return {s: {c: means[c][s] for c in CATEGORIES} for s in means[CATEGORIES[0]]}


@dataclass
class PrimingReport:
    metadata: dict
    models: dict
    accuracy_gap_pp: dict
    items: list

    def to_json(self) -> dict:
        return {"metadata": self.metadata, "models": self.models,
                "accuracy_gap_pp": self.accuracy_gap_pp, "items": self.items}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, d: Mapping) -> "PrimingReport":
        try:
            return cls(dict(d["metadata"]), dict(d["models"]), dict(d["accuracy_gap_pp"]), list(d["items"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed priming report: {exc}") from None

    def items_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# seed={self.metadata.get('seed')} config_hash={self.metadata.get('config_hash')}\n")
        cols = ["model", "index", "structure", "lexicon_key", "prediction", "predicted_structure",
                *[f"bleu_{c}" for c in CATEGORIES], "logp_congruent", "logp_incongruent",
                "p_congruent", "p_incongruent", "priming_score"]
        writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        writer.writeheader()
        for row in self.items:
            flat = {k: row[k] for k in cols if k in row}
            flat.update({f"bleu_{c}": repr(row["bleu"][c]) for c in CATEGORIES})
            for k in ("logp_congruent", "logp_incongruent", "p_congruent", "p_incongruent", "priming_score"):
                flat[k] = repr(row[k])
            writer.writerow(flat)
        return buf.getvalue()


def summarize_model(rows: Sequence[dict], items: Sequence[PrimingItem], max_n: int) -> dict:
    structures = [it.structure for it in items]
    bleu = {c: _group_mean([r["bleu"][c] for r in rows], structures) for c in CATEGORIES}
    present = list(bleu[CATEGORIES[0]])
    per_n = {}
    for s in present:
        idx = [i for i, st in enumerate(structures) if st.value == s]
        per_n[s] = {c: {kind: [float(math.fsum(rows[i]["per_n"][c][kind][n] for i in idx) / len(idx))
                               for n in range(max_n)]
                        for kind in ("unsmoothed", "smoothed")} for c in CATEGORIES}
    correct = [float(r["predicted_structure"] == it.structure.value) for r, it in zip(rows, items)]
    return {
        "category_bleu": {s: {c: bleu[c][s] for c in CATEGORIES} for s in present},
        "bleu_difference": {s: bleu["congruent"][s] - bleu["incongruent"][s] for s in present},
        "per_n_bleu": per_n,
        "priming_proportion": _group_mean([priming_score(r["p_congruent"]) for r in rows], structures),
        "mean_p_congruent": _group_mean([r["p_congruent"] for r in rows], structures),
        "structural_accuracy": _group_mean(correct, structures),
    }


def priming_report(models: Mapping[str, object], items: Sequence[PrimingItem], config: EvalConfig = EvalConfig(),
                   metadata: Optional[dict] = None) -> PrimingReport:
    """Evaluate both models on the same items and donors and aggregate per structure.

    The accuracy gap is transformer minus GRU structural accuracy in
    percentage points.
    """
    missing = [k for k in MODEL_KINDS if k not in models]
    if missing:
        raise ValueError(f"missing model(s): {', '.join(missing)}")
    donors = choose_donors(items, config.seed)
    summaries, rows_out = {}, []
    for kind in MODEL_KINDS:
        rows = _evaluate_all(models[kind], items, donors, config)
        summaries[kind] = summarize_model(rows, items, config.bleu.max_n)
        for i, (item, row) in enumerate(zip(items, rows)):
            rows_out.append({"model": kind, "index": i, "structure": item.structure.value,
                             "lexicon_key": item.lexicon_key, "donor": donors[i],
                             "priming_score": priming_score(row["p_congruent"]), **row})
    gap = {s: 100.0 * (summaries["transformer"]["structural_accuracy"][s] - summaries["gru"]["structural_accuracy"][s])
           for s in summaries["gru"]["structural_accuracy"]}
    meta = {
        "bleu": {"max_n": config.bleu.max_n, "weights": list(config.bleu.weights),
                 "smoothing": config.bleu.smoothing, "per_n_smoothing": config.per_n_smoothing},
        "donor_seed": config.seed,
        "n_items": len(items),
        "model_checksums": {k: models[k].params.checksum() for k in MODEL_KINDS},
        **(metadata or {}),
    }
    return PrimingReport(meta, summaries, gap, rows_out)
