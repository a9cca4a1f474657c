"""Templated Chinese-English generator for the four priming structures.

A *combination* fixes the content words; each combination can be realised in
either member of its alternation pair (Active/Passive or PO/DO), so the two
realisations share meaning and differ only in structure.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from ..data import STRUCTURES, ParallelPair, StructureLabel
from .lexicon import DITRANSITIVE_VERBS, PEOPLE, THINGS, TRANSITIVE_VERBS

TRANSITIVE = (StructureLabel.ACTIVE, StructureLabel.PASSIVE)
DITRANSITIVE = (StructureLabel.PO, StructureLabel.DO)


class CapacityError(ValueError):
    pass


@dataclass(frozen=True)
class PrimingItem:
    prime_source: str
    congruent_target: str
    incongruent_target: str
    structure: StructureLabel
    lexicon_key: str

    def __post_init__(self):
        object.__setattr__(self, "structure", StructureLabel(self.structure))

    @property
    def lexemes(self) -> frozenset:
        return frozenset(self.lexicon_key.split("|"))

    def to_json(self) -> dict:
        d = asdict(self)
        d["structure"] = self.structure.value
        return d


def transitive_capacity() -> int:
    return len(PEOPLE) * len(TRANSITIVE_VERBS) * len(THINGS)


def ditransitive_capacity() -> int:
    return len(PEOPLE) * len(DITRANSITIVE_VERBS) * len(THINGS) * (len(PEOPLE) - 1)


def capacity(structure: StructureLabel) -> int:
    return transitive_capacity() if structure in TRANSITIVE else ditransitive_capacity()


def _combo(structure: StructureLabel, index: int) -> tuple:
    """Decode a mixed-radix index into the lexicon entries of one combination."""
    if structure in TRANSITIVE:
        index, t = divmod(index, len(THINGS))
        a, v = divmod(index, len(TRANSITIVE_VERBS))
        return PEOPLE[a], TRANSITIVE_VERBS[v], THINGS[t]
    index, r = divmod(index, len(PEOPLE) - 1)
    index, t = divmod(index, len(THINGS))
    a, v = divmod(index, len(DITRANSITIVE_VERBS))
    r = r + (r >= a)  # recipient differs from agent
    return PEOPLE[a], DITRANSITIVE_VERBS[v], THINGS[t], PEOPLE[r]


def combo_key(structure: StructureLabel, index: int) -> str:
    return "|".join(entry.key for entry in _combo(structure, index))


def realize(structure: StructureLabel, index: int) -> tuple[str, str]:
    """(Chinese, English) sentence for combination ``index`` in ``structure``."""
    structure = StructureLabel(structure)
    if structure in TRANSITIVE:
        agent, verb, thing = _combo(structure, index)
        if structure is StructureLabel.ACTIVE:
            return (f"{agent.zh}{verb.zh}了{thing.zh}",
                    f"{agent.subj} {verb.past} {thing.en}")
        aux = "were" if thing.plural else "was"
        return (f"{thing.zh}被{agent.zh}{verb.zh}了",
                f"{thing.en} {aux} {verb.participle} by {agent.obj}")
    agent, verb, theme, recipient = _combo(structure, index)
    if structure is StructureLabel.PO:
        return (f"{agent.zh}{verb.zh}了{theme.zh}给{recipient.zh}",
                f"{agent.subj} {verb.past} {theme.en} to {recipient.obj}")
    return (f"{agent.zh}{verb.zh}了{recipient.zh}{theme.zh}",
            f"{agent.subj} {verb.past} {recipient.obj} {theme.en}")


def find_combo(structure: StructureLabel, agent: str, verb: str, thing: str, recipient: str = None) -> int:
    """Index of the combination with the given lexeme keys (linear scan)."""
    want = "|".join(k for k in (agent, verb, thing, recipient) if k is not None)
    for i in range(capacity(structure)):
        if combo_key(structure, i) == want:
            return i
    raise KeyError(want)


def _sample(rng: np.random.Generator, cap: int, n: int, exclude: frozenset, key_of) -> list[int]:
    if n > cap:
        raise CapacityError(f"requested {n} unique combinations but only {cap} exist")
    order = rng.permutation(cap)
    if not exclude:
        return [int(i) for i in order[:n]]
    fresh = []
    for i in order:
        if key_of(int(i)) not in exclude:
            fresh.append(int(i))
            if len(fresh) == n:
                return fresh
    # not enough held-out combinations: top up with excluded ones
    taken = set(fresh)
    return fresh + [int(i) for i in order if int(i) not in taken][:n - len(fresh)]


def generate_corpus_with_keys(seed: int, n_per_structure: int,
                              structures: Sequence[StructureLabel] = STRUCTURES) -> tuple[list[ParallelPair], list[str]]:
    if n_per_structure < 1:
        raise ValueError("n_per_structure must be at least 1")
    rng = np.random.default_rng([seed, 0])
    rows = []
    for s in structures:
        s = StructureLabel(s)
        for idx in _sample(rng, capacity(s), n_per_structure, frozenset(), None):
            zh, en = realize(s, idx)
            rows.append((ParallelPair(zh, en, s), combo_key(s, idx)))
    order = rng.permutation(len(rows))
    rows = [rows[i] for i in order]
    return [r[0] for r in rows], [r[1] for r in rows]


def generate_parallel_corpus(seed: int, n_per_structure: int,
                             structures: Sequence[StructureLabel] = STRUCTURES) -> list[ParallelPair]:
    """Equal numbers of labelled pairs per structure, shuffled, deterministic in ``seed``."""
    return generate_corpus_with_keys(seed, n_per_structure, structures)[0]


def generate_test_set(seed: int, n_per_structure: int = 30, exclude_keys: Iterable[str] = ()) -> list[PrimingItem]:
    """``n_per_structure`` items for each structure, ordered Active, Passive, PO, DO.

    Combinations whose key is in ``exclude_keys`` (typically the training
    corpus) are avoided while enough others remain.
    """
    if n_per_structure < 1:
        raise ValueError("n_per_structure must be at least 1")
    rng = np.random.default_rng([seed, 1])
    exclude = frozenset(exclude_keys)
    items = []
    for pair in (TRANSITIVE, DITRANSITIVE):
        cap = capacity(pair[0])
        picks = _sample(rng, cap, 2 * n_per_structure, exclude, lambda i, s=pair[0]: combo_key(s, i))
        for j, s in enumerate(pair):
            for idx in picks[j * n_per_structure:(j + 1) * n_per_structure]:
                zh, congruent = realize(s, idx)
                _, incongruent = realize(s.alternate, idx)
                items.append(PrimingItem(zh, congruent, incongruent, s, combo_key(s, idx)))
    return items


def save_test_set(items: Iterable[PrimingItem], path, header: Optional[str] = None) -> None:
    """JSON lines, one item per line; an optional leading '#' comment line."""
    lines = [f"# {header}"] if header else []
    lines += [json.dumps(item.to_json(), ensure_ascii=False, sort_keys=True) for item in items]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def load_test_set(path) -> list[PrimingItem]:
    items = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            items.append(PrimingItem(**json.loads(line)))
        except (TypeError, ValueError) as exc:
            raise ValueError(f"{path}:{lineno}: bad test item ({exc})") from None
    return items
