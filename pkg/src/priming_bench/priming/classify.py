"""Rule-based structure labels for English sentences over the closed lexicon."""

from __future__ import annotations

from typing import Sequence, Union

from ..data import StructureLabel
from .lexicon import DITRANSITIVE_VERBS, PEOPLE, THINGS, TRANSITIVE_VERBS

UNKNOWN = "Unknown"

_AUX = {"was", "were"}
_PARTICIPLES = {v.participle for v in TRANSITIVE_VERBS}
_TRANSITIVE_PAST = {v.past for v in TRANSITIVE_VERBS}
_DITRANSITIVE_PAST = {v.past for v in DITRANSITIVE_VERBS}
_PAST_VERBS = _TRANSITIVE_PAST | _DITRANSITIVE_PAST
_NOUN_PHRASES = ({tuple(p.subj.split()) for p in PEOPLE} | {tuple(p.obj.split()) for p in PEOPLE}
                 | {tuple(t.en.split()) for t in THINGS})


def _is_np(tokens: Sequence[str]) -> bool:
    return tuple(tokens) in _NOUN_PHRASES


def _splits_into_two_nps(tokens: Sequence[str]) -> bool:
    return any(_is_np(tokens[:k]) and _is_np(tokens[k:]) for k in range(1, len(tokens)))


def classify_structure(tokens: Sequence[str]) -> Union[StructureLabel, str]:
    """Active, Passive, PO or DO, or ``UNKNOWN`` when no pattern fits.

    Passive: was/were + participle, then "by" and an agent.  PO: ditransitive
    verb, noun phrase, "to", noun phrase.  DO: ditransitive verb followed by
    two noun phrases.  Active: any lexicon verb in a subject-verb-object
    frame.  Noun phrases after the verb must come from the lexicon.
    """
    toks = list(tokens)
    n = len(toks)
    for i in range(1, n - 1):
        if toks[i] in _AUX and toks[i + 1] in _PARTICIPLES and "by" in toks[i + 2:n - 1]:
            return StructureLabel.PASSIVE
    for v in range(1, n):
        if toks[v] in _DITRANSITIVE_PAST:
            rest = toks[v + 1:]
            if "to" in rest:
                j = rest.index("to")
                if _is_np(rest[:j]) and _is_np(rest[j + 1:]):
                    return StructureLabel.PO
            elif _splits_into_two_nps(rest):
                return StructureLabel.DO
            break
    for v in range(1, n - 1):
        if toks[v] in _PAST_VERBS and _is_np(toks[v + 1:]):
            return StructureLabel.ACTIVE
    return UNKNOWN
