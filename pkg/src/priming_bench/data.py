"""Tokenizers, vocabularies, padded batches and the parallel-corpus TSV format."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .autodiff import IGNORE_INDEX

PAD, BOS, EOS, UNK = 0, 1, 2, 3
SPECIALS = ("<pad>", "<bos>", "<eos>", "<unk>")
TERMINAL_PUNCT = ".!?。！？"


class StructureLabel(str, enum.Enum):
    ACTIVE = "Active"
    PASSIVE = "Passive"
    PO = "PO"
    DO = "DO"

    @property
    def alternate(self) -> "StructureLabel":
        return _ALTERNATES[self]

    def __str__(self) -> str:
        return self.value


_ALTERNATES = {
    StructureLabel.ACTIVE: StructureLabel.PASSIVE,
    StructureLabel.PASSIVE: StructureLabel.ACTIVE,
    StructureLabel.PO: StructureLabel.DO,
    StructureLabel.DO: StructureLabel.PO,
}
STRUCTURES = tuple(StructureLabel)


class CorpusFormatError(ValueError):
    pass


@dataclass(frozen=True)
class ParallelPair:
    source: str
    target: str
    structure: Optional[StructureLabel] = None

    def __post_init__(self):
        if not self.source.strip() or not self.target.strip():
            raise ValueError("both sides of a parallel pair must be non-empty")
        if self.structure is not None and not isinstance(self.structure, StructureLabel):
            object.__setattr__(self, "structure", StructureLabel(self.structure))


def tokenize(text: str, side: str) -> list[str]:
    """Characters for the Chinese source side, lowercased words for English."""
    if not text or not text.strip():
        raise ValueError("cannot tokenize an empty string")
    if side == "source":
        return [ch for ch in text if not ch.isspace()]
    if side == "target":
        return text.strip().rstrip(TERMINAL_PUNCT).lower().split()
    raise ValueError(f"side must be 'source' or 'target', got {side!r}")


class Vocabulary:
    """Token/id bijection with PAD=0, BOS=1, EOS=2, UNK=3."""

    def __init__(self, tokens: Iterable[str] = ()):
        self.id_to_token: list[str] = list(SPECIALS)
        self.token_to_id: dict[str, int] = {t: i for i, t in enumerate(SPECIALS)}
        for tok in tokens:
            if tok in self.token_to_id:
                raise ValueError(f"duplicate token {tok!r}")
            self.token_to_id[tok] = len(self.id_to_token)
            self.id_to_token.append(tok)

    def __len__(self) -> int:
        return len(self.id_to_token)

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.id_to_token == other.id_to_token

    def encode(self, tokens: Sequence[str]) -> list[int]:
        return [self.token_to_id.get(t, UNK) for t in tokens]

    def decode(self, ids: Iterable[int], strip_specials: bool = True) -> list[str]:
        out = []
        for i in ids:
            i = int(i)
            if strip_specials and i in (PAD, BOS, EOS):
                continue
            out.append(self.id_to_token[i])
        return out

    @property
    def regular_tokens(self) -> list[str]:
        return self.id_to_token[len(SPECIALS):]

    def save(self, path) -> None:
        Path(path).write_text("".join(t + "\n" for t in self.regular_tokens), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        text = Path(path).read_text(encoding="utf-8")
        return cls(text.split("\n")[:-1] if text else [])


def build_vocabulary(corpus: Sequence[ParallelPair], side: str, min_count: int = 1) -> Vocabulary:
    if not corpus:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    counts = Counter()
    for pair in corpus:
        counts.update(tokenize(pair.source if side == "source" else pair.target, side))
    kept = [t for t, c in counts.items() if c >= min_count and t not in SPECIALS]
    kept.sort(key=lambda t: (-counts[t], t))
    return Vocabulary(kept)


@dataclass
class Batch:
    src_ids: np.ndarray
    tgt_in_ids: np.ndarray
    labels: np.ndarray

    @property
    def src_mask(self) -> np.ndarray:
        return self.src_ids != PAD

    def __len__(self) -> int:
        return self.src_ids.shape[0]


def pad_rows(rows: Sequence[Sequence[int]], fill: int) -> np.ndarray:
    width = max((len(r) for r in rows), default=0)
    out = np.full((len(rows), width), fill, dtype=np.int64)
    for i, r in enumerate(rows):
        out[i, :len(r)] = r
    return out


def make_batch(pairs: Sequence[ParallelPair], src_vocab: Vocabulary, tgt_vocab: Vocabulary) -> Batch:
    src = [src_vocab.encode(tokenize(p.source, "source")) for p in pairs]
    tgt = [tgt_vocab.encode(tokenize(p.target, "target")) for p in pairs]
    return Batch(
        src_ids=pad_rows(src, PAD),
        tgt_in_ids=pad_rows([[BOS] + t for t in tgt], PAD),
        labels=pad_rows([t + [EOS] for t in tgt], IGNORE_INDEX),
    )


def make_batches(pairs: Sequence[ParallelPair], src_vocab: Vocabulary, tgt_vocab: Vocabulary,
                 batch_size: int) -> list[Batch]:
    return [make_batch(pairs[i:i + batch_size], src_vocab, tgt_vocab)
            for i in range(0, len(pairs), batch_size)]


def parse_corpus(text: str) -> list[ParallelPair]:
    pairs = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) not in (2, 3):
            raise CorpusFormatError(f"line {lineno}: expected 2 or 3 tab-separated fields, got {len(fields)}")
        try:
            structure = StructureLabel(fields[2]) if len(fields) == 3 and fields[2] else None
            pairs.append(ParallelPair(fields[0], fields[1], structure))
        except ValueError as exc:
            raise CorpusFormatError(f"line {lineno}: {exc}") from None
    return pairs


def format_corpus(pairs: Iterable[ParallelPair], header: Optional[str] = None) -> str:
    lines = [f"# {header}"] if header else []
    for p in pairs:
        if "\t" in p.source + p.target or "\n" in p.source + p.target:
            raise CorpusFormatError(f"pair contains a tab or newline: {p!r}")
        lines.append("\t".join([p.source, p.target] + ([p.structure.value] if p.structure else [])))
    return "".join(line + "\n" for line in lines)


def load_corpus(path) -> list[ParallelPair]:
    """Read a UTF-8 TSV corpus; lines starting with '#' are comments."""
    return parse_corpus(Path(path).read_text(encoding="utf-8"))


def save_corpus(pairs: Iterable[ParallelPair], path, header: Optional[str] = None) -> None:
    Path(path).write_text(format_corpus(pairs, header), encoding="utf-8")
