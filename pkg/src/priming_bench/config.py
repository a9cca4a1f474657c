"""Run configuration: JSON file plus command-line overrides."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from .bleu import BleuConfig


@dataclass
class CorpusSettings:
    n_per_structure: int = 500
    test_per_structure: int = 30
    structures: list = field(default_factory=lambda: ["Active", "Passive", "PO", "DO"])


@dataclass
class TransformerSettings:
    d_model: int = 64
    n_heads: int = 8
    n_layers: int = 2
    d_ff: int = 128
    max_len: int = 64


@dataclass
class GruSettings:
    emb_dim: int = 64
    hidden: int = 64


@dataclass
class TrainingSettings:
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 3e-3
    max_len: int = 32
    min_count: int = 1


@dataclass
class BleuSettings:
    max_n: int = 4
    weights: Optional[list] = None
    smoothing: Optional[float] = None
    per_n_smoothing: float = 1e-9

    def to_config(self) -> BleuConfig:
        return BleuConfig(self.max_n, tuple(self.weights) if self.weights else None, self.smoothing)


@dataclass
class PathSettings:
    out_dir: str = "run"
    corpus: str = "corpus.tsv"
    test_set: str = "test_set.jsonl"
    checkpoints: str = "checkpoints"
    reports: str = "reports"

    def resolve(self, name: str) -> Path:
        p = Path(getattr(self, name))
        return p if p.is_absolute() else Path(self.out_dir) / p


@dataclass
class RunConfig:
    seed: int = 0
    corpus: CorpusSettings = field(default_factory=CorpusSettings)
    transformer: TransformerSettings = field(default_factory=TransformerSettings)
    gru: GruSettings = field(default_factory=GruSettings)
    training: TrainingSettings = field(default_factory=TrainingSettings)
    bleu: BleuSettings = field(default_factory=BleuSettings)
    paths: PathSettings = field(default_factory=PathSettings)

    def to_dict(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]

    def provenance(self) -> dict:
        return {"seed": self.seed, "config_hash": self.config_hash()}

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        return _build(cls, d)

    @classmethod
    def load(cls, path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _build(cls, d: dict):
    if not isinstance(d, dict):
        raise ValueError(f"expected an object for {cls.__name__}, got {type(d).__name__}")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(d) - set(known)
    if unknown:
        raise ValueError(f"unknown {cls.__name__} key(s): {', '.join(sorted(unknown))}")
    kwargs = {}
    for name, value in d.items():
        default = known[name].default_factory() if known[name].default_factory is not dataclasses.MISSING else None
        kwargs[name] = _build(type(default), value) if dataclasses.is_dataclass(default) else value
    return cls(**kwargs)
