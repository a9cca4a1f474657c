"""Saving and loading trained models: checkpoint, JSON sidecar and vocabularies."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from ..checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from ..data import Vocabulary
from .inference import TranslationModel
from .params import params_from_hyperparameters


def model_paths(directory, kind: str) -> dict[str, Path]:
    d = Path(directory)
    return {
        "checkpoint": d / f"{kind}.ckpt",
        "sidecar": d / f"{kind}.json",
        "src_vocab": d / f"{kind}.src_vocab.txt",
        "tgt_vocab": d / f"{kind}.tgt_vocab.txt",
    }


def save_model(model: TranslationModel, directory, provenance: Optional[dict] = None) -> dict:
    paths = model_paths(directory, model.kind)
    paths["checkpoint"].parent.mkdir(parents=True, exist_ok=True)
    hparams = model.params.hyperparameters()
    meta = {"hyperparameters": hparams, **(provenance or {})}
    digest = save_checkpoint(paths["checkpoint"], model.params.arrays(), meta)
    model.src_vocab.save(paths["src_vocab"])
    model.tgt_vocab.save(paths["tgt_vocab"])
    sidecar = {"model_kind": model.kind, "hyperparameters": hparams, "checkpoint_sha256": digest,
               "max_decode_len": model.max_decode_len, **(provenance or {})}
    paths["sidecar"].write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return sidecar


def load_model(directory, kind: str, expected_hyperparameters: Optional[dict] = None) -> TranslationModel:
    """Load a model; refuse when stored and expected hyperparameters differ."""
    paths = model_paths(directory, kind)
    for p in paths.values():
        if not p.exists():
            raise FileNotFoundError(f"missing {p}")
    sidecar = json.loads(paths["sidecar"].read_text(encoding="utf-8"))
    arrays, meta = load_checkpoint(paths["checkpoint"])
    hparams = sidecar["hyperparameters"]
    if meta.get("hyperparameters") != hparams:
        raise CheckpointError(f"{paths['checkpoint']}: hyperparameters differ from sidecar")
    if expected_hyperparameters is not None and expected_hyperparameters != hparams:
        diff = sorted(k for k in set(hparams) | set(expected_hyperparameters)
                      if hparams.get(k) != expected_hyperparameters.get(k))
        raise CheckpointError(f"{kind} checkpoint hyperparameters do not match configuration: {', '.join(diff)}")
    params = params_from_hyperparameters(hparams, arrays)
    return TranslationModel(params, Vocabulary.load(paths["src_vocab"]), Vocabulary.load(paths["tgt_vocab"]),
                            sidecar.get("max_decode_len", 32))
