"""Named parameter sets for the two architectures."""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass
from typing import ClassVar, Iterator

import numpy as np

from ..autodiff import Tensor

INIT_SCALE = 0.08


@dataclass(frozen=True)
class TransformerConfig:
    src_vocab: int
    tgt_vocab: int
    d_model: int = 64
    n_heads: int = 8
    n_layers: int = 2
    d_ff: int = 128
    max_len: int = 64
    ln_eps: float = 1e-5

    def __post_init__(self):
        if self.d_model % self.n_heads:
            raise ValueError(f"d_model={self.d_model} is not divisible by n_heads={self.n_heads}")


@dataclass(frozen=True)
class GruConfig:
    src_vocab: int
    tgt_vocab: int
    emb_dim: int = 64
    hidden: int = 64


class ModelParams:
    """Ordered mapping of parameter name -> Tensor, plus the model's config."""

    kind: ClassVar[str]
    config_cls: ClassVar[type]

    def __init__(self, config, tensors: dict[str, Tensor]):
        self.config = config
        self.tensors = tensors

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def items(self):
        return self.tensors.items()

    def hyperparameters(self) -> dict:
        return {"model_kind": self.kind, **asdict(self.config)}

    def arrays(self) -> dict[str, np.ndarray]:
        return {k: t.data for k, t in self.tensors.items()}

    def checksum(self) -> str:
        h = hashlib.sha256()
        for name in sorted(self.tensors):
            h.update(name.encode())
            h.update(np.ascontiguousarray(self.tensors[name].data, dtype="<f8").tobytes())
        return h.hexdigest()

    @classmethod
    def shapes(cls, config) -> dict[str, tuple]:
        raise NotImplementedError

    @classmethod
    def init(cls, config, seed: int = 0) -> "ModelParams":
        """Uniform(-0.08, 0.08) weights, zero biases, unit layer-norm gains."""
        rng = np.random.default_rng(seed)
        tensors = {}
        for name, shape in cls.shapes(config).items():
            leaf = name.rsplit(".", 1)[-1]
            if leaf.startswith("ln") and leaf.endswith("_g"):
                data = np.ones(shape)
            elif leaf.startswith("b") or (leaf.startswith("ln") and leaf.endswith("_b")):
                data = np.zeros(shape)
            else:
                data = rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape)
            tensors[name] = Tensor(data, requires_grad=True, name=name)
        return cls(config, tensors)

    @classmethod
    def from_arrays(cls, config, arrays: dict[str, np.ndarray]) -> "ModelParams":
        expected = cls.shapes(config)
        if set(arrays) != set(expected):
            raise ValueError(f"parameter names do not match a {cls.kind} model with {config}")
        for name, shape in expected.items():
            if tuple(arrays[name].shape) != tuple(shape):
                raise ValueError(f"{name}: shape {arrays[name].shape} != expected {shape}")
        return cls(config, {n: Tensor(np.array(arrays[n], dtype=np.float64), requires_grad=True, name=n)
                            for n in expected})


class TransformerParams(ModelParams):
    """Pre-norm encoder-decoder.  Head ``h`` of each W_Q/W_K/W_V owns columns
    ``h*d_k:(h+1)*d_k``; W_O maps the concatenated heads back to d_model."""

    kind = "transformer"
    config_cls = TransformerConfig

    @classmethod
    def shapes(cls, c: TransformerConfig) -> dict[str, tuple]:
        d = c.d_model
        s = {
            "src_emb": (c.src_vocab, d),
            "tgt_emb": (c.tgt_vocab, d),
            "src_pos": (c.max_len, d),
            "tgt_pos": (c.max_len, d),
        }

        def attn(prefix):
            for w in ("W_Q", "W_K", "W_V", "W_O"):
                s[f"{prefix}.{w}"] = (d, d)

        def ffn(prefix):
            s.update({f"{prefix}.W1": (d, c.d_ff), f"{prefix}.b1": (c.d_ff,),
                      f"{prefix}.W2": (c.d_ff, d), f"{prefix}.b2": (d,)})

        def norm(prefix):
            s.update({f"{prefix}_g": (d,), f"{prefix}_b": (d,)})

        for i in range(c.n_layers):
            p = f"enc.{i}"
            norm(f"{p}.ln1"), attn(f"{p}.self"), norm(f"{p}.ln2"), ffn(f"{p}.ffn")
        norm("enc.ln_f")
        for i in range(c.n_layers):
            p = f"dec.{i}"
            norm(f"{p}.ln1"), attn(f"{p}.self"), norm(f"{p}.ln2"), attn(f"{p}.cross")
            norm(f"{p}.ln3"), ffn(f"{p}.ffn")
        norm("dec.ln_f")
        s["out.W"] = (d, c.tgt_vocab)
        s["out.b"] = (c.tgt_vocab,)
        return s


GATE_NAMES = ("W_z", "U_z", "b_z", "W_r", "U_r", "b_r", "W_h", "U_h", "b_h")


class GruParams(ModelParams):
    """GRU encoder and decoder with dot-product attention over encoder states.

    Gate weights follow the row-vector convention ``x @ W + h @ U + b``.
    """

    kind = "gru"
    config_cls = GruConfig

    @classmethod
    def shapes(cls, c: GruConfig) -> dict[str, tuple]:
        e, h = c.emb_dim, c.hidden
        s = {"src_emb": (c.src_vocab, e), "tgt_emb": (c.tgt_vocab, e)}
        for side in ("enc", "dec"):
            for gate in "zrh":
                s[f"{side}.W_{gate}"] = (e, h)
                s[f"{side}.U_{gate}"] = (h, h)
                s[f"{side}.b_{gate}"] = (h,)
        s["out.W"] = (2 * h, c.tgt_vocab)
        s["out.b"] = (c.tgt_vocab,)
        return s

    def gates(self, side: str) -> dict[str, Tensor]:
        return {g: self.tensors[f"{side}.{g}"] for g in GATE_NAMES}


PARAM_CLASSES = {cls.kind: cls for cls in (TransformerParams, GruParams)}


def params_from_hyperparameters(hparams: dict, arrays: dict[str, np.ndarray]) -> ModelParams:
    hparams = dict(hparams)
    cls = PARAM_CLASSES[hparams.pop("model_kind")]
    return cls.from_arrays(cls.config_cls(**hparams), arrays)
