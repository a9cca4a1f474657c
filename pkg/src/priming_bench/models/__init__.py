from .attention import multi_head_attention, scaled_dot_attention
from .gru import gru_attention_context, gru_cell, gru_seq2seq_forward
from .inference import (
    DecodeResult,
    TranslationModel,
    batch_loss,
    forward,
    greedy_decode,
    sequence_log_prob,
    sequence_log_probs,
    train_epoch,
)
from .params import GruConfig, GruParams, ModelParams, TransformerConfig, TransformerParams
from .transformer import transformer_forward

__all__ = [
    "DecodeResult", "GruConfig", "GruParams", "ModelParams", "TransformerConfig", "TransformerParams",
    "TranslationModel", "batch_loss", "forward", "greedy_decode", "gru_attention_context", "gru_cell",
    "gru_seq2seq_forward", "multi_head_attention", "scaled_dot_attention", "sequence_log_prob",
    "sequence_log_probs", "train_epoch", "transformer_forward",
]
