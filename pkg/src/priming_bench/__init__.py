"""Cross-lingual structural priming workbench for GRU and Transformer translators."""

from .autodiff import Tape, Tensor, backward
from .bleu import BleuConfig, bleu_difference, bleu_score
from .data import ParallelPair, StructureLabel, Vocabulary, build_vocabulary, make_batch, tokenize
from .models import GruParams, TransformerParams, TranslationModel
from .optim import AdamState, adam_step

__version__ = "0.1.0"
