"""Command-line entry point: generate, train, eval, report."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import Counter
from dataclasses import asdict
from pathlib import Path

from .checkpoint import CheckpointError
from .config import RunConfig
from .data import load_corpus, save_corpus
from .models import GruConfig, TransformerConfig
from .models.storage import load_model, model_paths, save_model
from .pipeline import NonFiniteLossError, eval_config, train_model
from .priming.evaluate import MODEL_KINDS, InsufficientDonorsError, PrimingReport, priming_report
from .priming.generate import CapacityError, generate_corpus_with_keys, generate_test_set, load_test_set, save_test_set
from .render import render_per_n_csv, render_svg, render_table

log = logging.getLogger("priming_bench")


class UserError(Exception):
    """Bad input or configuration; exit status 2."""


def _header(config: RunConfig) -> str:
    p = config.provenance()
    return f"seed={p['seed']} config_hash={p['config_hash']}"


def _freeze(config: RunConfig) -> None:
    out = Path(config.paths.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.frozen.json").write_text(config.dumps(), encoding="utf-8")


def cmd_generate(config: RunConfig) -> dict:
    c = config.corpus
    try:
        pairs, keys = generate_corpus_with_keys(config.seed, c.n_per_structure, c.structures)
        items = generate_test_set(config.seed, c.test_per_structure, exclude_keys=keys)
    except CapacityError as exc:
        raise UserError(str(exc)) from None
    corpus_path, test_path = config.paths.resolve("corpus"), config.paths.resolve("test_set")
    corpus_path.parent.mkdir(parents=True, exist_ok=True)
    test_path.parent.mkdir(parents=True, exist_ok=True)
    save_corpus(pairs, corpus_path, header=_header(config))
    save_test_set(items, test_path, header=_header(config))
    corpus_counts = Counter(p.structure.value for p in pairs)
    test_counts = Counter(it.structure.value for it in items)
    for s in ("Active", "Passive", "PO", "DO"):
        print(f"{s:8s} corpus={corpus_counts.get(s, 0):6d} test={test_counts.get(s, 0):4d}")
    return {"corpus": str(corpus_path), "test_set": str(test_path)}


def expected_hyperparameters(config: RunConfig, kind: str, src_vocab: int, tgt_vocab: int) -> dict:
    if kind == "transformer":
        t = config.transformer
        cfg = TransformerConfig(src_vocab, tgt_vocab, t.d_model, t.n_heads, t.n_layers, t.d_ff, t.max_len)
    else:
        cfg = GruConfig(src_vocab, tgt_vocab, config.gru.emb_dim, config.gru.hidden)
    return {"model_kind": kind, **asdict(cfg)}


def cmd_train(config: RunConfig, kind: str) -> dict:
    corpus_path = config.paths.resolve("corpus")
    if not corpus_path.exists():
        raise UserError(f"corpus not found: {corpus_path} (run 'generate' first)")
    corpus = load_corpus(corpus_path)
    if not corpus:
        raise UserError(f"corpus is empty: {corpus_path}")
    ckpt_dir = config.paths.resolve("checkpoints")
    ckpt_dir.mkdir(parents=True, exist_ok=True)
    log_path = ckpt_dir / f"{kind}.train_log.tsv"
    with open(log_path, "w", encoding="utf-8") as fh:
        fh.write(f"# {_header(config)} model={kind}\n")
        fh.write("epoch\tloss\n")

        def on_epoch(epoch, loss, model):
            fh.write(f"{epoch}\t{loss!r}\n")
            fh.flush()
            print(f"{kind} epoch {epoch:4d}  loss {loss:.6f}")
            return False

        model, losses = train_model(kind, corpus, config, on_epoch)
    sidecar = save_model(model, ckpt_dir, {**config.provenance(), "epochs": len(losses),
                                           "final_loss": losses[-1] if losses else None})
    print(f"wrote {model_paths(ckpt_dir, kind)['checkpoint']} sha256={sidecar['checkpoint_sha256'][:16]}")
    return sidecar


def _load_models(config: RunConfig) -> dict:
    ckpt_dir = config.paths.resolve("checkpoints")
    models = {}
    for kind in MODEL_KINDS:
        paths = model_paths(ckpt_dir, kind)
        if not paths["checkpoint"].exists() or not paths["sidecar"].exists():
            raise UserError(f"missing {kind} checkpoint in {ckpt_dir} (run 'train --model {kind}')")
        sidecar = json.loads(paths["sidecar"].read_text(encoding="utf-8"))
        hp = sidecar.get("hyperparameters", {})
        expected = expected_hyperparameters(config, kind, hp.get("src_vocab", -1), hp.get("tgt_vocab", -1))
        try:
            models[kind] = load_model(ckpt_dir, kind, expected)
        except (CheckpointError, FileNotFoundError, ValueError) as exc:
            raise UserError(str(exc)) from None
    return models


def cmd_eval(config: RunConfig) -> PrimingReport:
    test_path = config.paths.resolve("test_set")
    if not test_path.exists():
        raise UserError(f"test set not found: {test_path}")
    models = _load_models(config)
    items = load_test_set(test_path)
    try:
        report = priming_report(models, items, eval_config(config), metadata=config.provenance())
    except InsufficientDonorsError as exc:
        raise UserError(f"{exc}; increase corpus.test_per_structure") from None
    out = config.paths.resolve("reports")
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.dumps(), encoding="utf-8")
    (out / "items.csv").write_text(report.items_csv(), encoding="utf-8")
    print(render_table(report), end="")
    return report


def load_report(path) -> PrimingReport:
    try:
        return PrimingReport.from_json(json.loads(Path(path).read_text(encoding="utf-8")))
    except FileNotFoundError:
        raise UserError(f"report not found: {path}") from None
    except ValueError as exc:
        raise UserError(f"malformed report {path}: {exc}") from None


def cmd_report(config: RunConfig, svg: bool = False) -> str:
    out = config.paths.resolve("reports")
    report = load_report(out / "report.json")
    try:
        table = render_table(report)
        (out / "summary.txt").write_text(table, encoding="utf-8")
        (out / "per_n_bleu.csv").write_text(render_per_n_csv(report), encoding="utf-8")
        if svg:
            (out / "per_n_bleu.svg").write_text(render_svg(report), encoding="utf-8")
    except (KeyError, TypeError, IndexError) as exc:
        raise UserError(f"malformed report: {exc!r}") from None
    print(table, end="")
    return table


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", type=str, help="output directory (paths.out_dir)")
    common.add_argument("--epochs", type=int)
    common.add_argument("--print-config", action="store_true", help="print the resolved configuration and exit")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="priming-bench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common], help="write the parallel corpus and the priming test set")
    train = sub.add_parser("train", parents=[common], help="train one model on the corpus")
    train.add_argument("--model", choices=MODEL_KINDS, required=True)
    sub.add_parser("eval", parents=[common], help="evaluate both checkpoints on the test set")
    report = sub.add_parser("report", parents=[common], help="render an existing report")
    report.add_argument("--svg", action="store_true", help="also write a per-n BLEU bar chart")
    return parser


def resolve_config(args) -> RunConfig:
    try:
        config = RunConfig.load(args.config) if args.config else RunConfig()
    except (OSError, ValueError, TypeError) as exc:
        raise UserError(f"cannot read configuration {args.config}: {exc}") from None
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.paths.out_dir = args.out
    if args.epochs is not None:
        config.training.epochs = args.epochs
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        config = resolve_config(args)
        if args.print_config:
            print(config.dumps(), end="")
            return 0
        _freeze(config)
        if args.command == "generate":
            cmd_generate(config)
        elif args.command == "train":
            cmd_train(config, args.model)
        elif args.command == "eval":
            cmd_eval(config)
        else:
            cmd_report(config, svg=args.svg)
    except UserError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NonFiniteLossError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 1
    return 0
