"""Text, CSV and SVG renderings of a priming report."""

from __future__ import annotations

import csv
import io
from typing import Sequence
from xml.sax.saxutils import escape

from .data import STRUCTURES
from .priming.evaluate import CATEGORIES, MODEL_KINDS, PrimingReport

CATEGORY_LABELS = {
    "congruent": "same-meaning/same-structure",
    "incongruent": "same-meaning/other-structure",
    "donor_congruent": "other-meaning/same-structure",
    "donor_incongruent": "other-meaning/other-structure",
}


def _ordered(mapping) -> list[str]:
    return [s.value for s in STRUCTURES if s.value in mapping]


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def render_table(report: PrimingReport) -> str:
    lines = []
    meta = report.metadata
    bleu = meta.get("bleu", {})
    lines.append(f"seed={meta.get('seed')} config_hash={meta.get('config_hash')} "
                 f"bleu max_n={bleu.get('max_n')} smoothing={bleu.get('smoothing')}")
    header = ["structure", "cat1", "cat2", "cat3", "cat4", "bleu_diff", "proportion", "accuracy"]
    for kind in MODEL_KINDS:
        m = report.models[kind]
        lines.append("")
        lines.append(f"[{kind}]")
        lines.append("  ".join(f"{h:>10}" for h in header))
        for s in _ordered(m["category_bleu"]):
            cats = m["category_bleu"][s]
            cells = [s] + [_fmt(cats[c]) for c in CATEGORIES] + [
                _fmt(m["bleu_difference"][s]), _fmt(m["priming_proportion"][s]), _fmt(m["structural_accuracy"][s])]
            lines.append("  ".join(f"{c:>10}" for c in cells))
    lines.append("")
    gaps = ", ".join(f"{s} {report.accuracy_gap_pp[s]:+.2f} pp" for s in _ordered(report.accuracy_gap_pp))
    lines.append(f"accuracy gap (transformer - gru): {gaps}")
    lines.append("categories: " + "; ".join(f"cat{i + 1}={CATEGORY_LABELS[c]}" for i, c in enumerate(CATEGORIES)))
    return "\n".join(lines) + "\n"


def per_n_rows(report: PrimingReport) -> list[dict]:
    rows = []
    for kind in MODEL_KINDS:
        for s in _ordered(report.models[kind]["per_n_bleu"]):
            cats = report.models[kind]["per_n_bleu"][s]
            for c in CATEGORIES:
                un, sm = cats[c]["unsmoothed"], cats[c]["smoothed"]
                for n in range(len(un)):
                    rows.append({"model": kind, "structure": s, "category": c, "n": n + 1,
                                 "bleu_unsmoothed": un[n], "bleu_smoothed": sm[n]})
    return rows


def provenance_line(report: PrimingReport) -> str:
    return f"# seed={report.metadata.get('seed')} config_hash={report.metadata.get('config_hash')}\n"


def render_per_n_csv(report: PrimingReport) -> str:
    buf = io.StringIO()
    buf.write(provenance_line(report))
    cols = ["model", "structure", "category", "n", "bleu_unsmoothed", "bleu_smoothed"]
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    writer.writeheader()
    for row in per_n_rows(report):
        writer.writerow({**row, "bleu_unsmoothed": repr(row["bleu_unsmoothed"]),
                         "bleu_smoothed": repr(row["bleu_smoothed"])})
    return buf.getvalue()


def render_svg(report: PrimingReport, categories: Sequence[str] = ("congruent", "incongruent"),
               smoothing: str = "smoothed") -> str:
    """Grouped bars of per-n BLEU: one panel per structure, bars per (model, category, n)."""
    structures = _ordered(report.models[MODEL_KINDS[0]]["per_n_bleu"])
    max_n = len(next(iter(report.models[MODEL_KINDS[0]]["per_n_bleu"].values()))[categories[0]][smoothing]) if structures else 0
    colors = {("gru", categories[0]): "#1f77b4", ("gru", categories[-1]): "#aec7e8",
              ("transformer", categories[0]): "#d62728", ("transformer", categories[-1]): "#ff9896"}
    series = [(k, c) for k in MODEL_KINDS for c in categories]
    bar_w, gap, panel_h, top = 8, 6, 160, 30
    panel_w = max_n * (len(series) * bar_w + gap) + 40
    width = max(panel_w * max(len(structures), 1) + 20, 420)
    height = top + panel_h + 70
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="10">',
           f'<text x="10" y="16">per-n BLEU ({escape(smoothing)})</text>']
    for p, s in enumerate(structures):
        x0 = 20 + p * panel_w
        base = top + panel_h
        out.append(f'<line x1="{x0}" y1="{base}" x2="{x0 + panel_w - 30}" y2="{base}" stroke="black"/>')
        out.append(f'<text x="{x0}" y="{base + 28}">{escape(s)}</text>')
        for n in range(max_n):
            gx = x0 + n * (len(series) * bar_w + gap)
            out.append(f'<text x="{gx}" y="{base + 12}">{n + 1}</text>')
            for j, (k, c) in enumerate(series):
                v = report.models[k]["per_n_bleu"][s][c][smoothing][n]
                h = v * panel_h
                out.append(f'<rect x="{gx + j * bar_w}" y="{base - h:.2f}" width="{bar_w - 1}" height="{h:.2f}" '
                           f'fill="{colors.get((k, c), "#888888")}"><title>{k} {c} n={n + 1}: {v:.4f}</title></rect>')
    for j, (k, c) in enumerate(series):
        y = top + panel_h + 42 + (j // 2) * 12
        x = 20 + (j % 2) * 200
        out.append(f'<rect x="{x}" y="{y - 8}" width="8" height="8" fill="{colors.get((k, c), "#888888")}"/>')
        out.append(f'<text x="{x + 12}" y="{y}">{k} / {escape(CATEGORY_LABELS.get(c, c))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_report(report: PrimingReport) -> tuple[str, str]:
    """(text summary, per-n BLEU CSV)."""
    return render_table(report), render_per_n_csv(report)
