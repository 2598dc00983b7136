"""Summaries, cross-run overlap and per-region plots of DMR tables."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .errors import MmcmcError
from .io import MethylationMatrix, validate_pair
from .simulate import record_rows

STAT_NAMES = ("min", "q1", "median", "mean", "q3", "max")


@dataclass(frozen=True)
class DmrSummary:
    n_dmrs: int
    size_stats: dict[str, float]
    decision_stats: dict[str, float]
    by_chromosome: dict[str, int]
    by_stage: dict[int, int]


@dataclass(frozen=True)
class Overlap:
    index_a: int
    index_b: int
    overlap_percent: float


def six_number_summary(values) -> dict[str, float]:
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        return {}
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    return dict(zip(STAT_NAMES, map(float, (x.min(), q1, med, x.mean(), q3, x.max()))))


def summarize_dmrs(records) -> DmrSummary:
    records = list(records)
    return DmrSummary(
        n_dmrs=len(records),
        size_stats=six_number_summary([r.cpg_count for r in records]),
        decision_stats=six_number_summary([r.decision_value for r in records]),
        by_chromosome=dict(Counter(r.chromosome for r in records)),
        by_stage=dict(sorted(Counter(r.stage for r in records).items())),
    )


def format_summary(summary: DmrSummary) -> str:
    def stats_block(stats):
        head = " ".join(f"{name:>7}" for name in STAT_NAMES)
        vals = " ".join(f"{stats[name]:7.3f}" for name in STAT_NAMES)
        return f"{head}\n{vals}"

    lines = [
        "Summary of DMR results (mmcmcBayes)",
        "-----------------------------------",
        f"Number of DMRs: {summary.n_dmrs}",
        "",
    ]
    if summary.n_dmrs:
        lines += ["Region size (CpG_Count):", stats_block(summary.size_stats), ""]
        lines += ["Decision_Value:", stats_block(summary.decision_stats), ""]
        lines.append("DMRs by Chromosome:")
        lines.append(f"    {'Chromosome':>10} {'n_dmrs':>7}")
        for i, (chrom, n) in enumerate(summary.by_chromosome.items(), start=1):
            lines.append(f"{i:<3} {chrom:>10} {n:>7}")
        lines += ["", "DMRs by Stage:", f"    {'Stage':>10} {'n_dmrs':>7}"]
        for i, (stage, n) in enumerate(summary.by_stage.items(), start=1):
            lines.append(f"{i:<3} {stage:>10} {n:>7}")
    return "\n".join(lines) + "\n"


def compare_dmrs(a, b, cpg_index: MethylationMatrix) -> list[Overlap]:
    """Pairs of regions from ``a`` and ``b`` sharing at least one CpG row.

    The overlap percentage is the Jaccard index of the two row sets times
    100.  Indices are zero-based positions in the input tables.  Returns an
    empty list when nothing overlaps.
    """
    ra = record_rows(a, cpg_index)
    rb = np.array(record_rows(b, cpg_index), dtype=np.int64).reshape(-1, 2)
    out = []
    for i, (s, e) in enumerate(ra):
        hits = np.flatnonzero((rb[:, 0] <= e) & (rb[:, 1] >= s))
        for j in hits:
            bs, be = rb[j]
            inter = min(e, be) - max(s, bs) + 1
            union = (e - s + 1) + (be - bs + 1) - inter
            out.append(Overlap(i, int(j), 100.0 * inter / union))
    return out


def site_means(matrix: MethylationMatrix, start_row: int, end_row: int) -> np.ndarray:
    """Mean over samples for each row, ignoring missing cells (NaN if all missing)."""
    block = matrix.values[start_row : end_row + 1]
    observed = ~np.isnan(block)
    counts = observed.sum(axis=1)
    sums = np.where(observed, block, 0.0).sum(axis=1)
    out = np.full(block.shape[0], np.nan)
    np.divide(sums, counts, out=out, where=counts > 0)
    return out


SERIES_STYLE = {"cancer": "#c0392b", "normal": "#2471a3"}


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def plot_dmr_region(
    records,
    cancer: MethylationMatrix,
    normal: MethylationMatrix,
    index: int,
    width: int = 640,
    height: int = 400,
) -> str:
    """SVG line chart of per-CpG group mean M-values over one detected region.

    ``index`` is 1-based.  Each series is a ``<g class="series">`` element
    whose ``data-values`` attribute holds the plotted means (``nan`` for
    sites with no observed value).
    """
    records = list(records)
    if not 1 <= index <= len(records):
        raise MmcmcError(f"DMR index {index} out of range 1..{len(records)}")
    validate_pair(cancer, normal)
    rec = records[index - 1]
    (start, end), = record_rows([rec], cancer)
    series = {"cancer": site_means(cancer, start, end), "normal": site_means(normal, start, end)}
    labels = cancer.cpg_ids[start : end + 1]

    left, right, top, bottom = 64, 110, 40, 70
    pw, ph = width - left - right, height - top - bottom
    finite = np.concatenate([v[np.isfinite(v)] for v in series.values()])
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    if hi - lo < 1e-9:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    n = len(labels)

    def px(i):
        return left + (pw / 2 if n == 1 else pw * i / (n - 1))

    def py(v):
        return top + ph * (hi - v) / (hi - lo)

    title = f"Chr {rec.chromosome}: {rec.start_cpg_id} - {rec.end_cpg_id}"
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f"<title>{escape(title)}</title>",
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text class="title" x="{left + pw / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for tick in np.linspace(lo, hi, 5):
        y = py(tick)
        parts.append(f'<line x1="{left - 4}" y1="{y:.1f}" x2="{left}" y2="{y:.1f}" stroke="black"/>')
        parts.append(f'<text x="{left - 6}" y="{y + 4:.1f}" text-anchor="end">{tick:.2f}</text>')
    step = max(1, n // 10)
    for i in range(0, n, step):
        x = px(i)
        parts.append(
            f'<text x="{x:.1f}" y="{top + ph + 8}" text-anchor="end" font-size="9" '
            f'transform="rotate(-45 {x:.1f} {top + ph + 8})">{escape(labels[i])}</text>'
        )
    parts.append(f'<text x="{left + pw / 2:.1f}" y="{height - 6}" text-anchor="middle">CpG site</text>')
    parts.append(
        f'<text x="14" y="{top + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 14 {top + ph / 2:.1f})">Mean M-value</text>'
    )

    for k, (name, values) in enumerate(series.items()):
        color = SERIES_STYLE[name]
        pts = [(px(i), py(v)) for i, v in enumerate(values) if np.isfinite(v)]
        data = ",".join("nan" if not np.isfinite(v) else _fmt(v) for v in values)
        parts.append(f'<g class="series" data-group="{name}" data-values="{data}">')
        if len(pts) > 1:
            coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
            parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        for x, y in pts:
            parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" fill="{color}"/>')
        parts.append("</g>")
        ly = top + 16 * k + 8
        parts.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 32}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{left + pw + 36}" y="{ly + 4}">{name.capitalize()}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
