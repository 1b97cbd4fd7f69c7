"""Plot-data emission: delimited series plus rendered figures.

Each figure gets a CSV holding exactly the plotted series (so numbers
can be re-plotted elsewhere) and a PNG rendered with the Agg backend.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Any

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .metrics import _midranks, corpus_label_distribution
from .report import ReportBundle
from .snapshot import Snapshot
from .tree import LabelKind

_TOP_K = 25


def _write_csv(path: Path, header: list[str], rows: list[list[Any]]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    writer.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8")


def _bar_figure(path: Path, pairs: list[tuple[str, int]], title: str) -> None:
    fig, ax = plt.subplots(figsize=(10, 4))
    shown = pairs[:_TOP_K]
    ax.bar(range(len(shown)), [c for _, c in shown], color="#1f77b4")
    ax.set_xticks(range(len(shown)))
    ax.set_xticklabels([lab for lab, _ in shown], rotation=60, ha="right", fontsize=8)
    ax.set_yscale("log")
    ax.set_ylabel("nodes")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def emit_plot_data(snapshot: Snapshot, bundle: ReportBundle, outdir: str | Path) -> list[Path]:
    """Write per-figure CSV series and PNG renderings into ``outdir``."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    trees = [f.tree for f in snapshot.firms]

    country = corpus_label_distribution(trees, LabelKind.COUNTRY)
    _write_csv(out / "country_distribution.csv", ["label", "count"], [list(p) for p in country])
    _bar_figure(out / "country_distribution.png", country, "nodes per country")
    written += [out / "country_distribution.csv", out / "country_distribution.png"]

    sic1 = corpus_label_distribution(trees, LabelKind.SIC1)
    sic2 = corpus_label_distribution(trees, LabelKind.SIC2)
    _write_csv(out / "sic1_distribution.csv", ["label", "count"], [list(p) for p in sic1])
    _write_csv(out / "sic2_distribution.csv", ["label", "count"], [list(p) for p in sic2])
    fig, axes = plt.subplots(2, 1, figsize=(10, 7))
    for ax, pairs, name in ((axes[0], sic1, "1-digit SIC"), (axes[1], sic2[:_TOP_K], "2-digit SIC")):
        ax.bar(range(len(pairs)), [c for _, c in pairs], color="#ff7f0e")
        ax.set_xticks(range(len(pairs)))
        ax.set_xticklabels([lab for lab, _ in pairs], rotation=0, fontsize=8)
        ax.set_yscale("log")
        ax.set_ylabel("nodes")
        ax.set_title(name)
    fig.tight_layout()
    fig.savefig(out / "sic_distribution.png", dpi=150)
    plt.close(fig)
    written += [
        out / "sic1_distribution.csv",
        out / "sic2_distribution.csv",
        out / "sic_distribution.png",
    ]

    hier = bundle.hierarchy
    rows = [[fid, *fracs] for fid, fracs in hier.rows.items()]
    rows.append(["avg", *hier.avg])
    _write_csv(out / "hierarchy_distribution.csv", ["firm_id", *hier.labels], rows)
    fig, ax = plt.subplots(figsize=(max(6, 0.5 * len(rows)), 4.5))
    firm_ids = [r[0] for r in rows]
    bottoms = [0.0] * len(rows)
    cmap = plt.get_cmap("viridis")
    for li, label in enumerate(hier.labels):
        heights = [float(r[1 + li]) for r in rows]
        ax.bar(
            firm_ids, heights, bottom=bottoms,
            color=cmap(li / max(1, len(hier.labels) - 1)), label=label,
        )
        bottoms = [b + h for b, h in zip(bottoms, heights)]
    ax.set_ylabel("fraction of non-root nodes")
    ax.set_title("level occupancy")
    ax.legend(fontsize=7, ncol=2, title="level")
    plt.setp(ax.get_xticklabels(), rotation=60, ha="right", fontsize=8)
    fig.tight_layout()
    fig.savefig(out / "hierarchy_distribution.png", dpi=150)
    plt.close(fig)
    written += [out / "hierarchy_distribution.csv", out / "hierarchy_distribution.png"]

    sized = [(f.firm_id, f.size, f.group) for f in snapshot.firms if f.size is not None]
    if len(sized) >= 3:
        t_vals = [bundle.perfect[fid].result.t_total for fid, _, _ in sized]
        size_ranks = _midranks(np.asarray([s for _, s, _ in sized]))
        stat_ranks = _midranks(np.asarray(t_vals))
        _write_csv(
            out / "rank_scatter.csv",
            ["firm_id", "size", "size_rank", "t_total", "stat_rank"],
            [
                [fid, size, float(sr), t, float(tr)]
                for (fid, size, _), sr, t, tr in zip(sized, size_ranks, t_vals, stat_ranks)
            ],
        )
        fig, ax = plt.subplots(figsize=(5, 5))
        for group, marker in (("SIFI", "o"), ("BANK", "s"), ("INSURER", "^")):
            xs = [sr for (_, _, g), sr in zip(sized, size_ranks) if g.value == group]
            ys = [tr for (_, _, g), tr in zip(sized, stat_ranks) if g.value == group]
            if xs:
                ax.scatter(xs, ys, marker=marker, label=group)
        ax.set_xlabel("size rank")
        ax.set_ylabel("statistic rank")
        ax.legend(fontsize=8)
        ax.set_title("size vs perfect-tree statistic (ranks)")
        fig.tight_layout()
        fig.savefig(out / "rank_scatter.png", dpi=150)
        plt.close(fig)
        written += [out / "rank_scatter.csv", out / "rank_scatter.png"]

    return written
