"""Matplotlib rendering for evaluation reports and itinerary maps.

Everything draws through the Agg backend so the functions work headless;
each helper writes one PNG and returns its path.
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .dataset import POICatalog  # noqa: E402
from .metrics import EvaluationReport  # noqa: E402
from .planner import Itinerary  # noqa: E402

_STYLE = {
    "figure.dpi": 110,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
}

_PALETTE = ["#1b6ca8", "#e1701a", "#3a8f5d", "#a33b6f", "#6a5fa3", "#8c7434"]


def _metric_by_fold(report: EvaluationReport, key: str) -> tuple[list[int], list[float]]:
    folds, values = [], []
    for fold, stats in sorted(report.fold_means.items()):
        if stats.get(key) is not None:
            folds.append(fold)
            values.append(stats[key])
    return folds, values


def render_fold_means(report: EvaluationReport, path: Path) -> Path:
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(6.4, 3.6))
        metrics = ["f1", "pairs_f1", "diversity"]
        width = 0.8 / len(metrics)
        for m_i, metric in enumerate(metrics):
            folds, values = _metric_by_fold(report, metric)
            if not values:
                continue
            x = np.array(folds, dtype=float) + (m_i - (len(metrics) - 1) / 2) * width
            ax.bar(x, values, width=width, label=metric, color=_PALETTE[m_i])
        ax.set_xlabel("fold")
        ax.set_ylabel("mean score")
        ax.set_ylim(0, 1)
        ax.set_title("Per-fold mean scores")
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path


def render_score_distributions(report: EvaluationReport, path: Path) -> Path:
    good = [r for r in report.rows if r.error is None]
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(1, 2, figsize=(8.0, 3.2))
        series = [
            ("f1", [r.f1 for r in good if r.f1 is not None]),
            ("diversity", [r.diversity for r in good if r.diversity is not None]),
        ]
        for ax, (label, values) in zip(axes, series):
            if values:
                ax.hist(values, bins=np.linspace(0, 1, 21), color=_PALETTE[0])
            ax.set_xlabel(label)
            ax.set_ylabel("queries")
        fig.suptitle("Per-query score distributions")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path


def render_alpha_tradeoff(report: EvaluationReport, path: Path) -> Path:
    alphas = report.config.get("alphas", [])
    values = [report.overall.get(f"combined@{a:g}") for a in alphas]
    pairs = [(a, v) for a, v in zip(alphas, values) if v is not None]
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(5.6, 3.2))
        if pairs:
            ax.plot([p[0] for p in pairs], [p[1] for p in pairs],
                    marker="o", color=_PALETTE[1])
        ax.set_xlabel("alpha (popularity weight)")
        ax.set_ylabel("combined score")
        ax.set_title("Popularity/diversity trade-off")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path


def render_latency(report: EvaluationReport, path: Path) -> Path:
    seconds = [r.seconds for r in report.rows if r.error is None]
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(5.6, 3.2))
        if seconds:
            ax.hist(seconds, bins=20, color=_PALETTE[2])
        ax.set_xlabel("seconds per query")
        ax.set_ylabel("queries")
        ax.set_title("Query latency")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path


def render_report_figures(
    report: EvaluationReport, out_dir: str | Path, stem: str = "report"
) -> list[Path]:
    """Render the full figure set next to a written report."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return [
        render_fold_means(report, out / f"{stem}_fold_means.png"),
        render_score_distributions(report, out / f"{stem}_distributions.png"),
        render_alpha_tradeoff(report, out / f"{stem}_alpha.png"),
        render_latency(report, out / f"{stem}_latency.png"),
    ]


def plot_itineraries(
    catalog: POICatalog, itineraries: Sequence[Itinerary], path: str | Path
) -> Path:
    """Draw the catalog and a set of itineraries on a local x/y projection."""
    path = Path(path)
    lat0 = sum(p.lat for p in catalog) / len(catalog)
    # equirectangular local frame, roughly km at the catalog's latitude
    xs = {p.poi_id: p.lon * np.cos(np.radians(lat0)) * 111.32 for p in catalog}
    ys = {p.poi_id: p.lat * 110.57 for p in catalog}
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(6.4, 6.0))
        ax.scatter(list(xs.values()), list(ys.values()), s=28, c="#777777", zorder=2)
        for p in catalog:
            ax.annotate(str(p.poi_id), (xs[p.poi_id], ys[p.poi_id]),
                        textcoords="offset points", xytext=(4, 4), fontsize=8)
        for i, itin in enumerate(itineraries):
            color = _PALETTE[i % len(_PALETTE)]
            px = [xs[p] for p in itin.poi_ids]
            py = [ys[p] for p in itin.poi_ids]
            label = f"#{i + 1} ppl {itin.perplexity:.2f}"
            ax.plot(px, py, marker="o", color=color, linewidth=2, zorder=3, label=label)
            ax.scatter([xs[itin.prominent]], [ys[itin.prominent]], s=120,
                       facecolors="none", edgecolors=color, zorder=4)
        ax.set_xlabel("east-west (km, relative)")
        ax.set_ylabel("north-south (km, relative)")
        ax.set_title("Recommended itineraries")
        ax.legend(frameon=False, fontsize=8)
        ax.set_aspect("equal", adjustable="datalim")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path
