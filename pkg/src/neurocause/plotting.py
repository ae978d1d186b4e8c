"""Figures for grading reports (grade counts, correct rate per complexity bucket)."""

from __future__ import annotations

from math import sqrt
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .harness import BatchReport, Grade  # noqa: E402

GOLDEN = (sqrt(5) - 1.0) / 2.0

STYLE = {
    "font.family": "serif",
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "neurocause",
}

COLORS = {Grade.CORRECT.value: "#4c956c", Grade.PARTLY_CORRECT.value: "#f2a541", Grade.INCORRECT.value: "#c8553d"}


def figsize(width: float = 4.5) -> tuple[float, float]:
    return width, width * GOLDEN


def _save(fig, path: Path) -> Path:
    # no timestamps or version strings, so reruns give identical files
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_grade_counts(report: BatchReport, path: Path) -> Path:
    counts = report.grade_counts
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize())
        labels = list(counts)
        ax.bar(labels, [counts[k] for k in labels], color=[COLORS[k] for k in labels])
        ax.set_ylabel("answers")
        ax.set_title("Grades")
        fig.tight_layout()
        return _save(fig, path)


def plot_bucket_rates(report: BatchReport, path: Path) -> Path:
    rows = report.by_bucket()
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize(5.5))
        buckets = list(rows)
        bottom = [0.0] * len(buckets)
        for g in Grade:
            share = [rows[b][g.value] / max(1, sum(rows[b].values())) for b in buckets]
            ax.bar(buckets, share, bottom=bottom, color=COLORS[g.value], label=g.value.replace("_", " ").lower())
            bottom = [a + b for a, b in zip(bottom, share)]
        ax.set_ylim(0, 1)
        ax.set_xlabel("complexity bucket")
        ax.set_ylabel("share of answers")
        if buckets:
            ax.legend(frameon=False, loc="upper left", bbox_to_anchor=(1.0, 1.0))
        fig.tight_layout()
        return _save(fig, path)


def render_report_figures(report: BatchReport, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return [
        plot_grade_counts(report, out / "grade_counts.png"),
        plot_bucket_rates(report, out / "grade_by_complexity.png"),
    ]
