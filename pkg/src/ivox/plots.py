"""Figure rendering for score reports and training traces.

Figures go straight to files; rendering is deterministic so reruns
produce byte-identical images.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .scoring import ScoreReport


def save_score_figure(report: ScoreReport, path, dpi: int = 120) -> None:
    """Per-test score curves over the target list, with threshold lines.

    Mirrors the delimited report: x is the target's position in the
    list, y the prediction score in [0, 1].
    """
    target_order: list[str] = []
    for entry in report.entries:
        if entry.target_id not in target_order:
            target_order.append(entry.target_id)
    positions = {tid: i for i, tid in enumerate(target_order)}

    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    test_ids = sorted({e.test_id for e in report.entries})
    for test_id in test_ids:
        rows = [e for e in report.entries if e.test_id == test_id]
        rows.sort(key=lambda e: positions[e.target_id])
        ax.plot(
            [positions[e.target_id] for e in rows],
            [e.score for e in rows],
            marker="o",
            markersize=3,
            linewidth=1.0,
            label=f"test {test_id}",
        )
    for t in report.thresholds:
        ax.axhline(t, color="gray", linestyle="--", linewidth=0.8)
        ax.annotate(f"{t:g}", xy=(0.0, t), fontsize=7, color="gray",
                    xytext=(2, 2), textcoords="offset points")
    ax.set_xlabel("target index")
    ax.set_ylabel("prediction score")
    ax.set_ylim(-0.05, 1.05)
    if len(target_order) <= 40:
        ax.set_xticks(range(len(target_order)))
        ax.set_xticklabels(target_order, rotation=90, fontsize=6)
    if len(test_ids) <= 12:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)


def save_loglik_figure(trace, path, dpi: int = 120) -> None:
    """Average log-likelihood per EM iteration."""
    fig, ax = plt.subplots(figsize=(6.0, 3.5))
    ax.plot(range(len(trace)), list(trace), marker="o", markersize=3)
    ax.set_xlabel("EM iteration")
    ax.set_ylabel("avg log-likelihood per frame")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
