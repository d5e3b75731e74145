"""Rendering of benchmark summary tables as error-bar figures.

Files are written deterministically: the Agg backend, a fixed SVG hash salt
and stripped date metadata make regeneration from the same table
byte-identical.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .errors import EmptyTable  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "identwv"

_METRIC_LABELS = {"tpr": "TPR", "ppv": "PPV", "e2": "relative $\\ell_2$ error $E_2$"}


def _save(fig, out_path: str) -> None:
    if out_path.endswith(".svg"):
        fig.savefig(out_path, metadata={"Date": None})
    elif out_path.endswith(".pdf"):
        fig.savefig(out_path, metadata={"CreationDate": None})
    else:
        fig.savefig(out_path)
    plt.close(fig)


def emit_plot(tables: list[tuple[str, list[dict]]], metric: str, out_path: str) -> None:
    """Plot mean +- std of one metric against the noise level.

    ``tables`` pairs a series label with summary rows (as produced by
    ``run_benchmark`` or read back from a summary CSV).
    """
    if metric not in _METRIC_LABELS:
        raise ValueError(f"metric must be one of {sorted(_METRIC_LABELS)}")
    if not tables or all(not rows for _, rows in tables):
        raise EmptyTable("no summary rows to plot")
    fig, ax = plt.subplots(figsize=(5, 3.6))
    for label, rows in tables:
        if not rows:
            continue
        levels = [r["level"] for r in rows]
        means = [r[f"mean_{metric}"] for r in rows]
        stds = [r[f"std_{metric}"] for r in rows]
        ax.errorbar(levels, means, yerr=stds, marker="o", capsize=3, label=label)
    ax.set_xlabel("noise-to-signal ratio $\\sigma_{NSR}$")
    ax.set_ylabel(_METRIC_LABELS[metric])
    if metric in ("tpr", "ppv"):
        ax.set_ylim(-0.05, 1.1)
    ax.grid(True, alpha=0.3)
    if len(tables) > 1 or tables[0][0]:
        ax.legend()
    fig.tight_layout()
    _save(fig, out_path)


def emit_metric_plots(tables: list[tuple[str, list[dict]]], out_dir: str,
                      stem: str = "bench") -> list[str]:
    """Write one figure per metric; returns the created paths."""
    import os

    paths = []
    for metric in ("tpr", "ppv", "e2"):
        path = os.path.join(out_dir, f"{stem}_{metric}.svg")
        emit_plot(tables, metric, path)
        paths.append(path)
    return paths
