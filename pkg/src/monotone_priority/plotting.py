"""Figures for the CLI report paths.

Both functions write a single image file and return its path. The Agg
backend is selected so nothing needs a display.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402
from matplotlib.ticker import MaxNLocator  # noqa: E402

from .axioms import AXIOMS, AxiomReport  # noqa: E402

# fail, not checked, pass
_VERDICT_COLOURS = ListedColormap(["#d9534f", "#bbbbbb", "#5cb85c"])
_VERDICT_TEXT = {0: "FAIL", 1: "-", 2: "pass"}


def axiom_matrix_figure(rows: Sequence[tuple[str, Sequence[AxiomReport]]], path: str | Path) -> Path:
    """Pass/fail grid: one row per system, one column per axiom."""
    path = Path(path)
    grid = []
    for _, reports in rows:
        verdicts = {r.axiom: r.passed for r in reports}
        grid.append([1 if a not in verdicts else 2 * verdicts[a] for a in AXIOMS])
    fig, ax = plt.subplots(figsize=(1.3 * len(AXIOMS) + 1.5, 0.55 * len(rows) + 1.2))
    ax.imshow(grid, cmap=_VERDICT_COLOURS, vmin=0, vmax=2, aspect="auto")
    ax.set_xticks(range(len(AXIOMS)))
    ax.set_xticklabels(AXIOMS)
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels([name for name, _ in rows])
    for i, row in enumerate(grid):
        for j, cell in enumerate(row):
            ax.text(j, i, _VERDICT_TEXT[cell], ha="center", va="center", color="white", fontsize=9)
    ax.set_title("axiom checks")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def priority_figure(graph, parent, priorities: dict[str, int], path: str | Path,
                    lambda_max: int | None = None) -> Path:
    """Calls placed in a column per contract at their priority, with reference arrows."""
    path = Path(path)
    contracts = list(parent.contracts)
    column = {x: i for i, x in enumerate(contracts)}
    pos = {}
    # spread calls that share a contract and a priority
    slot: dict[tuple[str, int], int] = {}
    for c in graph.calls:
        x, p = parent[c], priorities.get(c)
        if p is None:
            continue
        k = slot.get((x, p), 0)
        slot[(x, p)] = k + 1
        pos[c] = (column[x] + 0.18 * k, p)
    fig, ax = plt.subplots(figsize=(1.6 * max(len(contracts), 2) + 1, 4.5))
    for c, (x, y) in pos.items():
        for d in graph.refs(c):
            if d in pos and d != c:
                ax.annotate("", xy=pos[d], xytext=(x, y),
                            arrowprops={"arrowstyle": "->", "color": "0.55", "lw": 0.9})
    if pos:
        xs, ys = zip(*pos.values())
        ax.scatter(xs, ys, s=60, zorder=3)
        for c, (x, y) in pos.items():
            ax.annotate(c, (x, y), textcoords="offset points", xytext=(6, 4), fontsize=9)
    if lambda_max is not None:
        ax.axhline(lambda_max, color="0.3", ls="--", lw=0.8)
        ax.text(len(contracts) - 0.5, lambda_max, "cap", va="bottom", ha="right", fontsize=8)
    ax.set_xticks(range(len(contracts)))
    ax.set_xticklabels(contracts)
    ax.set_xlim(-0.5, len(contracts) - 0.5 + 0.2)
    ax.set_ylabel("priority")
    ax.yaxis.set_major_locator(MaxNLocator(integer=True))
    ax.margins(y=0.15)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
