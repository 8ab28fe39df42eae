"""Report figures.  Uses the non-interactive Agg backend; figures go to files only."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 1.4,
    "lines.markersize": 4,
    "savefig.dpi": 150,
}


def plot_ner_sweep(sweep, path, title: str | None = None) -> None:
    """NER against grammar size for baseline and learned lexicons."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 2.6))
        ax.plot(sweep.sizes, [r.ner for r in sweep.base], "o-", label="baseline")
        if sweep.learned:
            ax.plot(sweep.sizes, [r.ner for r in sweep.learned], "s-", label="learned")
        ax.set_xlabel("grammar size G")
        ax.set_ylabel("NER (%)")
        ax.set_ylim(bottom=0)
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def plot_confusion(m, path) -> None:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 5.4))
        im = ax.imshow(m.cost, cmap="viridis_r")
        ticks = range(len(m.inventory))
        ax.set_xticks(ticks, m.inventory.symbols, rotation=90, fontsize=6)
        ax.set_yticks(ticks, m.inventory.symbols, fontsize=6)
        ax.set_xlabel("recognized phoneme")
        ax.set_ylabel("true phoneme")
        fig.colorbar(im, ax=ax, shrink=0.8, label="substitution cost")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
