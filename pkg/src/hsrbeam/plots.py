"""Figure rendering for the CLI report path (PNG files next to the CSVs)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed metadata keeps reruns byte-identical
_META = {"Software": None}

LABELS = {
    "fba": "FBA",
    "gamma_greedy": r"$\gamma$-greedy",
    "qlearning": "Q-learning",
    "dqn": "DQN",
    "dqn16": "16 beams-DQN",
}

rc = {
    "figure.figsize": (7.0, 4.0),
    "figure.dpi": 100,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
    "legend.fontsize": 8,
    "lines.linewidth": 1.2,
}


def _save(fig, path, subtitle: str | None):
    if subtitle:
        fig.text(0.99, 0.01, subtitle, ha="right", va="bottom", fontsize=6, color="0.4")
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)


def rsp_comparison(curves: dict, path, rrh_offset_m: float | None = None,
                   subtitle: str | None = None, zoom: tuple[float, float] | None = None):
    """RSP against rail position, one line per agent.

    ``curves`` maps agent name to ``(positions_m, rsp_dbm)``.
    """
    with plt.rc_context(rc):
        fig, ax = plt.subplots()
        for name, (x, y) in curves.items():
            ax.plot(x, y, label=LABELS.get(name, name))
        if rrh_offset_m is not None:
            ax.axvline(rrh_offset_m, color="0.5", ls=":", lw=0.8)
        if zoom:
            ax.set_xlim(*zoom)
        ax.set_xlabel("position on the railway (m)")
        ax.set_ylabel("RSP (dBm)")
        ax.legend(loc="best")
        _save(fig, path, subtitle)


def cycle_stats(stats, path, title: str = "", subtitle: str | None = None):
    with plt.rc_context(rc):
        fig, axes = plt.subplots(3, 1, figsize=(7.0, 8.0), sharex=True)
        x = stats.positions_m
        axes[0].plot(x, stats.mean)
        axes[0].set_ylabel("mean gap (dB)")
        axes[1].plot(x, stats.std, color="C1")
        axes[1].set_ylabel("std of gap (dB)")
        axes[2].fill_between(x, stats.ci_low, stats.ci_high, color="C2", alpha=0.4, lw=0)
        axes[2].plot(x, stats.mean, color="C2", lw=0.8)
        axes[2].set_ylabel("95% CI (dB)")
        axes[2].set_xlabel("position on the railway (m)")
        if title:
            axes[0].set_title(title)
        _save(fig, path, subtitle)


def training_curve(returns, path, title: str = "", subtitle: str | None = None):
    with plt.rc_context(rc):
        fig, ax = plt.subplots()
        ax.plot(range(1, len(returns) + 1), returns, lw=0.8)
        ax.set_xlabel("episode")
        ax.set_ylabel("episode return (dB)")
        if title:
            ax.set_title(title)
        _save(fig, path, subtitle)
