"""Figures written next to the CSV reports.

matplotlib is imported lazily so the library and the non-report commands
work without it.
"""

from __future__ import annotations

from pathlib import Path


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _finish(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    _pyplot().close(fig)
    return path


def ratio_histogram(ratios_by_policy: dict, bounds: dict, path, title="Worst equilibrium / optimum"):
    """One panel per policy: histogram of per-instance ratios with the proven bound."""
    plt = _pyplot()
    names = list(ratios_by_policy)
    fig, axes = plt.subplots(1, len(names), figsize=(3.2 * len(names), 3.0), squeeze=False)
    for ax, name in zip(axes[0], names):
        values = [float(r) for r in ratios_by_policy[name] if r is not None]
        ax.hist(values, bins=20, color="0.55", edgecolor="k", linewidth=0.4)
        if name in bounds:
            ax.axvline(bounds[name], color="C3", linestyle="--", label=f"bound {bounds[name]:.3f}")
            ax.legend(fontsize=7, frameon=False)
        ax.set_title(name, fontsize=9)
        ax.set_xlabel("ratio", fontsize=8)
        ax.tick_params(labelsize=7)
    axes[0][0].set_ylabel("instances", fontsize=8)
    fig.suptitle(title, fontsize=10)
    return _finish(fig, path)


def trend(series: dict, path, xlabel: str, ylabel: str = "ratio", targets: dict | None = None,
          title: str = ""):
    """Line plot of ``{label: (xs, ys)}`` with optional horizontal target lines."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    for k, (label, (xs, ys)) in enumerate(series.items()):
        ax.plot(xs, [float(y) for y in ys], marker="o", markersize=3, color=f"C{k}", label=label)
        if targets and label in targets:
            ax.axhline(float(targets[label]), color=f"C{k}", linestyle=":", linewidth=1)
    ax.set_xlabel(xlabel, fontsize=9)
    ax.set_ylabel(ylabel, fontsize=9)
    if title:
        ax.set_title(title, fontsize=10)
    ax.legend(fontsize=7, frameon=False)
    ax.tick_params(labelsize=8)
    return _finish(fig, path)
