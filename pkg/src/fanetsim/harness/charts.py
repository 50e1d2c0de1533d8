"""PDR, E2E and overhead versus attacker ratio, one series per attack."""

from __future__ import annotations

import logging
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

log = logging.getLogger(__name__)

METRICS = (("pdr", "PDR", "pdr_vs_ratio.svg"),
           ("e2e", "E2E delay (s)", "e2e_vs_ratio.svg"),
           ("overhead", "Overhead", "overhead_vs_ratio.svg"))


def _series(aggregates):
    """{nodes: {label: [(ratio, cell), ...]}} with the baseline as ratio 0 of each attack."""
    cells = list(aggregates)
    out: dict[int, dict[str, list]] = {}
    baselines = {c.nodes: c for c in cells if c.attack == "none"}
    for c in cells:
        if c.attack == "none":
            continue
        label = c.attack if c.placement == "random" else f"{c.attack} ({c.placement})"
        out.setdefault(c.nodes, {}).setdefault(label, []).append((c.ratio, c))
    for n, series in out.items():
        for label, pts in series.items():
            if n in baselines:
                pts.append((0.0, baselines[n]))
            pts.sort(key=lambda p: p[0])
    return out


def emit_charts(aggregates, out_dir) -> list[str]:
    series = _series(aggregates)
    if not series:
        log.warning("no attack cells to chart; nothing written")
        return []
    os.makedirs(out_dir, exist_ok=True)
    densities = sorted(series)
    paths = []
    for attr, ylabel, fname in METRICS:
        fig, axes = plt.subplots(1, len(densities), figsize=(5.5 * len(densities), 4), squeeze=False)
        for ax, n in zip(axes[0], densities):
            for label, pts in sorted(series[n].items()):
                xs = [100 * r for r, _ in pts]
                ys = [getattr(c, attr) * (100 if attr == "pdr" else 1) for _, c in pts]
                ax.plot(xs, ys, marker="o", label=label)
            ax.set_title(f"{n} nodes")
            ax.set_xlabel("Attacker ratio (%)")
            ax.set_ylabel(ylabel + (" (%)" if attr == "pdr" else ""))
            ax.grid(alpha=0.3)
            ax.legend(fontsize=8)
        fig.tight_layout()
        path = os.path.join(out_dir, fname)
        fig.savefig(path, format="svg")
        plt.close(fig)
        paths.append(path)
    return paths
