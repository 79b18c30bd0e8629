"""QFI-versus-photon-number figures."""

from __future__ import annotations

import math
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "noon": dict(color="tab:blue", marker="o", label="NOON"),
    "coherent": dict(color="tab:red", marker="^", label="coherent"),
    "king": dict(color="tab:green", marker="*", markersize=9, label="King"),
}
LINESTYLE = {"forward": "-", "reverse": "--"}


def figure_size(width: float = 4.8):
    golden = (math.sqrt(5) - 1) / 2
    return width, width * golden


def emit_plot(rows, path, title: str | None = None) -> Path:
    """QFI vs average photon number, one curve per ``(probe, order)``.

    Only rows with status ``ok`` and a finite QFI are drawn.  Raises
    ``ValueError`` (and writes nothing) when no such row is left.
    """
    curves = defaultdict(list)
    for row in rows:
        if row.status == "ok" and math.isfinite(row.qfi):
            curves[(row.probe, row.order)].append((row.n, row.qfi))
    if not curves:
        raise ValueError("no plottable rows (all rows failed, unavailable or filtered out)")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=figure_size())
    try:
        for (probe, order), pts in sorted(curves.items()):
            pts.sort()
            style = dict(STYLE.get(probe, dict(marker="s", label=probe)))
            label = style.pop("label")
            if len({o for _, o in curves}) > 1:
                label = f"{label} ({order})"
            xs, ys = zip(*pts)
            ax.plot(xs, ys, linestyle=LINESTYLE.get(order, ":"), label=label, **style)
        ax.set_xlabel(r"average photon number $\langle n \rangle$")
        ax.set_ylabel(r"QFI $\mathcal{F}_Q$")
        if title:
            ax.set_title(title, fontsize=10)
        ax.spines["right"].set_visible(False)
        ax.spines["top"].set_visible(False)
        ax.legend(frameon=False, fontsize=8)
        fig.tight_layout()
        fmt = path.suffix.lstrip(".").lower() or "svg"
        # no timestamp, fixed id salt: identical data gives identical files
        meta = {"Date": None} if fmt == "svg" else None
        with plt.rc_context({"svg.hashsalt": "polarqfi"}):
            fig.savefig(path, format=fmt, metadata=meta)
    finally:
        plt.close(fig)
    return path
