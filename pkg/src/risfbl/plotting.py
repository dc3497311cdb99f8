"""Figures for aggregated sweeps, rendered off-screen with matplotlib."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .harness import series  # noqa: E402

AXIS_LABELS = {
    "alpha": r"weight $\alpha$",
    "ris_elements": "RIS elements N",
    "power": "total transmit power [W]",
    "csi_rho": r"CSI error $\rho$",
}
STYLE = {"optimized": ("C0", "o", "optimized phase"), "random_phase": ("C1", "s", "random phase")}


def plot_summary(summary, sweep: str, path, dpi: int = 150):
    """Two panels against the sweep value: total bits and total blocklength.

    Error bars are one standard error. The infinite-blocklength total of the
    optimized variant is drawn dashed on the rate panel for reference.
    """
    fig, (ax_l, ax_m) = plt.subplots(1, 2, figsize=(9, 3.6), constrained_layout=True)
    for variant in ("optimized", "random_phase"):
        x, mean, err = series(summary, variant, "L_fbl")
        if not len(x):
            continue
        color, marker, label = STYLE[variant]
        ax_l.errorbar(x, mean, yerr=err, color=color, marker=marker, capsize=3, label=label)
        x, mean, err = series(summary, variant, "m_total")
        ax_m.errorbar(x, mean, yerr=err, color=color, marker=marker, capsize=3, label=label)
    x, mean, _ = series(summary, "optimized", "L_shannon")
    if len(x):
        ax_l.plot(x, mean, color="C0", ls="--", lw=1, label="Shannon, optimized")

    xlabel = AXIS_LABELS.get(sweep, sweep)
    ax_l.set(xlabel=xlabel, ylabel="total bits")
    ax_m.set(xlabel=xlabel, ylabel="total channel uses")
    if sweep == "power":
        ax_l.set_xscale("log")
        ax_m.set_xscale("log")
    for ax in (ax_l, ax_m):
        ax.grid(alpha=0.3)
        ax.legend(frameon=False, fontsize="small")
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path
