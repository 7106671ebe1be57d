"""Static log-log scatter of sweep results."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from phase_app.harness import ScalingFit  # noqa: E402


def plot_scaling(fits: list[ScalingFit], path: str | Path, title: str = "Scaling of the estimation error") -> None:
    """Mean delta against N with 95% intervals and each fitted power law, written as SVG."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for fit in fits:
        N = np.array([p.N for p in fit.points], dtype=float)
        mean = np.array([p.mean_delta for p in fit.points])
        low = np.array([p.ci_low for p in fit.points])
        high = np.array([p.ci_high for p in fit.points])
        line = ax.errorbar(N, mean, yerr=[mean - np.maximum(low, mean * 1e-3), high - mean],
                           fmt="o", ms=4, capsize=2, label=f"{fit.label} ({fit.exponent:+.3f})")
        ax.plot(N, np.exp(fit.intercept) * N**fit.exponent, "-", lw=1, color=line[0].get_color())
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("particles N")
    ax.set_ylabel("mean error delta")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
