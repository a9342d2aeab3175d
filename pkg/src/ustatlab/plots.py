"""Figure rendering for convergence reports.

The converge report path writes a PNG next to the CSV: replicate
trajectories with their limits, the error summaries against sample size,
and (for mixtures) a histogram of terminal values split by latent
component.  Rendering uses the Agg backend so it works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .diagnostics import ConvergenceReport

__all__ = ["render_report_figure"]

_MAX_TRAJECTORIES = 60


def render_report_figure(report: ConvergenceReport, file_path: str) -> None:
    mixture = report.clusters is not None
    ncols = 3 if mixture else 2
    fig, axes = plt.subplots(1, ncols, figsize=(4.6 * ncols, 3.6))

    ax = axes[0]
    shown = min(report.replicates, _MAX_TRAJECTORIES)
    for r in range(shown):
        ax.plot(report.checkpoints, report.u_values[r], color="steelblue", alpha=0.25, lw=0.8)
    for value in sorted({round(est.value, 12) for est in report.limits}):
        ax.axhline(value, color="crimson", ls="--", lw=1.0)
    ax.set_xscale("log")
    ax.set_xlabel("sample size n")
    ax.set_ylabel("U-statistic")
    ax.set_title(f"{shown}/{report.replicates} replicate trajectories")

    ax = axes[1]
    ax.plot(report.checkpoints, report.lp_errors, "o-", label=f"L^{report.p:g} error")
    ax.plot(report.checkpoints, report.max_abs_errors, "s-", label="max |U - limit|")
    ax.set_xscale("log")
    positive = np.concatenate([report.lp_errors, report.max_abs_errors])
    if np.all(positive > 0):
        ax.set_yscale("log")
    ax.set_xlabel("sample size n")
    ax.set_ylabel("error")
    ax.legend(fontsize=8)
    ax.set_title("error vs sample size")

    if mixture:
        ax = axes[2]
        terminal = report.terminal_values()
        latent = np.asarray([-1 if c is None else c for c in report.latent_components])
        for cluster in report.clusters:
            vals = terminal[latent == cluster.component]
            if vals.size:
                ax.hist(vals, bins=20, alpha=0.6, label=f"component {cluster.component}")
            ax.axvline(cluster.limit_value, color="crimson", ls="--", lw=1.0)
        ax.set_xlabel(f"terminal U (n = {report.checkpoints[-1]})")
        ax.set_ylabel("replicates")
        ax.legend(fontsize=8)
        ax.set_title("terminal values by component")

    fig.suptitle(f"{report.kernel_name} on {report.process_id}", fontsize=9)
    fig.tight_layout()
    fig.savefig(file_path, dpi=150)
    plt.close(fig)
