"""Figure rendering for sweep results.

Writes one spectral-efficiency-vs-axis figure per sweep: median per mode
with a 10th-90th percentile band, plus a secondary panel with the feasible
fraction. Uses the Agg backend so it works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .harness import SweepResult  # noqa: E402

__all__ = ["render_sweep_figure"]

AXIS_LABELS = {
    "edge_coverage_m": "cell-edge coverage distance (m)",
    "rho": "fading correlation coefficient",
    "beta": "non-head bandwidth share",
    "cluster_size": "users per cluster",
    "n_tx": "transmit antennas",
}

MODE_STYLE = {
    "proposed": dict(color="tab:blue", marker="o"),
    "conventional": dict(color="tab:orange", marker="s"),
    "oma": dict(color="tab:green", marker="^"),
}


def render_sweep_figure(result: SweepResult, path: str) -> None:
    """Render the sweep to an image file (format from the extension)."""
    values = [p.value for p in result.points]
    fig, (ax_se, ax_feas) = plt.subplots(
        2, 1, figsize=(6.0, 6.0), sharex=True,
        gridspec_kw={"height_ratios": [3, 1]},
    )

    for mode in result.config.modes:
        style = MODE_STYLE.get(mode, {})
        p50 = [p.stats[mode].p50 for p in result.points]
        p10 = [p.stats[mode].p10 for p in result.points]
        p90 = [p.stats[mode].p90 for p in result.points]
        ax_se.plot(values, p50, label=mode, **style)
        ax_se.fill_between(values, p10, p90, alpha=0.15,
                           color=style.get("color"))
        ax_feas.plot(
            values,
            [p.stats[mode].feasible_frac for p in result.points],
            **style,
        )

    ax_se.set_ylabel("spectral efficiency (bits/s/Hz)")
    ax_se.legend()
    ax_se.grid(True, alpha=0.3)
    ax_feas.set_ylabel("feasible fraction")
    ax_feas.set_ylim(-0.05, 1.05)
    ax_feas.grid(True, alpha=0.3)
    ax_feas.set_xlabel(AXIS_LABELS.get(result.sweep_axis, result.sweep_axis))
    fig.suptitle(
        f"{result.trials} trials per point, seed {result.master_seed}",
        fontsize=10,
    )
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
