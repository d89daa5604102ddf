"""Figure rendering for the report-style subcommands.

Figures are written next to the delimited output when the CLI is invoked
with --plot. Matplotlib is imported lazily (Agg backend) so library users
who never plot do not pay for the import.
"""

from __future__ import annotations

import numpy as np

__all__ = ["density_figure", "disc_model_figure"]


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def density_figure(report, path: str) -> str:
    """Hit scatter in the parameter disc plus covering-radius decay."""
    plt = _pyplot()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10.5, 4.6))

    theta = np.linspace(0.0, 2.0 * np.pi, 256)
    ax1.plot(np.cos(theta), np.sin(theta), color="0.4", lw=1.0)
    ax1.plot(0.9 * np.cos(theta), 0.9 * np.sin(theta), color="0.8",
             lw=0.8, ls="--")
    if report.hits.size:
        ax1.scatter(report.hits.real, report.hits.imag, s=4.0, alpha=0.5,
                    color="tab:blue", linewidths=0)
    ax1.set_aspect("equal")
    ax1.set_xlim(-1.05, 1.05)
    ax1.set_ylim(-1.05, 1.05)
    ax1.set_title(f"hit parameters ({report.hits.size} distinct)")
    ax1.set_xlabel("Re t")
    ax1.set_ylabel("Im t")

    hs = [r.height for r in report.rows]
    ax2.plot(hs, [r.covering_radius for r in report.rows], "o-",
             color="tab:red", label="covering radius")
    ax2.set_xscale("log", base=2)
    ax2.set_yscale("log")
    ax2.set_xlabel("height bound H")
    ax2.set_ylabel("covering radius")
    ax2b = ax2.twinx()
    ax2b.plot(hs, [r.n_hits for r in report.rows], "s--",
              color="tab:blue", label="hits")
    ax2b.set_yscale("log")
    ax2b.set_ylabel("distinct hits")
    ax2.set_title("divisor hits filling the disc")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def disc_model_figure(a_grid, b_grid, margin, path: str) -> str:
    """Positivity margin of the disc chart over the (a, b) square.

    ``margin`` holds the smallest eigenvalue of the restricted form; the
    zero contour is the boundary circle a^2 + b^2 = 1.
    """
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.4, 4.6))
    im = ax.pcolormesh(a_grid, b_grid, margin, shading="auto",
                       cmap="RdBu", vmin=-np.max(np.abs(margin)),
                       vmax=np.max(np.abs(margin)))
    theta = np.linspace(0.0, 2.0 * np.pi, 256)
    ax.plot(np.cos(theta), np.sin(theta), color="k", lw=1.0)
    ax.set_aspect("equal")
    ax.set_xlabel("a")
    ax.set_ylabel("b")
    ax.set_title("restricted-form margin on the disc chart")
    fig.colorbar(im, ax=ax, label="min eigenvalue")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
