"""Matplotlib rendering of the curve tables. Figures are written to files only."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _style():
    plt.rcParams.update(
        {
            "font.size": 10,
            "axes.labelsize": 11,
            "axes.spines.top": False,
            "axes.spines.right": False,
            "savefig.dpi": 150,
            "savefig.bbox": "tight",
        }
    )


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_fock_panels(rows, path):
    _style()
    panels = sorted({r["panel"] for r in rows})
    fig, axes = plt.subplots(1, len(panels), figsize=(3.2 * len(panels), 2.8), sharey=True)
    for ax, panel in zip(axes, panels):
        sub = [r for r in rows if r["panel"] == panel]
        ax.bar([r["n"] for r in sub], [r["probability"] for r in sub], color="0.35", width=0.7)
        ax.set_title(f"({panel})  $\\eta_a$={sub[0]['eta_a']:g}, $|\\lambda|$={sub[0]['lambda_abs']:g}", fontsize=9)
        ax.set_xlabel("photon number n")
        ax.set_ylim(0, 1.05)
    axes[0].set_ylabel("P(n | k=1)")
    return _save(fig, path)


def plot_visibility(rows, path):
    _style()
    fig, ax = plt.subplots(figsize=(4, 3))
    ax.semilogx([r["s"] for r in rows], [r["visibility"] for r in rows], color="k")
    ax.set_xlabel(r"bandwidth ratio $s=\sigma_1/\sigma_2$")
    ax.set_ylabel("visibility V")
    ax.set_ylim(0, 1.02)
    return _save(fig, path)


def plot_mu_curve(rows, path, xlabel, reference=None):
    _style()
    fig, ax = plt.subplots(figsize=(4, 3))
    ax.plot([r["param"] for r in rows], [r["mu_star"] for r in rows], color="k")
    if reference is not None:
        ax.axhline(reference, color="0.5", ls="--", lw=0.8)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(r"optimal $\mu$")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 0.55)
    return _save(fig, path)
