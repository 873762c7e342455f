"""Figure rendering for the CLI report path.

Every plot function takes already-computed data and writes a PNG next to the
delimited output. The Agg backend is forced so the CLI works headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .analysis import WignerGrid  # noqa: E402
from .measurement import SampleBatch  # noqa: E402


def plot_samples(batch: SampleBatch, path: str | Path, max_points: int = 20000) -> None:
    """Scatter of the sample cloud with accepted points highlighted."""
    fig, ax = plt.subplots(figsize=(5, 5))
    stride = max(1, len(batch) // max_points)
    xs, ps, acc = batch.xs[::stride], batch.ps[::stride], batch.accepted[::stride]
    ax.scatter(xs[~acc], ps[~acc], s=2, c="0.75", label="rejected", rasterized=True)
    if acc.any():
        ax.scatter(xs[acc], ps[acc], s=4, c="crimson", label="accepted",
                   rasterized=True)
    ax.set_xlabel("x")
    ax.set_ylabel("p")
    ax.set_aspect("equal")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title(f"heterodyne samples (accept rate {batch.acceptance_rate:.2e})")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_wigner(grid: WignerGrid, path: str | Path) -> None:
    """Phase-space heat map with a symmetric diverging color scale."""
    fig, ax = plt.subplots(figsize=(5.5, 5))
    vmax = float(np.abs(grid.values).max()) or 1.0
    im = ax.pcolormesh(grid.x_axis, grid.p_axis, grid.values.T, cmap="RdBu_r",
                       vmin=-vmax, vmax=vmax, shading="nearest")
    fig.colorbar(im, ax=ax, label="W(x, p)")
    ax.set_xlabel("x")
    ax.set_ylabel("p")
    ax.set_aspect("equal")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_scan(re: np.ndarray, im: np.ndarray, fid: np.ndarray, baseline: float,
              path: str | Path) -> None:
    """Fidelity against |alpha| (line when the scan is a ray, dots otherwise)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    mag = np.hypot(re, im)
    order = np.argsort(mag)
    ax.plot(mag[order], np.asarray(fid)[order], "o-", ms=3, lw=1,
            label="photon-added state")
    ax.axhline(baseline, ls=":", c="k", label=f"best Gaussian ({baseline:.3f})")
    ax.set_xlabel("|alpha|")
    ax.set_ylabel("orbit fidelity")
    ax.set_ylim(0, 1.02)
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_photon_stats(probs: np.ndarray, islands: list[tuple[int, int]],
                      path: str | Path,
                      reference: np.ndarray | None = None) -> None:
    """Log-scale bar chart of p_n; island spans shaded, optional reference bars."""
    ns = np.arange(len(probs))
    fig, ax = plt.subplots(figsize=(6.5, 4))
    ax.bar(ns, probs, width=0.8, color="firebrick", label="state")
    if reference is not None:
        ax.bar(np.arange(len(reference)), -np.asarray(reference), width=0.8,
               color="steelblue", label="reference (inverted)")
    for lo, hi in islands:
        ax.axvspan(lo - 0.5, hi + 0.5, color="gold", alpha=0.15)
    floor = max(probs[probs > 0].min() if (probs > 0).any() else 1e-12, 1e-12)
    ax.set_yscale("symlog", linthresh=floor)
    ax.set_xlabel("photon number n")
    ax.set_ylabel("p(n)")
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_phase_sweep(phases: np.ndarray, fidelities: np.ndarray,
                     labels: list[str], path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(phases, fidelities, "o-", ms=4)
    for ph, f, lab in zip(phases, fidelities, labels):
        ax.annotate(lab, (ph, f), textcoords="offset points", xytext=(0, 8),
                    ha="center", fontsize=8)
    ax.set_xlabel("phase of alpha (rad)")
    ax.set_ylabel("orbit fidelity")
    ax.set_ylim(0, 1.05)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_populations(probs: np.ndarray, path: str | Path) -> None:
    """Linear bar chart of reconstructed photon-number populations."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(np.arange(len(probs)), probs, width=0.8, color="steelblue")
    ax.set_xlabel("photon number n")
    ax.set_ylabel("population")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
