"""Figure rendering for campaign reports and threshold fits.

All functions write image files next to the delimited outputs; nothing is
shown interactively.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_fer(rows, path, label: str = "") -> None:
    """FER versus Eb/N0 on a log scale."""
    snr = [r.snr_db for r in rows]
    fer = [max(r.fer, 1e-12) for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(snr, fer, "o-", label=label or None)
    ax.set_xlabel("$E_b/N_0$, dB")
    ax.set_ylabel("FER")
    ax.grid(True, which="both", alpha=0.4)
    if label:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_complexity(rows, path, label: str = "") -> None:
    """Average iterations and arithmetic operations versus Eb/N0."""
    snr = [r.snr_db for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(snr, [max(r.avg_iterations, 1e-12) for r in rows], "o-", label="iterations")
    ax.semilogy(snr, [max(r.avg_summations, 1e-12) for r in rows], "s--", label="summations")
    ax.semilogy(snr, [max(r.avg_comparisons, 1e-12) for r in rows], "^--", label="comparisons")
    ax.set_xlabel("$E_b/N_0$, dB")
    ax.set_ylabel("average count per frame")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend(title=label or None)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_iteration_histogram(buckets, path, title: str = "") -> None:
    """Iteration-count distribution split by decode correctness."""
    if not buckets:
        return
    centers = [(lo + hi) / 2 for lo, hi, _, _ in buckets]
    ok = [c for _, _, c, _ in buckets]
    bad = [c for _, _, _, c in buckets]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.step(centers, ok, where="mid", label="correct")
    ax.step(centers, bad, where="mid", label="error")
    ax.set_xscale("log")
    ax.set_xlabel("iterations")
    ax.set_ylabel("frames")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_threshold_fit(inv_sigma2s, exact, params, path) -> None:
    """Exact early-termination thresholds against the fitted curve."""
    from .density import termination_threshold_approx

    inv = np.asarray(inv_sigma2s, dtype=np.float64)
    order = np.argsort(inv)
    inv = inv[order]
    exact = np.asarray(exact, dtype=np.float64)[order]
    approx = [termination_threshold_approx(params, 1.0 / v) for v in inv]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(inv, exact, "o", label="exact")
    ax.plot(inv, approx, "-", label="approximation")
    ax.set_xlabel(r"$1/\sigma^2$")
    ax.set_ylabel("threshold $T$")
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
