"""Figure rendering for run artifacts (PNG files next to the CSVs)."""

from __future__ import annotations

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = [
    "plot_norm_series",
    "plot_energy_fractions",
    "plot_sweep",
    "plot_frames_heatmap",
    "plot_bisection",
]

_FIGSIZE = (7.0, 4.2)


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_norm_series(times, sup_norms, path, inverse=True, title=""):
    """Inverse (or direct) sup-norm history; blowup shows as 1/norm -> 0."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    y = np.asarray(sup_norms, dtype=float)
    if inverse:
        with np.errstate(divide="ignore"):
            ax.plot(times, np.where(y > 0, 1.0 / y, np.nan), lw=0.8)
        ax.set_ylabel(r"$1/\|u(t)\|_{L^\infty}$")
    else:
        ax.plot(times, y, lw=0.8)
        ax.set_ylabel(r"$\|u(t)\|_{L^\infty}$")
    ax.set_xlabel("t")
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_energy_fractions(times, fractions, path, title=""):
    fractions = np.asarray(fractions)
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for n in range(fractions.shape[1]):
        ax.plot(times, fractions[:, n], lw=0.8, label=rf"$E_{{{n}}}$")
    ax.set_xlabel("t")
    ax.set_ylabel(r"$E_n(t)$")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(ncol=3, fontsize=8)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_sweep(rows, path, title=""):
    """Trapping entry time and max norm against the family parameter."""
    A = np.array([r.A for r in rows])
    trap = np.array([r.trap_time if r.trap_time is not None else np.nan
                     for r in rows])
    mx = np.array([r.max_norm for r in rows])
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True)
    ax1.plot(A, trap, ".", ms=3)
    ax1.set_ylabel("trapping entry time")
    ax2.semilogy(A, mx, ".", ms=3)
    ax2.set_ylabel(r"max $\|u\|_{L^\infty}$")
    ax2.set_xlabel("A")
    if title:
        ax1.set_title(title)
    return _save(fig, path)


def plot_frames_heatmap(frames, out_dir, stem="frames", title=""):
    """Re/Im heatmaps of U over (s, y) from a list of SelfSimilarFrame."""
    frames = sorted(frames, key=lambda fr: fr.s)
    s = np.array([fr.s for fr in frames])
    y = frames[0].y_grid
    U = np.array([fr.U_values for fr in frames])
    paths = []
    for part, label in ((np.real, "re"), (np.imag, "im")):
        fig, ax = plt.subplots(figsize=_FIGSIZE)
        pc = ax.pcolormesh(s, y, part(U).T, shading="auto", cmap="RdBu_r")
        fig.colorbar(pc, ax=ax, label=f"{label.capitalize()} U")
        ax.set_xlabel("s")
        ax.set_ylabel("y")
        if title:
            ax.set_title(title)
        paths.append(_save(fig, os.path.join(out_dir, f"{stem}_{label}.png")))
    return paths


def plot_bisection(history, path, title=""):
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for i, (A, fate, t, _) in enumerate(history):
        ax.plot(i, A, "^r" if fate == "blowup" else
                ("vb" if fate == "decay" else "ok"), ms=5)
    ax.set_xlabel("probe index")
    ax.set_ylabel("A")
    if title:
        ax.set_title(title)
    return _save(fig, path)
