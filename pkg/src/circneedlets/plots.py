"""Figure rendering for the CLI report paths (PNG files next to the CSVs)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 150


def _finish(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_weight_figure(xs, ws, s, path):
    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    ax.plot(xs, ws, lw=1.5)
    ax.axvline(s, color="0.6", ls=":", lw=1.0)
    ax.set_xlabel("x")
    ax.set_ylabel(f"w_{s}(x)")
    ax.set_title(f"weight function, s={s}")
    _finish(fig, path)


def save_needlet_figure(theta, values, spec, path):
    fig, ax = plt.subplots(figsize=(5.5, 3.2))
    ax.plot(theta, values, lw=1.0)
    ax.axhline(0.0, color="0.7", lw=0.8)
    ax.set_xlabel("theta")
    ax.set_ylabel("psi(theta)")
    ax.set_title(f"needlet: B={spec.params.B}, s={spec.params.s}, j={spec.j}")
    _finish(fig, path)


def save_histogram_grid(samples, path, bins=25):
    """Panel of per-cell histograms with the standard normal overlay."""
    keys = sorted(samples.keys())
    ncol = min(3, len(keys))
    nrow = (len(keys) + ncol - 1) // ncol
    fig, axes = plt.subplots(nrow, ncol, figsize=(3.2 * ncol, 2.6 * nrow), squeeze=False)
    grid = np.linspace(-4, 4, 200)
    normal = np.exp(-grid ** 2 / 2) / np.sqrt(2 * np.pi)
    for ax, key in zip(axes.ravel(), keys):
        v = samples[key].column(0)
        ax.hist(v, bins=bins, density=True, color="#7aa6c2", edgecolor="white")
        ax.plot(grid, normal, "k-", lw=1.0)
        t, j = key
        ax.set_title(f"t={t}, j={j}", fontsize=9)
    for ax in axes.ravel()[len(keys):]:
        ax.axis("off")
    _finish(fig, path)


def save_rate_figure(cells, slope, intercept, B, path):
    x = np.array([B ** float(-j) * R for j, R, _ in cells])
    y = np.array([w1 for _, _, w1 in cells])
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.loglog(x, y, "o", ms=4, alpha=0.8)
    xs = np.linspace(np.log(x.min()), np.log(x.max()), 50)
    ax.loglog(np.exp(xs), np.exp(slope * xs + intercept), "k--", lw=1.0,
              label=f"fit slope {slope:.3f}")
    ax.set_xlabel("effective sample size B^-j R_t")
    ax.set_ylabel("empirical W1 to N(0,1)")
    ax.legend(fontsize=8)
    _finish(fig, path)


def save_estimate_figure(theta, fhat, truth, path):
    fig, ax = plt.subplots(figsize=(5.5, 3.4))
    ax.plot(theta, truth, "k-", lw=1.2, label="truth")
    ax.plot(theta, fhat, "-", color="#c25b4e", lw=1.0, label="estimate")
    ax.set_xlabel("theta")
    ax.set_ylabel("density (w.r.t. rho)")
    ax.legend(fontsize=8)
    _finish(fig, path)


def save_bounds_figure(reports, path):
    xs = [r.rate_term for r in reports]
    ys = [r.wasserstein_rhs for r in reports]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.loglog(xs, ys, "o", ms=4)
    ax.set_xlabel("(B^-j R_t)^{-1/2}")
    ax.set_ylabel("Wasserstein bound value")
    _finish(fig, path)
