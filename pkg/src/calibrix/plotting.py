"""Matplotlib renderings of section data, slice landscapes and sweeps."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

COLORS = ["tab:red", "tab:blue", "tab:green", "tab:purple", "tab:orange"]


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_section(figure, columns, rows, meta, path):
    fig, ax = plt.subplots(figsize=(6, 4.5))
    if figure == 1:
        y = rows[:, 0]
        for k in range(5):
            ax.fill_between(y, rows[:, 1 + 2 * k], rows[:, 2 + 2 * k], color=COLORS[k], alpha=0.5, label=f"A{k + 1}")
        ax.set_xlabel(columns[0])
        ax.set_ylabel("z")
        ax.set_title(f"regions over x = {meta['x']:.4g}")
        ax.legend(loc="best", fontsize=8)
    elif figure == 2:
        ax.quiver(rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3], angles="xy", color="tab:red")
        cx, cy = meta["center"]
        th = np.linspace(0, 2 * np.pi, 200)
        ax.plot(cx + meta["radius"] * np.cos(th), cy + meta["radius"] * np.sin(th), "k-", lw=0.8)
        for s in (-1, 1):
            ax.axhline(s * meta["delta"], color="gray", ls="--", lw=0.8)
        ax.set_aspect("equal")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.set_title(f"A1 at z = {meta['z']:.4g}")
    elif figure == 3:
        ax.fill_between(rows[:, 0], rows[:, 1], rows[:, 2], color=COLORS[1], alpha=0.5, label="A2")
        ax.set_xlabel(columns[0])
        ax.set_ylabel("z")
        ax2 = ax.twinx()
        ax2.plot(rows[:, 0], rows[:, 3], "k--", lw=0.8, label="normal flux")
        ax2.set_ylabel("normal component")
        ax.set_title(f"A2 over x = {meta['x']:.4g}")
    else:
        ax.plot(rows[:, 0], rows[:, 1], "k-")
        ax.fill(rows[:, 0], rows[:, 1], color="tab:blue", alpha=0.3)
        ax.set_aspect("equal")
        ax.set_xlabel("xi")
        ax.set_ylabel("eta")
        ax.set_title(f"T: top {meta['top_integral']:.6g}, left {meta['left_integral']:.6g}")
    return _save(fig, path)


def plot_d_landscape(gf, path, n=161):
    """``d`` over ``(s, t)`` on the jump line at ``u0``, relative to ``gamma^2``."""
    from .general_calibration import d_function

    u0 = gf.gp.u0
    s0, t0 = (float(v) for v in gf.jump_interval(u0))
    w = 4 * gf.gp.eps
    S, T = np.meshgrid(np.linspace(s0 - w, s0 + w, n), np.linspace(t0 - w, t0 + w, n))
    D = d_function(gf, u0, 0.0, S, T) / gf.frame.gamma(u0, 0.0) ** 2
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    im = ax.contourf(S, T, D, levels=30, cmap="viridis")
    ax.plot([s0], [t0], "r+", ms=12)
    fig.colorbar(im, ax=ax, label="d / gamma^2")
    ax.set_xlabel("s")
    ax.set_ylabel("t")
    ax.set_title(f"slice functional at (u, v) = ({u0:.4g}, 0)")
    return _save(fig, path)


def plot_margin(sweep, path):
    eps = np.array([r.eps for r in sweep.rows])
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.semilogx(eps, [r.ms_w for r in sweep.rows], "o-", label="MS(w)")
    ax.semilogx(eps, [r.ms_psi for r in sweep.rows], "s-", label="MS(psi_eps)")
    ax.semilogx(eps, [r.margin for r in sweep.rows], "k^--", label="margin")
    ax.axhline(0, color="gray", lw=0.6)
    if np.isfinite(sweep.threshold):
        ax.axvline(sweep.threshold, color="tab:red", ls=":", lw=0.8)
    ax.set_xlabel("eps")
    ax.legend(fontsize=8)
    return _save(fig, path)
