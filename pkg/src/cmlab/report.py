"""CSV and figure emission shared by the command-line tools.

All floating output is full-precision scientific notation and rerunning a
command reproduces its files byte for byte (no timestamps).  Each CSV gets a
companion PNG rendered with the Agg backend unless plotting is disabled.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def write_csv(path, header: str, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [header] + list(rows)
    path.write_text("\n".join(lines) + "\n")
    return path


def save_figure(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_residual_table(results, path) -> Path:
    names = [r.name for r in results]
    residuals = [max(r.residual, 1e-18) for r in results]
    thresholds = [r.threshold for r in results]
    fig, ax = plt.subplots(figsize=(9, 0.28 * len(names) + 1.5))
    ypos = np.arange(len(names))
    colors = ["tab:blue" if r.passed else "tab:red" for r in results]
    ax.barh(ypos, residuals, color=colors, log=True, height=0.6)
    ax.plot(thresholds, ypos, "k|", markersize=8, label="threshold")
    ax.set_yticks(ypos, names, fontsize=7)
    ax.invert_yaxis()
    ax.set_xlabel("L2 residual")
    ax.set_title("identity residuals")
    ax.legend(loc="lower right", fontsize=7)
    return save_figure(fig, path)


def plot_diagnostics(records, path) -> Path:
    t = np.array([r.t for r in records])
    fig, axes = plt.subplots(2, 2, figsize=(9, 6), sharex=True)
    rel = lambda s: np.abs(np.array(s) - s[0]) / max(abs(s[0]), 1e-300)
    axes[0, 0].semilogy(t[1:], rel([r.mass for r in records])[1:] + 1e-18)
    axes[0, 0].set_title("relative mass drift")
    axes[0, 1].plot(t, [r.energy for r in records], label="polynomial")
    axes[0, 1].plot(t, [r.energy_sd for r in records], "--", label="self-dual")
    axes[0, 1].set_title("energy")
    axes[0, 1].legend(fontsize=7)
    axes[1, 0].semilogy(t, np.array([r.chirality for r in records]) + 1e-18)
    axes[1, 0].set_title("chirality defect")
    axes[1, 1].semilogy(t, np.array([r.scheme_residual for r in records]) + 1e-18)
    axes[1, 1].set_title("scheme residual per stride")
    for ax in axes[1]:
        ax.set_xlabel("t")
    return save_figure(fig, path)


def plot_track(points, pred=None, path=None) -> Path:
    t = np.array([p.t for p in points])
    lam = np.array([p.state.lam for p in points])
    b = np.array([p.state.b for p in points])
    ell = (b**2 + np.array([p.state.eta for p in points]) ** 2) / lam**3
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.2))
    axes[0].plot(t, lam, label="tracked")
    if pred is not None:
        axes[0].plot(pred[0], pred[1], "--", label="modulation law")
        axes[0].legend(fontsize=7)
    axes[0].set_title("scale")
    axes[1].plot(t, b)
    axes[1].set_title("b")
    axes[2].plot(t, ell)
    axes[2].set_title("(b^2+eta^2)/lambda^3")
    for ax in axes:
        ax.set_xlabel("t")
    return save_figure(fig, path)


def plot_slopes(reports, path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 4))
    for rep in reports:
        ax.loglog(rep.radii, rep.values, "o-",
                  label=f"{rep.norm_name}: slope {rep.slope:+.3f} "
                        f"(expect {rep.expected:+.1f})")
    ax.set_xlabel("window radius R")
    ax.set_ylabel("norm of gauge-image difference")
    ax.legend(fontsize=7)
    return save_figure(fig, path)


def plot_scan(rows, path) -> Path:
    eta0 = sorted({r.eta0 for r in rows})
    nu0 = sorted({r.nu0 for r in rows})
    lam_min = np.full((len(eta0), len(nu0)), np.nan)
    for r in rows:
        lam_min[eta0.index(r.eta0), nu0.index(r.nu0)] = r.lam_min
    fig, ax = plt.subplots(figsize=(5.5, 4))
    pcm = ax.pcolormesh(nu0, eta0, np.log10(lam_min), shading="nearest")
    fig.colorbar(pcm, ax=ax, label="log10 min scale")
    ax.set_xlabel("nu0")
    ax.set_ylabel("eta0")
    ax.set_title("rotational instability scan")
    return save_figure(fig, path)
