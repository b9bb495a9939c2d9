"""Figures written next to CLI reports (Agg backend, PNG files)."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_META = {"Software": None}


def _save(fig, directory, name):
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, name)
    fig.savefig(path, dpi=110, metadata=_META)
    plt.close(fig)
    return name


def residual_figure(rows: list[dict], keys: list[str], tol: float, directory: str, name: str,
                    title: str = "") -> str:
    """Per-sample residuals on a log scale, one marker series per key, with the tolerance line."""
    fig, ax = plt.subplots(figsize=(6.4, 3.8))
    floor = 1e-18
    for k in keys:
        ys = [max(float(r[k]), floor) for r in rows if r.get(k) is not None]
        if ys:
            ax.semilogy(range(len(ys)), ys, "o", ms=3, label=k)
    ax.axhline(tol, color="k", lw=0.8, ls="--", label=f"tol {tol:g}")
    ax.set_xlabel("sample")
    ax.set_ylabel("relative residual")
    ax.set_title(title)
    ax.legend(fontsize=7, loc="best")
    fig.tight_layout()
    return _save(fig, directory, name)


def trajectory_figure(traj, directory: str, name: str, other=None, title: str = "") -> str:
    """Real and imaginary parts of each coordinate against the parameter, plus the
    first two real coordinates as a planar curve."""
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(9, 3.8))
    for k in range(traj.dim):
        a1.plot(traj.s, traj.z[:, k].real, label=f"Re z{k + 1}")
        a1.plot(traj.s, traj.z[:, k].imag, ls=":", label=f"Im z{k + 1}")
    a1.set_xlabel("s")
    a1.legend(fontsize=7)
    x = traj.z[:, 0].real
    y = traj.z[:, 1].real if traj.dim > 1 else traj.z[:, 0].imag
    a2.plot(x, y, label=traj.metric)
    if other is not None:
        xo = other.z[:, 0].real
        yo = other.z[:, 1].real if other.dim > 1 else other.z[:, 0].imag
        a2.plot(xo, yo, ls="--", label=other.metric)
    a2.set_xlabel("Re z1")
    a2.set_ylabel("Re z2" if traj.dim > 1 else "Im z1")
    a2.set_aspect("equal", adjustable="datalim")
    a2.legend(fontsize=7)
    fig.suptitle(title)
    fig.tight_layout()
    return _save(fig, directory, name)


def flags_figure(values: dict, tol: float, directory: str, name: str, title: str = "") -> str:
    """Bar chart of aggregate residual maxima against the tolerance."""
    keys = sorted(k for k, v in values.items() if v is not None)
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    vals = [max(float(values[k]), 1e-18) for k in keys]
    ax.bar(np.arange(len(keys)), vals, color=["tab:green" if v < tol else "tab:red" for v in vals])
    ax.set_yscale("log")
    ax.axhline(tol, color="k", lw=0.8, ls="--")
    ax.set_xticks(np.arange(len(keys)))
    ax.set_xticklabels(keys, rotation=30, ha="right", fontsize=8)
    ax.set_title(title)
    fig.tight_layout()
    return _save(fig, directory, name)
