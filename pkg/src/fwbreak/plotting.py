"""SVG diagnostics figures for run artifacts."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .harness import RunArtifact  # noqa: E402

KINDS = ("norms", "slopes", "envelope", "profile_snapshots")

STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.fonttype": "path",
    "svg.hashsalt": "fwbreak",
}


def _figure(width=6.0):
    golden = (np.sqrt(5.0) - 1.0) / 2.0
    return plt.subplots(figsize=(width, width * golden))


def _norms(ax, art: RunArtifact):
    t = art.times
    for col, label in (("l2", r"$\|u\|_{L^2}$"), ("linf", r"$\|u\|_{L^\infty}$"),
                       ("uxx_l2", r"$\|u_{xx}\|_{L^2}$"), ("hs", r"$\|u\|_{H^s}$")):
        ax.plot(t, art.column(col), label=label)
    l2 = art.column("l2")
    if len(l2):
        ax.plot(t, np.exp(t) * l2[0], "k--", lw=0.8, label=r"$e^t \|u_0\|_{L^2}$")
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.legend()


def _slopes(ax, art: RunArtifact):
    t = art.times
    ax.plot(t, art.column("m1"), label=r"$m_1 = \min u_x$")
    ax.plot(t, art.column("m2"), label=r"$m_2 = \max u_x$")
    ax.axhline(0.0, color="k", lw=0.6)
    ax.set_xlabel("t")
    ax.set_ylabel("slope")
    ax.legend()


def _envelope(ax, art: RunArtifact):
    t = art.times
    M = art.column("m1") + 1.0 / 3.0
    M0 = art.report.M0
    neg = M < 0
    ax.plot(t[neg], 1.0 / M[neg], label=r"$1/M(t)$, $M = m_1 + 1/3$")
    if M0 < 0:
        tt = np.linspace(0.0, max(t.max() if len(t) else 0.0, 2.0 / (3.0 * abs(M0))), 200)
        ax.plot(tt, 1.0 / M0 + 1.5 * tt, "k--", lw=0.8, label=r"$1/M(0) + \frac{3}{2} t$")
        ax.axvline(2.0 / (3.0 * abs(M0)), color="r", lw=0.6, ls=":", label="predicted upper bound on T")
    ax.set_xlabel("t")
    ax.set_ylabel("1/M")
    ax.legend()


def _profiles(ax, art: RunArtifact):
    n = int(art.scenario["n"])
    x = np.arange(n) / n
    if art.snapshots is not None and len(art.snapshots.times):
        idx = np.unique(np.linspace(0, len(art.snapshots.times) - 1, 6).round().astype(int))
        for i in idx:
            u = np.fft.irfft(art.snapshots.coeffs[i] * n, n=n)
            ax.plot(x, u, label=f"t = {art.snapshots.times[i]:.4g}")
    else:
        for key, values in art.profiles.items():
            ax.plot(x, values, label=f"t = {float(key):.4g}")
    ax.set_xlabel("x")
    ax.set_ylabel("u")
    ax.legend()


_DRAW = {"norms": _norms, "slopes": _slopes, "envelope": _envelope, "profile_snapshots": _profiles}


def plot(artifact: RunArtifact, kind: str, path) -> None:
    """Write one line chart of ``kind`` to ``path`` as standalone SVG."""
    if kind not in _DRAW:
        raise ValueError(f"unknown plot kind {kind!r}; expected one of {', '.join(KINDS)}")
    with plt.rc_context(STYLE):
        fig, ax = _figure()
        try:
            _DRAW[kind](ax, artifact)
            ax.set_title(f"{artifact.scenario.get('name', '')}: {kind}")
            fig.tight_layout()
            fig.savefig(Path(path), format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
