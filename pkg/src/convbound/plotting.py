"""
Matplotlib figures written as SVG next to the CSV outputs.

Figures are for people; tests check the CSV numbers. SVG output is made
reproducible (fixed element ids, no embedded date) and an optional timestamp
comment is the only varying line.
"""

from __future__ import annotations

import datetime as _dt
import io
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (7.0, 4.3),
    "font.size": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "convbound",
    "svg.fonttype": "none",
}


def _save(fig, path, timestamp: bool) -> str:
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    text = buf.getvalue()
    if timestamp:
        stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        head, sep, rest = text.partition("?>\n")
        text = f"{head}{sep}<!-- generated {stamp} -->\n{rest}" if sep else f"<!-- generated {stamp} -->\n{text}"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return os.fspath(path)


def histogram_figure(probs, path, title="", timestamp=True, cuts=()):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        n = np.arange(len(probs))
        ax.bar(n, probs, width=1.0, color="0.35", linewidth=0)
        for c in cuts:
            ax.axvline(c - 0.5, color="tab:red", lw=1, ls="--")
        ax.set_xlabel("photon count")
        ax.set_ylabel("probability")
        ax.set_title(title)
        return _save(fig, path, timestamp)


def overlay_figure(original, regenerated, path, title="", timestamp=True):
    """Original histogram (black) against the re-convolved ion pair (red)."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(np.arange(len(original)), original, color="black", lw=1.2, label="original")
        ax.plot(np.arange(len(regenerated)), regenerated, color="tab:red", lw=1.0, label="regenerated")
        ax.set_xlabel("photon count")
        ax.set_ylabel("probability")
        ax.set_title(title)
        ax.legend(frameon=False)
        return _save(fig, path, timestamp)


def ions_figure(g, h, path, title="", timestamp=True):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(np.arange(len(g)), g, color="tab:blue", label="ion 1")
        ax.plot(np.arange(len(h)), h, color="tab:green", label="ion 2")
        ax.set_xlabel("photon count")
        ax.set_ylabel("probability")
        ax.set_title(title)
        ax.legend(frameon=False)
        return _save(fig, path, timestamp)


def heatmap_figure(p, path, title="", timestamp=True, cuts=()):
    """Joint density with ion 1 on the vertical axis; anti-diagonal cuts dashed."""
    p = np.asarray(p)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.5, 5.0))
        shown = np.where(p > 0, p, np.nan)
        im = ax.imshow(shown, origin="lower", cmap="viridis", interpolation="nearest")
        size = p.shape[0]
        for c in cuts:
            ax.plot([c, 0], [0, c], color="white", lw=0.8, ls="--")
        ax.set_xlim(-0.5, size - 0.5)
        ax.set_ylim(-0.5, size - 0.5)
        ax.set_xlabel("ion 2 count")
        ax.set_ylabel("ion 1 count")
        ax.set_title(title)
        fig.colorbar(im, ax=ax, shrink=0.8)
        return _save(fig, path, timestamp)


def bars_figure(labels, values, path, title="", ylabel="r", timestamp=True):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        x = np.arange(len(labels))
        ax.bar(x, values, color=["tab:red" if v < 0 else "tab:blue" for v in values])
        ax.axhline(0, color="black", lw=0.6)
        ax.set_xticks(x)
        ax.set_xticklabels(labels, rotation=30, ha="right")
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        fig.tight_layout()
        return _save(fig, path, timestamp)


def line_figure(x, y, path, xlabel="", ylabel="", title="", timestamp=True, logy=False):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(x, y, color="black", lw=1.0)
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        return _save(fig, path, timestamp)
