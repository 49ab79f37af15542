"""Figure rendering for the report path.

Every plot-data CSV an experiment emits is a two-column file; this module
renders each one to a PNG sibling with a fixed, dependency-light style.  The
CSVs remain the source of truth (the determinism contract covers them, not
the PNGs); figures are a convenience layer on top.
"""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

_STYLE = {
    "figure.figsize": (5.2, 3.4),
    "figure.dpi": 130,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
    "lines.linewidth": 1.2,
    "lines.markersize": 3.5,
}


def read_plotdata(csv_path):
    with open(csv_path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        xs, ys = [], []
        for row in reader:
            try:
                x, y = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                continue
            xs.append(x)
            ys.append(y)
    return header[:2], xs, ys


def render_plotdata(csv_path, png_path=None, loglog=False, title=None):
    """Render one two-column plot-data CSV to PNG; returns the PNG path."""
    if png_path is None:
        png_path = os.path.splitext(csv_path)[0] + ".png"
    (xlabel, ylabel), xs, ys = read_plotdata(csv_path)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        finite = [(x, y) for x, y in zip(xs, ys) if y == y and abs(y) != float("inf")]
        if finite:
            fx, fy = zip(*finite)
            if loglog and min(fx) > 0 and min(fy) > 0:
                ax.loglog(fx, fy, "o-")
            else:
                ax.plot(fx, fy, "o-")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        fig.savefig(png_path)
        plt.close(fig)
    return png_path


def render_all(directory):
    """Render every plotdata_*.csv in a directory; returns rendered paths."""
    out = []
    for name in sorted(os.listdir(directory)):
        if name.startswith("plotdata_") and name.endswith(".csv"):
            path = os.path.join(directory, name)
            loglog = "loglog" in name
            out.append(render_plotdata(path, loglog=loglog, title=name[len("plotdata_") : -4]))
    return out
