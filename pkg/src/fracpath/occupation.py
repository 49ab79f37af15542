"""Occupation measures of sampled paths, local-time estimates, regularity exponents.

The occupation measure of a path over a window is discretized as weight-dt
atoms at the sampled values (left-endpoint Riemann rule), which makes the
occupation-time formula exact on grid functions: sum_atoms g(atom) * weight
equals dt * sum_i g(X_{t_i}) identically.  Spatial smoothing happens only
inside estimators, never in the measure itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    PIECEWISE_LINEAR,
    DiscreteMeasure,
    EstimateReport,
    SampledPath,
    TimeWindow,
    fmt,
    restrict,
)


def _median_nn_distance(points: np.ndarray) -> float:
    """Median nearest-neighbour distance among distinct points (0 if < 2 points)."""
    pts = np.unique(points, axis=0)
    if pts.shape[0] < 2:
        return 0.0
    if pts.shape[1] == 1:
        x = np.sort(pts[:, 0])
        gaps = np.diff(x)
        nn = np.minimum(np.concatenate([[np.inf], gaps]), np.concatenate([gaps, [np.inf]]))
        return float(np.median(nn))
    from scipy.spatial import cKDTree

    d, _ = cKDTree(pts).query(pts, k=2)
    return float(np.median(d[:, 1]))


def occupation_measure(path: SampledPath, window: TimeWindow | None = None) -> DiscreteMeasure:
    """Occupation measure of the path over a window (whole domain by default).

    Atoms at the sampled values with weight dt each, duplicates merged; total
    mass equals the snapped window length exactly.  ``cell_width`` records the
    median nearest-neighbour distance of the atoms as the data-driven scale
    for kernel regularization downstream.
    """
    sub = path if window is None else restrict(path, window)
    vals = sub.values[:-1]  # left endpoints
    atoms, inverse = np.unique(vals, axis=0, return_inverse=True)
    weights = np.bincount(inverse.ravel(), minlength=atoms.shape[0]).astype(float) * sub.dt
    cw = _median_nn_distance(atoms)
    if cw <= 0.0:
        cw = max(1e-12, 1e-9 * (1.0 + float(np.abs(atoms).max(initial=0.0))))
    return DiscreteMeasure(atoms, weights, cw)


def ball_mass(measure: DiscreteMeasure, x, r: float) -> float:
    """Mass of the open ball B(x, r)."""
    if r <= 0:
        raise ValueError("radius must be positive")
    if measure.n_atoms == 0:
        return 0.0
    x = np.asarray(x, dtype=float).reshape(1, -1)
    d2 = ((measure.atoms - x) ** 2).sum(axis=1)
    return float(measure.weights[d2 < r * r].sum())


def ball_mass_profile(measure: DiscreteMeasure, x, radii: np.ndarray) -> np.ndarray:
    """mu(B(x, r)) for a whole grid of radii at once (sorted-distance sweep)."""
    if measure.n_atoms == 0:
        return np.zeros(len(radii))
    x = np.asarray(x, dtype=float).reshape(1, -1)
    d = np.sqrt(((measure.atoms - x) ** 2).sum(axis=1))
    order = np.argsort(d)
    d_sorted = d[order]
    cum = np.concatenate([[0.0], np.cumsum(measure.weights[order])])
    idx = np.searchsorted(d_sorted, np.asarray(radii, dtype=float), side="left")
    return cum[idx]


def upper_regularity_exponent(measure: DiscreteMeasure, centers, r_grid) -> EstimateReport:
    """Slope of log sup_centers mu(B(x, r)) against log r over dyadic radii.

    Estimates the largest d such that mu(B(x, r)) <= c r^d holds across the
    tested centers; radii should stay well above ``cell_width``.
    """
    radii = np.asarray(sorted(float(r) for r in r_grid))
    if len(radii) < 3:
        raise ValueError("r_grid must span at least 3 scales")
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    sup = np.zeros(len(radii))
    for x in centers:
        sup = np.maximum(sup, ball_mass_profile(measure, x, radii))
    if sup.max() == 0.0:
        raise ValueError("all ball masses are zero on the tested grid")
    good = sup > 0
    if good.sum() < 2:
        slope = 0.0
    else:
        slope = float(np.polyfit(np.log(radii[good]), np.log(sup[good]), 1)[0])
    return EstimateReport(
        value=slope,
        resolution={"r_min": radii[0], "r_max": radii[-1], "n_centers": len(centers)},
        notes={"cell_width": measure.cell_width},
    )


@dataclass(frozen=True)
class LocalTimeEstimate:
    """Histogram density of an occupation measure on an axis-aligned grid."""

    bin_centers: np.ndarray  # (M, n)
    density_values: np.ndarray  # (M,)
    bin_width: float

    @property
    def dim(self) -> int:
        return self.bin_centers.shape[1]

    def integral(self) -> float:
        return float(self.density_values.sum() * self.bin_width**self.dim)

    def to_csv(self, file) -> None:
        header = [f"center_{j + 1}" for j in range(self.dim)] + ["density"]
        with open(file, "w", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for c, d in zip(self.bin_centers, self.density_values):
                fh.write(",".join([fmt(v) for v in c] + [fmt(d)]) + "\n")


def local_time_histogram(measure: DiscreteMeasure, bin_width: float) -> LocalTimeEstimate:
    """Histogram local-time estimate: mass per bin divided by bin volume.

    Mass conservation is exact: the densities integrate back to the total
    mass.  The histogram (rather than a kernel estimator) keeps divergence
    diagnostics sharp when no L^1 density exists.  Bin widths above twice the
    measure's cell_width give meaningful densities; dimensions above 3 are
    refused (histogram memory).
    """
    n = measure.dim
    if n > 3:
        raise ValueError("dimension too large for histogram local times")
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    if measure.n_atoms == 0:
        return LocalTimeEstimate(np.zeros((0, n)), np.zeros(0), bin_width)
    lo = measure.atoms.min(axis=0)
    hi = measure.atoms.max(axis=0)
    n_bins = np.maximum(np.ceil((hi - lo) / bin_width - 1e-12).astype(int), 1)
    edges = [lo[j] + bin_width * np.arange(n_bins[j] + 1) for j in range(n)]
    hist, _ = np.histogramdd(measure.atoms, bins=edges, weights=measure.weights)
    centers_1d = [e[:-1] + bin_width / 2.0 for e in edges]
    mesh = np.meshgrid(*centers_1d, indexing="ij")
    centers = np.stack([m.ravel() for m in mesh], axis=1)
    density = hist.ravel() / bin_width**n
    return LocalTimeEstimate(centers, density, bin_width)


def exact_local_time_pl(path: SampledPath, y: float) -> float:
    """Local time of a piecewise-linear scalar path at level y: sum of 1/|slope|
    over the segments crossing the level.

    Levels tying with a sample value are nudged by 1e-9 times the smallest
    segment rise (crossing counts are a.e. constant in y, so ties are
    measure-zero artifacts).  A flat segment sitting at the level is an error:
    local times exist only when the path spends no time at zero slope.
    """
    if path.dim != 1:
        raise ValueError("exact local time requires a scalar path")
    if path.interpolation != PIECEWISE_LINEAR:
        raise ValueError("exact local time requires the piecewise-linear tag")
    v = path.x
    rises = np.diff(v)
    flat = rises == 0.0
    if np.any(flat):
        fv = v[:-1][flat]
        if np.any(fv == y):
            raise ValueError(f"plateau at level {y}")
    nonzero = np.abs(rises[~flat])
    if nonzero.size == 0:
        raise ValueError(f"plateau at level {y}")
    if np.any(v == y):
        y = y + float(nonzero.min()) * 1e-9
    left = v[:-1] - y
    right = v[1:] - y
    crossing = left * right < 0.0
    slopes = rises / path.dt
    return float(np.sum(1.0 / np.abs(slopes[crossing])))
