"""Shared value types: sampled paths, time windows, atomic measures, estimate reports.

All values are immutable after construction (arrays are marked read-only) and all
operations in this module are pure, so everything here can be shared freely
between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

PIECEWISE_LINEAR = "piecewise-linear"
CADLAG = "piecewise-constant-cadlag"
INTERPOLATIONS = (PIECEWISE_LINEAR, CADLAG)


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.float64)
    out.flags.writeable = False
    return out


def fmt(x) -> str:
    """Serialize a float with 17 significant digits, locale independent."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    xf = float(x)
    if math.isnan(xf):
        return "nan"
    if math.isinf(xf):
        return "inf" if xf > 0 else "-inf"
    return format(xf, ".17g")


def write_csv(path, header, rows) -> None:
    """Write rows of already-formatted or numeric cells with a header line."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else fmt(cell) for cell in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclass(frozen=True)
class TimeWindow:
    """A subinterval [t_start, t_end] of a path's time domain."""

    t_start: float
    t_end: float

    def __post_init__(self):
        if not (self.t_start >= 0.0 and np.isfinite(self.t_start) and np.isfinite(self.t_end)):
            raise ValueError("window endpoints must be finite and nonnegative")
        if not self.t_start < self.t_end:
            raise ValueError("window requires t_start < t_end")

    @property
    def length(self) -> float:
        return self.t_end - self.t_start


@dataclass(frozen=True)
class SampledPath:
    """A path on a uniform grid of ``[t0, t0 + T]`` with values in R^n.

    ``values`` has shape (N+1, n); sample i sits at time t0 + i*T/N.  The
    interpolation tag decides how off-grid evaluation works: piecewise-linear
    for continuous paths, right-continuous steps for cadlag (Levy) paths.
    """

    T: float
    values: np.ndarray
    interpolation: str = PIECEWISE_LINEAR
    t0: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.ndim != 2 or vals.shape[0] < 3:
            raise ValueError("need at least N >= 2 steps (3 samples)")
        if not np.all(np.isfinite(vals)):
            raise ValueError("path values must be finite")
        if not (np.isfinite(self.T) and self.T > 0):
            raise ValueError("T must be positive")
        if self.interpolation not in INTERPOLATIONS:
            raise ValueError(f"unknown interpolation tag {self.interpolation!r}")
        object.__setattr__(self, "values", _freeze(vals))

    @property
    def n_steps(self) -> int:
        return self.values.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def dt(self) -> float:
        return self.T / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.n_steps + 1) * self.dt

    @property
    def t_end(self) -> float:
        return self.t0 + self.T

    @property
    def x(self) -> np.ndarray:
        """Flat value array; only defined for scalar paths."""
        if self.dim != 1:
            raise ValueError("x is only defined for dim-1 paths")
        return self.values[:, 0]

    def domain(self) -> TimeWindow:
        return TimeWindow(self.t0, self.t0 + self.T)

    def evaluate(self, t: float) -> np.ndarray:
        """Evaluate at an arbitrary time per the interpolation tag."""
        s = (t - self.t0) / self.dt
        if s <= 0:
            return self.values[0]
        if s >= self.n_steps:
            return self.values[-1]
        i = int(math.floor(s))
        if self.interpolation == CADLAG:
            return self.values[i]
        w = s - i
        return (1.0 - w) * self.values[i] + w * self.values[i + 1]

    def with_values(self, values: np.ndarray) -> "SampledPath":
        return SampledPath(self.T, values, self.interpolation, self.t0)

    def decimate(self, step: int) -> "SampledPath":
        """Coarsen the grid by an integer factor (N must stay >= 2)."""
        if self.n_steps % step != 0:
            raise ValueError("decimation step must divide N")
        return SampledPath(self.T, self.values[::step], self.interpolation, self.t0)


def restrict(path: SampledPath, window: TimeWindow) -> SampledPath:
    """Restrict a path to a window, snapping endpoints to the nearest grid times."""
    dt = path.dt
    i0 = int(round((window.t_start - path.t0) / dt))
    i1 = int(round((window.t_end - path.t0) / dt))
    i0 = max(i0, 0)
    i1 = min(i1, path.n_steps)
    if i1 - i0 < 2:
        raise ValueError("window under-resolved")
    return SampledPath(
        T=(i1 - i0) * dt,
        values=path.values[i0 : i1 + 1],
        interpolation=path.interpolation,
        t0=path.t0 + i0 * dt,
    )


def path_diameter(path: SampledPath) -> float:
    """Largest distance between two sample values (exact over sample pairs)."""
    v = path.values
    if path.dim == 1:
        return float(v.max() - v.min())
    # the pairwise max is attained on the convex hull; fall back to brute
    # force for degenerate point sets
    pts = v
    if v.shape[0] > 64:
        try:
            from scipy.spatial import ConvexHull

            pts = v[ConvexHull(v).vertices]
        except Exception:
            pts = np.unique(v, axis=0)
    if pts.shape[0] > 4096:
        pts = pts[:: pts.shape[0] // 4096 + 1]
    diff = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt((diff**2).sum(axis=2)).max())


@dataclass(frozen=True)
class DiscreteMeasure:
    """A finite nonnegative measure on R^n given by weighted atoms.

    ``cell_width`` is the length scale at which an atom stands for mass
    spread over a cell; singular-kernel evaluations are regularized at this
    scale.
    """

    atoms: np.ndarray
    weights: np.ndarray
    cell_width: float

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=np.float64)
        if atoms.ndim == 1:
            atoms = atoms[:, None]
        weights = np.asarray(self.weights, dtype=np.float64).ravel()
        if atoms.shape[0] != weights.shape[0]:
            raise ValueError("atoms and weights must have matching length")
        if weights.size and weights.min() < 0:
            raise ValueError("weights must be nonnegative")
        if not np.all(np.isfinite(atoms)) or not np.all(np.isfinite(weights)):
            raise ValueError("atoms and weights must be finite")
        if not (np.isfinite(self.cell_width) and self.cell_width > 0):
            raise ValueError("cell_width must be positive")
        object.__setattr__(self, "atoms", _freeze(atoms))
        object.__setattr__(self, "weights", _freeze(weights))

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    @property
    def n_atoms(self) -> int:
        return self.atoms.shape[0]

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def support_diameter(self) -> float:
        if self.n_atoms == 0:
            return 0.0
        return float(np.sqrt(((self.atoms.max(axis=0) - self.atoms.min(axis=0)) ** 2).sum()))

    def scaled(self, c: float) -> "DiscreteMeasure":
        return DiscreteMeasure(self.atoms, c * self.weights, self.cell_width)

    def translated(self, shift) -> "DiscreteMeasure":
        shift = np.asarray(shift, dtype=np.float64).reshape(1, -1)
        return DiscreteMeasure(self.atoms + shift, self.weights, self.cell_width)


def empty_measure(dim: int, cell_width: float = 1.0) -> DiscreteMeasure:
    return DiscreteMeasure(np.zeros((0, dim)), np.zeros(0), cell_width)


@dataclass(frozen=True)
class EstimateReport:
    """A numerical value plus the discretization it was computed at.

    ``value`` may be +inf as a divergence sentinel where an operation's
    contract says so.  ``refinement_delta`` is |value(h) - value(h/2)| when a
    refinement pass was run.  ``notes`` carries operation-specific flags
    (verdicts, tail bounds, lower-bound markers).
    """

    value: float
    resolution: dict = field(default_factory=dict)
    refinement_delta: Optional[float] = None
    notes: dict = field(default_factory=dict)

    @property
    def is_divergent(self) -> bool:
        return not np.isfinite(self.value)


def growth_trend(sums, ratio: float = 1.08) -> bool:
    """True when a coarse-to-fine sequence of raw sums keeps growing.

    Used as the divergence verdict on refinement ladders: the continuum
    quantity is infinite exactly when the discrete sums grow without bound,
    so we flag sequences whose successive ratios all exceed ``ratio``.
    """
    sums = [float(s) for s in sums]
    if len(sums) < 2:
        return False
    if any(not np.isfinite(s) for s in sums):
        return True
    if any(s <= 0 for s in sums[:-1]):
        return False
    return all(b / a > ratio for a, b in zip(sums, sums[1:]))
