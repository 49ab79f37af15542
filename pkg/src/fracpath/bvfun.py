"""Closed-form BV function families with exact gradient measures.

Every family here has an analytic total-variation measure and an explicit
precise representative, so they can serve as oracles for everything computed
downstream; arbitrary grid BV data would contaminate those tests.  The
representative uses the symmetric-mean convention on the approximate
discontinuity set and flags such evaluations, letting callers confirm
empirically that the convention never matters on paths that are variable
enough.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import DiscreteMeasure
from .occupation import ball_mass_profile
from .potential import riesz_constant, riesz_potential_many

KINDS = (
    "indicator_interval",
    "staircase",
    "indicator_box",
    "indicator_ball",
    "smooth_bump",
    "riesz_kernel_kind",
)


class RepValue(NamedTuple):
    value: float
    on_singular_set: bool


@dataclass(frozen=True)
class BVFunction:
    kind: str
    dim: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown BV kind {self.kind!r}")

    # constructors -----------------------------------------------------------
    @staticmethod
    def indicator_interval(a: float, b: float) -> "BVFunction":
        if not a < b:
            raise ValueError("need a < b")
        return BVFunction("indicator_interval", 1, {"a": float(a), "b": float(b)})

    @staticmethod
    def staircase(locations, heights) -> "BVFunction":
        locations = tuple(float(x) for x in locations)
        heights = tuple(float(h) for h in heights)
        if len(locations) != len(heights) or not locations:
            raise ValueError("locations and heights must match and be nonempty")
        if any(b <= a for a, b in zip(locations, locations[1:])):
            raise ValueError("jump locations must be strictly increasing")
        return BVFunction("staircase", 1, {"locations": locations, "heights": heights})

    @staticmethod
    def indicator_box(lo, hi) -> "BVFunction":
        lo = tuple(float(v) for v in np.atleast_1d(lo))
        hi = tuple(float(v) for v in np.atleast_1d(hi))
        if len(lo) != len(hi) or any(b <= a for a, b in zip(lo, hi)):
            raise ValueError("need lo < hi componentwise")
        return BVFunction("indicator_box", len(lo), {"lo": lo, "hi": hi})

    @staticmethod
    def indicator_ball(center, radius: float) -> "BVFunction":
        center = tuple(float(v) for v in np.atleast_1d(center))
        if radius <= 0:
            raise ValueError("radius must be positive")
        return BVFunction("indicator_ball", len(center), {"center": center, "radius": float(radius)})

    @staticmethod
    def smooth_bump(center, radius: float, height: float = 1.0) -> "BVFunction":
        center = tuple(float(v) for v in np.atleast_1d(center))
        if radius <= 0:
            raise ValueError("radius must be positive")
        return BVFunction(
            "smooth_bump", len(center), {"center": center, "radius": float(radius), "height": float(height)}
        )

    @staticmethod
    def riesz_kernel_kind(gamma: float, dim: int, cutoff_radius: float = 4.0) -> "BVFunction":
        if dim < 2 or not 1.0 < gamma < dim:
            raise ValueError("riesz kernel family needs n >= 2 and 1 < gamma < n")
        return BVFunction("riesz_kernel_kind", dim, {"gamma": float(gamma), "cutoff": float(cutoff_radius)})

    def scaled(self, c: float) -> "BVFunction":
        """c * phi within the same family (indicator kinds become staircases if needed)."""
        if self.kind == "staircase":
            return BVFunction.staircase(self.params["locations"], [c * h for h in self.params["heights"]])
        if self.kind == "indicator_interval":
            a, b = self.params["a"], self.params["b"]
            return BVFunction.staircase([a, b], [c, -c])
        if self.kind == "smooth_bump":
            p = self.params
            return BVFunction.smooth_bump(p["center"], p["radius"], c * p["height"])
        raise ValueError(f"scaling not implemented for kind {self.kind!r}")


# evaluation ------------------------------------------------------------------


def evaluate_representative_many(phi: BVFunction, points: np.ndarray):
    """Precise representative at many points: (values, on_singular_set flags).

    Off the discontinuity set this is the pointwise closed form; on it the
    symmetric mean (equality is tested exactly; hits are grid coincidences,
    which is what the flag is for).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    k = phi.kind
    if k == "indicator_interval":
        x = pts[:, 0]
        a, b = phi.params["a"], phi.params["b"]
        on_s = (x == a) | (x == b)
        vals = np.where((x > a) & (x < b), 1.0, 0.0)
        vals = np.where(on_s, 0.5, vals)
        return vals, on_s
    if k == "staircase":
        x = pts[:, 0]
        locs = np.array(phi.params["locations"])
        hts = np.array(phi.params["heights"])
        vals = (x[:, None] > locs[None, :]) @ hts
        on_s = np.isin(x, locs)
        if on_s.any():
            half = (x[on_s][:, None] == locs[None, :]) @ hts / 2.0
            vals[on_s] += half
        return vals, on_s
    if k == "indicator_box":
        lo = np.array(phi.params["lo"])
        hi = np.array(phi.params["hi"])
        inside = np.all((pts > lo) & (pts < hi), axis=1)
        closure = np.all((pts >= lo) & (pts <= hi), axis=1)
        on_s = closure & ~inside
        return np.where(inside, 1.0, 0.0) + np.where(on_s, 0.5, 0.0), on_s
    if k == "indicator_ball":
        c = np.array(phi.params["center"])
        r = phi.params["radius"]
        d = np.sqrt(((pts - c) ** 2).sum(axis=1))
        on_s = d == r
        return np.where(d < r, 1.0, 0.0) + np.where(on_s, 0.5, 0.0), on_s
    if k == "smooth_bump":
        c = np.array(phi.params["center"])
        r = phi.params["radius"]
        h = phi.params["height"]
        u = ((pts - c) ** 2).sum(axis=1) / r**2
        vals = np.where(u < 1.0, h * (1.0 - np.minimum(u, 1.0)) ** 2, 0.0)
        return vals, np.zeros(len(pts), dtype=bool)
    if k == "riesz_kernel_kind":
        g = phi.params["gamma"]
        n = phi.dim
        d = np.sqrt((pts**2).sum(axis=1))
        on_s = d == 0.0
        with np.errstate(divide="ignore"):
            vals = np.where(on_s, np.inf, riesz_constant(g, n) * d ** (g - n))
        return vals, on_s
    raise ValueError(k)


def evaluate_representative(phi: BVFunction, x) -> RepValue:
    vals, flags = evaluate_representative_many(phi, np.asarray(x, dtype=float).reshape(1, -1))
    return RepValue(float(vals[0]), bool(flags[0]))


def smooth_bump_gradient(phi: BVFunction, points: np.ndarray) -> np.ndarray:
    c = np.array(phi.params["center"])
    r = phi.params["radius"]
    h = phi.params["height"]
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    u = ((pts - c) ** 2).sum(axis=1) / r**2
    grad = -4.0 * h * np.clip(1.0 - u, 0.0, None)[:, None] * (pts - c) / r**2
    return grad


# gradient measures -----------------------------------------------------------


def _sphere_points(dim: int, n_points: int) -> np.ndarray:
    if dim == 1:
        return np.array([[-1.0], [1.0]])
    if dim == 2:
        th = (np.arange(n_points) + 0.5) * (2.0 * math.pi / n_points)
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    # Fibonacci lattice: equal-area patches with centroid atoms
    i = np.arange(n_points) + 0.5
    phi_g = math.pi * (3.0 - math.sqrt(5.0))
    z = 1.0 - 2.0 * i / n_points
    rho = np.sqrt(1.0 - z**2)
    th = phi_g * i
    return np.stack([rho * np.cos(th), rho * np.sin(th), z], axis=1)


def gradient_measure(phi: BVFunction, resolution: float = 2.0**-6) -> DiscreteMeasure:
    """Total-variation measure of the gradient as weighted atoms.

    One-dimensional jump families and box/interval endpoints are exact;
    curved boundaries carry equal-area surface patches of size ~h^(n-1); the
    differentiable families discretize |grad phi| h^n on a grid of spacing h.
    """
    h = float(resolution)
    if h <= 0:
        raise ValueError("resolution must be positive")
    k = phi.kind
    if k == "indicator_interval":
        a, b = phi.params["a"], phi.params["b"]
        return DiscreteMeasure(np.array([[a], [b]]), np.array([1.0, 1.0]), min(h, (b - a) / 2.0))
    if k == "staircase":
        locs = np.array(phi.params["locations"])[:, None]
        hts = np.abs(np.array(phi.params["heights"]))
        gap = np.diff(locs[:, 0]).min() / 2.0 if len(locs) > 1 else h
        return DiscreteMeasure(locs, hts, min(h, gap))
    if k == "indicator_box":
        lo = np.array(phi.params["lo"])
        hi = np.array(phi.params["hi"])
        n = phi.dim
        if n == 1:
            return DiscreteMeasure(np.array([[lo[0]], [hi[0]]]), np.array([1.0, 1.0]), h)
        atoms, weights = [], []
        for axis in range(n):
            others = [j for j in range(n) if j != axis]
            axes = [lo[j] + (np.arange(max(1, int(np.ceil((hi[j] - lo[j]) / h)))) + 0.5)
                    * (hi[j] - lo[j]) / max(1, int(np.ceil((hi[j] - lo[j]) / h))) for j in others]
            mesh = np.meshgrid(*axes, indexing="ij") if axes else []
            base = np.stack([m.ravel() for m in mesh], axis=1) if axes else np.zeros((1, 0))
            patch = np.prod([(hi[j] - lo[j]) / max(1, int(np.ceil((hi[j] - lo[j]) / h))) for j in others]) if others else 1.0
            for face_val in (lo[axis], hi[axis]):
                pts = np.empty((base.shape[0], n))
                pts[:, others] = base
                pts[:, axis] = face_val
                atoms.append(pts)
                weights.append(np.full(base.shape[0], patch))
        return DiscreteMeasure(np.vstack(atoms), np.concatenate(weights), h)
    if k == "indicator_ball":
        c = np.array(phi.params["center"])
        r = phi.params["radius"]
        n = phi.dim
        if n == 1:
            return DiscreteMeasure(np.array([c - r, c + r]).reshape(2, 1), np.array([1.0, 1.0]), h)
        per = surface_measure_of_sphere(n, r)
        m = max(8, int(math.ceil(per / h**(n - 1))))
        pts = c[None, :] + r * _sphere_points(n, m)
        return DiscreteMeasure(pts, np.full(pts.shape[0], per / pts.shape[0]), h)
    if k == "smooth_bump":
        c = np.array(phi.params["center"])
        r = phi.params["radius"]
        n = phi.dim
        axes = [c[j] - r + (np.arange(int(np.ceil(2 * r / h))) + 0.5) * h for j in range(n)]
        mesh = np.meshgrid(*axes, indexing="ij")
        grid = np.stack([m.ravel() for m in mesh], axis=1)
        g = np.sqrt((smooth_bump_gradient(phi, grid) ** 2).sum(axis=1))
        keep = g > 0
        return DiscreteMeasure(grid[keep], g[keep] * h**n, h)
    if k == "riesz_kernel_kind":
        g = phi.params["gamma"]
        rc = phi.params["cutoff"]
        n = phi.dim
        c = riesz_constant(g, n)
        axes = [-rc + (np.arange(int(np.ceil(2 * rc / h))) + 0.5) * h for _ in range(n)]
        mesh = np.meshgrid(*axes, indexing="ij")
        grid = np.stack([m.ravel() for m in mesh], axis=1)
        d = np.sqrt((grid**2).sum(axis=1))
        keep = (d > 0) & (d <= rc)
        # |grad k_gamma|(x) = c (n - gamma) |x|^(gamma - n - 1), integrable near 0 since gamma > 1
        gv = c * (n - g) * d[keep] ** (g - n - 1.0)
        return DiscreteMeasure(grid[keep], gv * h**n, h)
    raise ValueError(k)


def surface_measure_of_sphere(n: int, r: float) -> float:
    from .potential import surface_area

    return surface_area(n) * r ** (n - 1)


def total_variation(phi: BVFunction, resolution: float = 2.0**-6) -> float:
    return gradient_measure(phi, resolution).total_mass


# potentials and maximal functions ---------------------------------------------


def maximal_function(measure: DiscreteMeasure, gamma: float, x, r_grid=None) -> float:
    """Fractional maximal function: the largest r^(gamma - n) mu(B(x, r)) over the grid."""
    n = measure.dim
    if not 0.0 < gamma < n:
        raise ValueError("need 0 < gamma < dim")
    if measure.n_atoms == 0:
        return 0.0
    x = np.asarray(x, dtype=float).ravel()
    if r_grid is None:
        d_max = float(np.sqrt(((measure.atoms - x.reshape(1, -1)) ** 2).sum(axis=1)).max())
        hi = 2.0 * max(measure.support_diameter(), d_max, measure.cell_width)
        r_grid = np.geomspace(measure.cell_width, hi, 128)
    else:
        r_grid = np.asarray(sorted(float(r) for r in r_grid))
    masses = ball_mass_profile(measure, x, r_grid)
    return float((r_grid ** (gamma - n) * masses).max())


EXACT_ATOM_KINDS = ("indicator_interval", "staircase")


def gradient_potential_many(
    phi: BVFunction,
    s: float,
    points: np.ndarray,
    gm: DiscreteMeasure | None = None,
    resolution: float = 2.0**-6,
) -> np.ndarray:
    """Riesz potential of order 1-s of the gradient measure at many points.

    Jump families have exactly atomic gradient measures, so they are
    evaluated with the exact kernel (the continuum potential genuinely blows
    up approaching a jump; atom hits give the +inf sentinel).  The families
    whose atoms are quadrature cells for a density or surface measure keep
    the cell-average regularization: their continuum potentials are not
    singular at individual quadrature atoms.
    """
    n = phi.dim
    if not 0.0 < 1.0 - s < n:
        raise ValueError("need 1 - s in (0, dim)")
    if gm is None:
        gm = gradient_measure(phi, resolution)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    rho = 0.0 if phi.kind in EXACT_ATOM_KINDS else None
    return riesz_potential_many(gm, 1.0 - s, pts, rho=rho)


def gradient_potential(
    phi: BVFunction,
    s: float,
    x,
    gm: DiscreteMeasure | None = None,
    resolution: float = 2.0**-6,
) -> float:
    return float(
        gradient_potential_many(phi, s, np.asarray(x, dtype=float).reshape(1, -1), gm, resolution)[0]
    )
