"""Riesz kernels, potentials and energies, Wolff potentials, negative-order norms.

Normalization.  The kernel of order gamma is k_gamma(x) = c(gamma, n) |x|^(gamma-n)
with

    c(gamma, n) = Gamma((n - gamma)/2) / (pi^(n/2) 2^gamma Gamma(gamma/2)),

the unique constant for which the semigroup identity
k_{g1} * k_{g2} = k_{g1+g2} holds with a plain (unnormalized) convolution.
Under this choice int k_gamma(x) e^(-i x.xi) dx = |xi|^(-gamma), so with the
unitary transform used elsewhere in this package the kernel transforms to
(2 pi)^(-n/2) |xi|^(-gamma); the Plancherel cross-checks in the Fourier module
rely on exactly this bookkeeping.  The constant is validated in the test suite
by the convolution check below, not trusted from transcription.

Regularization.  A point x closer than cell_width/2 to an atom sees the
kernel's average over the ball of that radius,

    kbar_gamma(rho) = c(gamma, n) * (n / gamma) * rho^(gamma - n),

which preserves the integrability behaviour of the continuum object (plain
truncation would bias energies low).

Divergence is reported as a +inf sentinel with a diagnostic note, never as an
exception: several callers expect divergence at integrability boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DiscreteMeasure, EstimateReport

_POINT_CHUNK = 1 << 22  # pairwise-distance budget per chunk
NEAR_FIELD_TREND = 0.15  # dx-halving growth that flags a divergent integrand


def riesz_constant(gamma: float, n: int) -> float:
    """c(gamma, n), pinned by the convolution semigroup property."""
    if not 0.0 < gamma < n:
        raise ValueError("need 0 < gamma < n")
    return math.gamma((n - gamma) / 2.0) / (math.pi ** (n / 2.0) * 2.0**gamma * math.gamma(gamma / 2.0))


def surface_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@dataclass(frozen=True)
class KernelSpec:
    gamma: float
    dim: int
    normalization: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.gamma < self.dim:
            raise ValueError("need 0 < gamma < dim")
        if self.normalization <= 0.0:
            object.__setattr__(self, "normalization", riesz_constant(self.gamma, self.dim))


@dataclass(frozen=True)
class WeightSpec:
    """Either the unit weight or the radial power w(x) = |x|^(exponent - n)."""

    kind: str = "unit"
    exponent: float = 0.0

    def __post_init__(self):
        if self.kind not in ("unit", "radial_power"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "radial_power" and self.exponent <= 0.0:
            raise ValueError("radial_power weight needs a positive exponent")


def riesz_kernel(spec: KernelSpec, x) -> float:
    """k_gamma(x); +inf at the origin."""
    r = float(np.sqrt(np.sum(np.asarray(x, dtype=float) ** 2)))
    if r == 0.0:
        return math.inf
    return spec.normalization * r ** (spec.gamma - spec.dim)


def regularized_kernel_values(d: np.ndarray, gamma: float, n: int, rho: float) -> np.ndarray:
    """Kernel at distances d with cell-average value inside radius rho."""
    c = riesz_constant(gamma, n)
    out = np.empty_like(d)
    near = d < rho
    with np.errstate(divide="ignore"):
        out[~near] = c * d[~near] ** (gamma - n)
    out[near] = c * (n / gamma) * rho ** (gamma - n)
    return out


def riesz_potential_many(
    measure: DiscreteMeasure, gamma: float, points: np.ndarray, rho: float | None = None
) -> np.ndarray:
    """U^gamma mu at many points, with the cell-average regularization.

    ``rho`` overrides the regularization radius (default cell_width/2); pass
    0.0 for the exact kernel, where coinciding points give the +inf sentinel.
    That is the right evaluation for measures whose atoms are exact (jump
    measures) rather than quadrature cells.
    """
    n = measure.dim
    if not 0.0 < gamma < n:
        raise ValueError("need 0 < gamma < dim")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if measure.n_atoms == 0:
        return np.zeros(pts.shape[0])
    if rho is None:
        rho = measure.cell_width / 2.0
    out = np.empty(pts.shape[0])
    chunk = max(1, _POINT_CHUNK // max(measure.n_atoms, 1))
    c = riesz_constant(gamma, n)
    for lo in range(0, pts.shape[0], chunk):
        block = pts[lo : lo + chunk]
        d = np.sqrt(((block[:, None, :] - measure.atoms[None, :, :]) ** 2).sum(axis=2))
        if rho > 0.0:
            k = regularized_kernel_values(d, gamma, n, rho)
        else:
            with np.errstate(divide="ignore"):
                k = c * d ** (gamma - n)
        out[lo : lo + chunk] = k @ measure.weights
    return out


def riesz_potential(measure: DiscreteMeasure, gamma: float, x) -> float:
    return float(riesz_potential_many(measure, gamma, np.asarray(x, dtype=float).reshape(1, -1))[0])


def default_box(measure: DiscreteMeasure, pad: float | None = None):
    """Axis-aligned box around the support, margin at least one support diameter."""
    if measure.n_atoms == 0:
        lo = np.zeros(measure.dim)
        hi = np.zeros(measure.dim)
    else:
        lo = measure.atoms.min(axis=0)
        hi = measure.atoms.max(axis=0)
    if pad is None:
        pad = max(float((hi - lo).max(initial=0.0)), 8.0 * measure.cell_width, 0.5)
    return lo - pad, hi + pad


def _box_grid(lo: np.ndarray, hi: np.ndarray, dx: float):
    axes = []
    for j in range(len(lo)):
        m = max(1, int(math.ceil((hi[j] - lo[j]) / dx - 1e-12)))
        axes.append(lo[j] + dx * (np.arange(m) + 0.5))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _energy_once(measure, gamma, q, lo, hi, dx, weight_fn=None) -> float:
    """Riemann sum of (U^gamma mu)^q (optionally times a weight) over the ball
    inscribed in the box, plus the analytic power tail outside it."""
    n = measure.dim
    center = (lo + hi) / 2.0
    r0 = float((hi - lo).min()) / 2.0
    grid = _box_grid(lo, hi, dx)
    inside = np.sqrt(((grid - center) ** 2).sum(axis=1)) <= r0
    grid = grid[inside]
    u = riesz_potential_many(measure, gamma, grid)
    integrand = u**q
    if weight_fn is not None:
        integrand = integrand * weight_fn(grid)
    value = float(integrand.sum()) * dx**n

    mass = measure.total_mass
    if mass > 0.0:
        c = riesz_constant(gamma, n)
        expo = (n - gamma) * q - n  # tail decay beyond r0
        if weight_fn is None:
            if expo <= 0.0:
                return math.inf
            value += (c * mass) ** q * surface_area(n) * r0 ** (-expo) / expo
        else:
            # caller supplies tail_exponent via attribute; see weighted comparison
            texp = getattr(weight_fn, "tail_exponent", None)
            if texp is None or texp <= 0.0:
                return math.inf
            tail_amp = (c * mass) ** q * getattr(weight_fn, "tail_amplitude", 1.0)
            value += tail_amp * surface_area(n) * r0 ** (-texp) / texp
    return value


def energy(
    measure: DiscreteMeasure,
    gamma: float,
    q: float,
    box=None,
    dx: float | None = None,
    weight_fn=None,
) -> EstimateReport:
    """(gamma, q)-energy of mu: the integral of (U^gamma mu)^q over space.

    Computed on an explicit box with the tail added analytically: beyond the
    inscribed ball the potential is the pure power c * mass * r^(gamma - n) up
    to the support's angular spread, so the dominant truncation error is
    removed rather than estimated.  Returns +inf when q (n - gamma) <= n, the
    integrability boundary where the tail diverges.
    """
    n = measure.dim
    if not 0.0 < gamma < n:
        raise ValueError("need 0 < gamma < dim")
    if q < 1.0:
        raise ValueError("need q >= 1")
    if measure.n_atoms == 0:
        return EstimateReport(0.0, {"dx": dx, "n_atoms": 0})
    lo, hi = box if box is not None else default_box(measure)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if dx is None:
        dx = max(measure.cell_width / 4.0, float((hi - lo).max()) / 512.0)
    v = _energy_once(measure, gamma, q, lo, hi, dx, weight_fn)
    if not np.isfinite(v):
        return EstimateReport(
            math.inf,
            {"dx": dx},
            notes={"reason": "tail divergence: q(n - gamma) <= n", "divergent": True},
        )
    v_half = _energy_once(measure, gamma, q, lo, hi, dx / 2.0, weight_fn)
    # near-field divergence (e.g. point masses at negative order) shows as
    # quadrature growth that refinement cannot settle
    if v_half > v * (1.0 + NEAR_FIELD_TREND):
        return EstimateReport(
            math.inf,
            {"dx": dx},
            notes={
                "reason": "near-field divergence trend under dx halving",
                "divergent": True,
                "values": (v, v_half),
            },
        )
    return EstimateReport(
        value=v,
        resolution={"dx": dx, "box_lo": tuple(lo), "box_hi": tuple(hi)},
        refinement_delta=abs(v - v_half),
        notes={"value_at_half_dx": v_half},
    )


def mutual_energy(mu: DiscreteMeasure, nu: DiscreteMeasure, gamma: float, p: int) -> float:
    """(gamma, p)-energy of mu with respect to nu: sum over nu of (U^gamma mu)^p."""
    if p < 1 or int(p) != p:
        raise ValueError("p must be a positive integer")
    if nu.n_atoms == 0:
        return 0.0
    u = riesz_potential_many(mu, gamma, nu.atoms)
    return float((u ** int(p)) @ nu.weights)


def _smoothed_ball_mass(measure: DiscreteMeasure, x: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Ball masses with each atom spread uniformly over a ball of radius cw/2.

    Exact for a ball centered on an atom ((r / rho)^n profile); distant atoms
    enter through a linear ramp as the ball boundary sweeps their cell.
    """
    rho = measure.cell_width / 2.0
    d = np.sqrt(((measure.atoms - x.reshape(1, -1)) ** 2).sum(axis=1))
    r = radii[:, None]
    n = measure.dim
    near = d <= rho
    frac = np.zeros((len(radii), measure.n_atoms))
    if near.any():
        frac[:, near] = np.clip((r - d[near][None, :]) / rho, 0.0, 1.0) ** n
    far = ~near
    if far.any():
        frac[:, far] = np.clip((r - (d[far][None, :] - rho)) / (2.0 * rho), 0.0, 1.0)
    return frac @ measure.weights


def _weight_ball(weight: WeightSpec, x: np.ndarray, radii: np.ndarray, n: int) -> np.ndarray:
    """w(B(x, r)) for the supported weights.

    The unit weight uses r^n directly (the unit-ball volume factor is folded
    into this normalization, matching the unweighted Wolff potential's
    denominator r^(n - gamma p))."""
    if weight.kind == "unit":
        return radii**n
    aw = weight.exponent
    if n == 1:
        def prim(y):
            return np.sign(y) * np.abs(y) ** aw / aw

        return prim(x[0] + radii) - prim(x[0] - radii)
    if n == 2:
        theta = (np.arange(64) + 0.5) * (2.0 * math.pi / 64.0)
        nodes, gw = np.polynomial.legendre.leggauss(48)
        out = np.empty(len(radii))
        ux, uy = np.cos(theta), np.sin(theta)
        for i, r in enumerate(radii):
            rr = 0.5 * r * (nodes + 1.0)
            w_r = 0.5 * r * gw
            px = x[0] + rr[:, None] * ux[None, :]
            py = x[1] + rr[:, None] * uy[None, :]
            vals = (px**2 + py**2) ** ((aw - 2.0) / 2.0)
            out[i] = float((vals.mean(axis=1) * 2.0 * math.pi * rr) @ w_r)
        return out
    raise ValueError("radial_power weight is implemented for n <= 2")


def wolff_potential(
    measure: DiscreteMeasure,
    gamma: float,
    p: float,
    x,
    weight: WeightSpec = WeightSpec(),
    r_grid: np.ndarray | None = None,
) -> float:
    """Wolff potential at x: the radial integral of (r^(gamma p) mu(B)/w(B))^(q-1) dr/r.

    Log-trapezoid over a grid reaching from far below cell_width (the smoothed
    ball-mass head is an integrable power there) to twice the support diameter,
    plus the exact analytic tail where the ball mass has saturated.
    """
    n = measure.dim
    if not p > 1.0:
        raise ValueError("need p > 1")
    if not 0.0 < gamma < n / p:
        raise ValueError("need 0 < gamma < n/p")
    if measure.n_atoms == 0:
        return 0.0
    q = p / (p - 1.0)
    x = np.asarray(x, dtype=float).ravel()
    diam = measure.support_diameter()
    d_x = float(np.sqrt(((measure.atoms - x.reshape(1, -1)) ** 2).sum(axis=1)).max())
    r_max = 2.0 * max(diam, d_x, measure.cell_width)
    if r_grid is None:
        r_grid = np.geomspace(measure.cell_width / 2.0**20, r_max, 224)
    else:
        r_grid = np.asarray(sorted(float(r) for r in r_grid))
        if len(r_grid) < 64:
            raise ValueError("r_grid needs at least 64 nodes")
    mass = _smoothed_ball_mass(measure, x, r_grid)
    wb = _weight_ball(weight, x, r_grid, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        integrand = np.where(mass > 0.0, (r_grid**(gamma * p) * mass / wb) ** (q - 1.0), 0.0)
    value = float(np.trapezoid(integrand, np.log(r_grid)))

    m_tot = measure.total_mass
    r_end = r_grid[-1]
    if weight.kind == "unit":
        expo = (n - gamma * p) * (q - 1.0)
        value += m_tot ** (q - 1.0) * r_end ** (-expo) / expo
    else:
        aw = weight.exponent
        expo = (aw - gamma * p) * (q - 1.0)
        if expo <= 0.0:
            return math.inf
        amp = (m_tot * aw / surface_area(n)) ** (q - 1.0)
        # asymptotic w(B(x, r)) ~ S_{n-1} r^aw / aw, accurate once r >> |x|
        r_far = max(r_end, 8.0 * (float(np.sqrt((x**2).sum())) + diam + measure.cell_width))
        if r_far > r_end:
            rg2 = np.geomspace(r_end, r_far, 64)
            wb2 = _weight_ball(weight, x, rg2, n)
            ig2 = (rg2**(gamma * p) * m_tot / wb2) ** (q - 1.0)
            value += float(np.trapezoid(ig2, np.log(rg2)))
        value += amp * r_far ** (-expo) / expo
    return value


def wolff_energy_comparison(
    measure: DiscreteMeasure,
    gamma: float,
    p: float,
    weight: WeightSpec = WeightSpec(),
    box=None,
    dx: float | None = None,
):
    """Both sides of the Wolff inequality; the caller asserts two-sided comparability.

    Unit weight: (I_q^gamma(mu), integral of W^mu_{gamma,p} d mu).  Radial
    weight: the weighted energy against n * integral of the weighted Wolff
    potential, matching the weighted inequality's bookkeeping.
    """
    n = measure.dim
    q = p / (p - 1.0)
    if measure.n_atoms == 0:
        return 0.0, 0.0
    if weight.kind == "unit":
        lhs_rep = energy(measure, gamma, q, box=box, dx=dx)
        lhs = lhs_rep.value
        factor = 1.0
    else:
        aw = weight.exponent

        def weight_fn(grid):
            rr = np.sqrt((grid**2).sum(axis=1))
            return np.where(rr > 0, rr ** (-(aw - n) * q / p), np.inf)

        weight_fn.tail_exponent = (n - gamma) * q + (aw - n) * q / p - n
        weight_fn.tail_amplitude = 1.0
        lhs_rep = energy(measure, gamma, q, box=box, dx=dx, weight_fn=weight_fn)
        lhs = lhs_rep.value
        factor = float(n)
    rhs = factor * float(
        sum(
            w * wolff_potential(measure, gamma, p, a, weight)
            for a, w in zip(measure.atoms, measure.weights)
        )
    )
    return lhs, rhs


def negative_sobolev_norm(
    measure: DiscreteMeasure,
    alpha: float,
    q: float,
    box=None,
    dx: float | None = None,
) -> EstimateReport:
    """Homogeneous negative-order Sobolev norm of a finite measure via its energy:
    the norm in order alpha < 0 and integrability q is I_q^(-alpha)(mu)^(1/q)."""
    n = measure.dim
    if not -n < alpha < 0.0:
        raise ValueError("need -n < alpha < 0")
    rep = energy(measure, -alpha, q, box=box, dx=dx)
    if not np.isfinite(rep.value):
        return EstimateReport(math.inf, rep.resolution, notes=rep.notes)
    value = rep.value ** (1.0 / q)
    half = rep.notes.get("value_at_half_dx")
    delta = abs(value - half ** (1.0 / q)) if half is not None else None
    return EstimateReport(value, rep.resolution, refinement_delta=delta)


def multi_energy_identity_check(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    gamma1: float,
    gamma2: float,
    p: int,
    box=None,
    dx: float | None = None,
):
    """Both sides of the kernel-splitting identity for mutual energies.

    lhs applies the composite kernel directly; rhs factors it through the
    intermediate convolution integral (computed as a boxed Riemann sum with
    the same regularization scale) and must agree up to quadrature error.
    """
    if p not in (1, 2):
        raise ValueError("identity check limited to p<=2")
    n = mu.dim
    if gamma1 <= 0 or gamma2 <= 0 or gamma1 + gamma2 >= n:
        raise ValueError("need gamma1, gamma2 > 0 with gamma1 + gamma2 < dim")
    if nu.n_atoms == 0:
        return 0.0, 0.0
    lhs = mutual_energy(mu, nu, gamma1 + gamma2, p)

    both = DiscreteMeasure(
        np.vstack([mu.atoms, nu.atoms]),
        np.concatenate([mu.weights, nu.weights]),
        min(mu.cell_width, nu.cell_width),
    )
    lo, hi = box if box is not None else default_box(both)
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    if dx is None:
        dx = float((hi - lo).max()) / 1024.0
    grid = _box_grid(lo, hi, dx)
    u2 = riesz_potential_many(mu, gamma2, grid)
    rho = min(mu.cell_width, nu.cell_width) / 2.0
    c1 = riesz_constant(gamma1, n)
    c2 = riesz_constant(gamma2, n)
    amps = np.empty(nu.n_atoms)
    center = (lo + hi) / 2.0
    r0 = float((hi - lo).min()) / 2.0
    tail = surface_area(n) * c1 * c2 * mu.total_mass * r0 ** (gamma1 + gamma2 - n) / (n - gamma1 - gamma2)
    for i, a in enumerate(nu.atoms):
        d = np.sqrt(((grid - a.reshape(1, -1)) ** 2).sum(axis=1))
        k1 = regularized_kernel_values(d, gamma1, n, rho)
        amps[i] = float((k1 * u2).sum()) * dx**n + tail
    rhs = float((amps ** int(p)) @ nu.weights)
    return lhs, rhs


def kernel_semigroup_check(
    gamma1: float,
    gamma2: float,
    x: float = 1.0,
    dx: float = 2.0**-10,
    half_width: float = 256.0,
):
    """Numerical convolution k_{g1} * k_{g2} at |x| in n=1 against k_{g1+g2}(x).

    Piecewise product integration: on the half-line nearer each singularity
    the singular factor is integrated exactly against the other factor frozen
    at the cell midpoint; the far field beyond the window is added as the
    exact power tail.  Pins the kernel normalization: a wrong c(gamma, n)
    shows up as a constant relative offset that refinement cannot remove.
    Returns (numeric, exact, relative_error).
    """
    if gamma1 + gamma2 >= 1.0:
        raise ValueError("semigroup check needs gamma1 + gamma2 < 1 in n=1")
    c1 = riesz_constant(gamma1, 1)
    c2 = riesz_constant(gamma2, 1)

    def power_int(c, g, a, b):
        # exact integral of c |z|^(g-1) over [a, b] with a <= b
        prim = lambda z: math.copysign(abs(z) ** g, z) / g
        return c * (prim(b) - prim(a))

    total = 0.0
    m = int(round(2.0 * half_width / dx))
    edges = -half_width + dx * np.arange(m + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    near_zero = np.abs(mids) < np.abs(mids - x)
    k1_mid = c1 * np.abs(x - mids) ** (gamma1 - 1.0)
    k2_mid = c2 * np.abs(mids) ** (gamma2 - 1.0)
    for i in range(m):
        a, b = edges[i], edges[i + 1]
        if near_zero[i]:
            total += k1_mid[i] * power_int(c2, gamma2, a, b)
        else:
            total += k2_mid[i] * power_int(c1, gamma1, a - x, b - x)
    g12 = gamma1 + gamma2
    total += 2.0 * c1 * c2 * half_width ** (g12 - 1.0) / (1.0 - g12)
    exact = riesz_constant(g12, 1) * abs(x) ** (g12 - 1.0)
    return total, exact, abs(total - exact) / exact
