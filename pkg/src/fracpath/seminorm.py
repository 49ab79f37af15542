"""Gagliardo and Hoelder seminorms on (0, T), Sobolev norms, embedding and
key-estimate reports.

The double integral is discretized as a per-lag sum with the diagonal excluded
below ``diag_cut`` (default: one grid step).  The diagonal behaviour is exactly
what separates finite from infinite seminorms, so the cut is tied to the grid
and halves together with dt; divergence is then a growth trend across grid
refinements rather than a property of any single grid.

Full O(N^2) evaluation is used up to N = 2^12.  Above that the lag sum is
subsampled stratified by dyadic |t - tau| bands (small lags exact, an unbiased
seeded sample of lags per band beyond), so large-N values remain reproducible
estimates of the full sum.  The p = infinity branch (the Hoelder seminorm) is
always exact: a subsampled max has no unbiased correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import EstimateReport, SampledPath, growth_trend
from .bvfun import BVFunction, gradient_measure
from .pathgen import stream
from .varcomp import compose, variability_norm, variability_profile

FULL_SUM_MAX_N = 1 << 12
EXACT_LAG_LIMIT = 64  # lags below this are always summed exactly
BAND_BUDGET = 48  # sampled lags per dyadic band beyond the exact range
LAG_STREAM_SEED = 715  # fixed internal stream: subsampling is reproducible
DIVERGENCE_RATIO = 1.08  # growth per dt-halving that flags divergence


@dataclass(frozen=True)
class SeminormParams:
    theta: float
    p: float
    diag_cut: float | None = None  # minimum |t - tau|; None means one grid step

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError("need 0 < theta < 1")
        if self.p < 1.0:
            raise ValueError("need p >= 1")


def _lag_increment_norms(values: np.ndarray, lag: int) -> np.ndarray:
    d = values[lag:] - values[:-lag]
    return np.sqrt((d**2).sum(axis=1))


def _lags_to_sum(n: int):
    """All lags when affordable, else exact small lags plus seeded dyadic strata.

    Returns (lags, multiplicities): each selected lag's contribution is scaled
    by its band multiplicity, an unbiased estimate of the sum over the band.
    """
    if n <= FULL_SUM_MAX_N:
        lags = np.arange(1, n + 1)
        return lags, np.ones(len(lags))
    rng = stream(LAG_STREAM_SEED, 0)
    lags = list(range(1, EXACT_LAG_LIMIT + 1))
    mult = [1.0] * len(lags)
    lo = EXACT_LAG_LIMIT + 1
    while lo <= n:
        hi = min(2 * lo - 1, n)
        band = np.arange(lo, hi + 1)
        if len(band) <= BAND_BUDGET:
            chosen = band
            scale = 1.0
        else:
            chosen = np.sort(rng.choice(band, size=BAND_BUDGET, replace=False))
            scale = len(band) / BAND_BUDGET
        lags.extend(int(l) for l in chosen)
        mult.extend([scale] * len(chosen))
        lo = hi + 1
    return np.array(lags), np.array(mult)


def _raw_gagliardo_sum(values: np.ndarray, dt: float, theta: float, p: float, cut_steps: int) -> float:
    """Double Riemann sum of |f(t)-f(tau)|^p / |t-tau|^(1+theta p) off the diagonal."""
    n = values.shape[0] - 1
    lags, mult = _lags_to_sum(n)
    keep = lags >= cut_steps
    lags, mult = lags[keep], mult[keep]
    total = 0.0
    for lag, m in zip(lags, mult):
        d = _lag_increment_norms(values, int(lag))
        total += m * float((d**p).sum()) * (lag * dt) ** (-1.0 - theta * p)
    return 2.0 * total * dt * dt  # both orders of (t, tau)


def _holder_max(values: np.ndarray, dt: float, theta: float, cut_steps: int) -> float:
    n = values.shape[0] - 1
    best = 0.0
    for lag in range(cut_steps, n + 1):
        d = _lag_increment_norms(values, lag)
        best = max(best, float(d.max()) * (lag * dt) ** (-theta))
    return best


def _decimation_ladder(f: SampledPath):
    """Coarse-to-fine views of one sample set: factors 4, 2, 1 where divisible."""
    ladder = []
    for factor in (4, 2, 1):
        if f.n_steps % factor == 0 and f.n_steps // factor >= 2:
            ladder.append((factor, f.decimate(factor) if factor > 1 else f))
    return ladder


def gagliardo_seminorm(f: SampledPath, params: SeminormParams) -> EstimateReport:
    """(theta, p)-Gagliardo seminorm of a sampled path; p = inf is the Hoelder
    seminorm.

    The report carries the values on 2x and 4x coarsened grids; when the
    ladder keeps growing at rate DIVERGENCE_RATIO per halving the continuum
    seminorm is infinite and the value is the +inf sentinel.
    """
    dt = f.dt
    diag_cut = params.diag_cut if params.diag_cut is not None else dt
    if diag_cut < dt - 1e-12 * dt:
        raise ValueError("diag_cut must be at least one grid step")
    ladder_vals = []
    for factor, sub in _decimation_ladder(f):
        cut_steps = max(1, int(round(diag_cut / sub.dt)))
        if math.isinf(params.p):
            ladder_vals.append((factor, _holder_max(sub.values, sub.dt, params.theta, cut_steps)))
        else:
            raw = _raw_gagliardo_sum(sub.values, sub.dt, params.theta, params.p, cut_steps)
            ladder_vals.append((factor, raw ** (1.0 / params.p)))
    values = [v for _, v in ladder_vals]
    value = values[-1]
    delta = abs(values[-1] - values[-2]) if len(values) >= 2 else None
    divergent = len(values) >= 3 and growth_trend(values, DIVERGENCE_RATIO)
    return EstimateReport(
        value=math.inf if divergent else value,
        resolution={"n_steps": f.n_steps, "theta": params.theta, "p": params.p, "diag_cut": diag_cut},
        refinement_delta=delta,
        notes={
            "ladder": tuple(values),
            "verdict": "divergent" if divergent else "finite",
            "raw_value": value,
        },
    )


def lp_norm(f: SampledPath, p: float) -> float:
    """L^p(0, T) norm by left-endpoint Riemann sum (max norm for p = inf)."""
    mags = np.sqrt((f.values**2).sum(axis=1))
    if math.isinf(p):
        return float(mags.max())
    return float((f.dt * (mags[:-1] ** p).sum()) ** (1.0 / p))


def sobolev_norm(f: SampledPath, params: SeminormParams) -> EstimateReport:
    """L^p norm plus the Gagliardo seminorm (the sentinel propagates)."""
    semi = gagliardo_seminorm(f, params)
    lp = lp_norm(f, params.p)
    return EstimateReport(
        value=lp + semi.value,
        resolution=semi.resolution,
        refinement_delta=semi.refinement_delta,
        notes={"lp": lp, "seminorm": semi.value, **semi.notes},
    )


def embedding_check(path: SampledPath, theta: float, q: float, beta: float, p: float):
    """Pointwise profiles of the two inner Gagliardo integrals.

    lhs_t = (int |X_t - X_tau|^p / |t - tau|^(1 + beta p) dtau)^(1/p) and the
    analogous (theta, q) profile; the caller asserts max(lhs/rhs) is finite
    and refinement stable.  Requires p <= q and beta < theta.
    """
    if p > q or beta >= theta:
        raise ValueError("hypotheses violated")
    n = path.n_steps
    if n > FULL_SUM_MAX_N:
        raise ValueError("embedding profiles are full O(N^2); use N <= 4096")
    dt = path.dt
    v = path.values
    lhs = np.zeros(n + 1)
    rhs = np.zeros(n + 1)
    t = path.times
    for i in range(n + 1):
        d = np.sqrt(((v - v[i]) ** 2).sum(axis=1))
        sep = np.abs(t - t[i])
        mask = sep >= dt / 2.0
        dm, sm = d[mask], sep[mask]
        lhs[i] = (float((dm**p * sm ** (-1.0 - beta * p)).sum()) * dt) ** (1.0 / p)
        rhs[i] = (float((dm**q * sm ** (-1.0 - theta * q)).sum()) * dt) ** (1.0 / q)
    return lhs, rhs


def key_estimate_report(
    phi: BVFunction,
    path: SampledPath,
    s: float,
    theta: float,
    p: float,
    q: float,
    beta: float,
    r: float,
    gm=None,
    resolution: float = 2.0**-6,
):
    """Both sides of the multiplicative composition estimate.

    lhs is the (beta, r)-seminorm of the composition; rhs is the path's
    (theta, q)-seminorm to the power s times the L^p norm of the variability
    profile.  Hypotheses 1/p + s/q <= 1/r and beta < s*theta are enforced;
    the constant tying the sides is free, so callers test ratio boundedness
    and refinement stability, never a specific value.
    """
    inv_q = 0.0 if math.isinf(q) else 1.0 / q
    if 1.0 / p + s * inv_q > 1.0 / r + 1e-12:
        raise ValueError("hypotheses violated: need 1/p + s/q <= 1/r")
    if not beta < s * theta:
        raise ValueError("hypotheses violated: need beta < s * theta")
    if gm is None:
        gm = gradient_measure(phi, resolution)
    comp = compose(phi, path)
    lhs_semi = gagliardo_seminorm(comp.path, SeminormParams(beta, r))
    path_semi = gagliardo_seminorm(path, SeminormParams(theta, q))
    prof = variability_profile(phi, path, s, gm=gm)
    prof_norm = variability_norm(prof, p)
    # the two sides are compared at matched resolution, so the raw grid value
    # is used even where the standalone trend verdict is divergence (the
    # verdict rides along in the notes)
    lhs = EstimateReport(
        value=lhs_semi.notes["raw_value"],
        resolution=lhs_semi.resolution,
        refinement_delta=lhs_semi.refinement_delta,
        notes=lhs_semi.notes,
    )
    rhs_value = path_semi.notes["raw_value"] ** s * prof_norm.value
    rhs = EstimateReport(
        value=rhs_value,
        resolution={"n_steps": path.n_steps},
        refinement_delta=None,
        notes={
            "path_seminorm": path_semi.notes["raw_value"],
            "profile_norm": prof_norm.value,
            "path_ladder": path_semi.notes["ladder"],
            "singular_fraction": prof.singular_fraction,
        },
    )
    return lhs, rhs
