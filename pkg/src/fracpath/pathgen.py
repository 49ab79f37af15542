"""Path families: fractional Brownian motion, symmetric stable Levy, test paths.

Randomness is counter-based and fully reproducible: every random quantity is
drawn from a Philox4x64 generator keyed by the spec seed.  Coordinate j of a
multi-dimensional process uses ``Philox(key=seed).jumped(j)`` (independent
2^128-stride streams), so the same (family, params, T, N, seed) produces
bit-identical output on any platform and any thread count.  Estimators that
subsample (pair budgets, lag strata) take their own stream offsets, listed
where they are used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import CADLAG, PIECEWISE_LINEAR, EstimateReport, SampledPath, fmt

FAMILIES = ("fbm", "stable_levy", "linear", "tent", "step", "piecewise_linear", "weierstrass")

CHOLESKY_FALLBACK_MAX_N = 1 << 10


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Philox stream ``index`` for a given seed (index 0 is the base stream)."""
    bit = np.random.Philox(key=np.uint64(seed & (2**64 - 1)))
    if index:
        bit = bit.jumped(index)
    return np.random.Generator(bit)


@dataclass(frozen=True)
class GeneratorSpec:
    """Declarative description of one sampled path."""

    family: str
    T: float = 1.0
    n_steps: int = 1024
    dim: int = 1
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.n_steps < 2:
            raise ValueError("need n_steps >= 2")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.family == "fbm":
            h = self.params.get("hurst")
            if h is None or not 0.0 < h < 1.0:
                raise ValueError("fbm requires 0 < hurst < 1")
        if self.family == "stable_levy":
            a = self.params.get("alpha")
            if a is None or not 0.0 < a <= 2.0:
                raise ValueError("stable_levy requires 0 < alpha <= 2")
        if self.family == "piecewise_linear":
            ts = np.asarray(self.params.get("breakpoints", ()), dtype=float)
            if ts.size < 2 or np.any(np.diff(ts) <= 0) or ts[0] < 0 or ts[-1] > self.T:
                raise ValueError("piecewise_linear needs strictly increasing breakpoints in [0, T]")

    def refined(self, factor: int) -> "GeneratorSpec":
        return GeneratorSpec(self.family, self.T, self.n_steps * factor, self.dim, self.params, self.seed)


def _fgn_autocov(n: int, hurst: float) -> np.ndarray:
    k = np.arange(n + 1, dtype=np.float64)
    h2 = 2.0 * hurst
    return 0.5 * (np.abs(k + 1) ** h2 - 2.0 * np.abs(k) ** h2 + np.abs(k - 1) ** h2)


def _fgn_davies_harte(n: int, hurst: float, rng: np.random.Generator) -> np.ndarray:
    """Unit-spacing fractional Gaussian noise with exact covariance.

    Circulant embedding of the fGn covariance; draw order is pinned
    (W_0, W_n, then the (n-1, 2) block of mid-frequency normals) so output is
    a pure function of the stream state.
    """
    r = _fgn_autocov(n, hurst)
    c = np.concatenate([r[:n], [r[n]], r[1:n][::-1]])
    lam = np.fft.fft(c).real
    if lam.min() < -1e-8 * lam.max():
        if n <= CHOLESKY_FALLBACK_MAX_N:
            return _fgn_cholesky(n, hurst, rng)
        raise ValueError(
            "circulant embedding produced a negative eigenvalue; raise n_steps "
            f"(min eigenvalue {lam.min():.3e})"
        )
    lam = np.clip(lam, 0.0, None)
    m = 2 * n
    z = np.zeros(m, dtype=np.complex128)
    z[0] = rng.standard_normal()
    z[n] = rng.standard_normal()
    v = rng.standard_normal((n - 1, 2))
    z[1:n] = (v[:, 0] + 1j * v[:, 1]) / math.sqrt(2.0)
    z[n + 1 :] = np.conj(z[1:n][::-1])
    return (math.sqrt(m) * np.fft.ifft(np.sqrt(lam) * z)[:n]).real


def _fgn_cholesky(n: int, hurst: float, rng: np.random.Generator) -> np.ndarray:
    r = _fgn_autocov(n, hurst)
    idx = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    cov = r[idx]
    chol = np.linalg.cholesky(cov + 1e-14 * np.eye(n))
    return chol @ rng.standard_normal(n)


def _standard_sym_stable(alpha: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """Symmetric alpha-stable variates with characteristic function exp(-|xi|^alpha / 2).

    Chambers-Mallows-Stuck transform scaled by 2^(-1/alpha); with this scale
    alpha = 2 is exactly a standard normal, so the Levy family degenerates to
    Brownian motion there.  Draw order pinned: uniform angles first, then
    exponentials.
    """
    v = rng.uniform(-math.pi / 2.0, math.pi / 2.0, size)
    w = rng.exponential(1.0, size)
    if abs(alpha - 1.0) < 1e-12:
        x = np.tan(v)
    else:
        x = (
            np.sin(alpha * v)
            / np.cos(v) ** (1.0 / alpha)
            * (np.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha)
        )
    return x * 2.0 ** (-1.0 / alpha)


def generate(spec: GeneratorSpec) -> SampledPath:
    """Generate the sampled path described by ``spec`` (pure in the spec)."""
    n, dt, T = spec.n_steps, spec.T / spec.n_steps, spec.T
    t = np.arange(n + 1) * dt
    if spec.family == "fbm":
        hurst = spec.params["hurst"]
        cols = []
        for j in range(spec.dim):
            fgn = _fgn_davies_harte(n, hurst, stream(spec.seed, j))
            cols.append(np.concatenate([[0.0], np.cumsum(fgn * dt**hurst)]))
        return SampledPath(T, np.stack(cols, axis=1), PIECEWISE_LINEAR)
    if spec.family == "stable_levy":
        alpha = spec.params["alpha"]
        cols = []
        for j in range(spec.dim):
            inc = _standard_sym_stable(alpha, stream(spec.seed, j), n) * dt ** (1.0 / alpha)
            cols.append(np.concatenate([[0.0], np.cumsum(inc)]))
        return SampledPath(T, np.stack(cols, axis=1), CADLAG)
    if spec.family == "linear":
        slopes = np.asarray(spec.params.get("slopes", [1.0] + [0.0] * (spec.dim - 1)), dtype=float)
        return SampledPath(T, t[:, None] * slopes[None, :], PIECEWISE_LINEAR)
    if spec.family == "tent":
        if spec.dim != 1:
            raise ValueError("tent family is one-dimensional")
        return SampledPath(T, np.abs(2.0 * t / T - 1.0), PIECEWISE_LINEAR)
    if spec.family == "step":
        if spec.dim != 1:
            raise ValueError("step family is one-dimensional")
        jumps = spec.params.get("jumps")
        if jumps is None:
            jumps = [(T / 3.0, 1.0), (2.0 * T / 3.0, 1.0)]
        x = np.zeros(n + 1)
        for tj, height in jumps:
            x += np.where(t >= tj, float(height), 0.0)
        return SampledPath(T, x, CADLAG)
    if spec.family == "piecewise_linear":
        ts = np.asarray(spec.params["breakpoints"], dtype=float)
        vs = np.asarray(spec.params["levels"], dtype=float)
        x = np.interp(t, ts, vs)
        return SampledPath(T, x, PIECEWISE_LINEAR)
    if spec.family == "weierstrass":
        if spec.dim != 1:
            raise ValueError("weierstrass family is one-dimensional")
        a = float(spec.params.get("a", 0.5))
        b = float(spec.params.get("b", 3.0))
        lam = float(spec.params.get("lam", 1.0))
        if not 0.0 < a < 1.0:
            raise ValueError("weierstrass requires 0 < a < 1")
        n_terms = max(2, int(math.log(1e-16) / math.log(a)))
        x = np.zeros(n + 1)
        for k in range(n_terms):
            x += a**k * np.cos(2.0 * math.pi * b**k * lam * t)
        return SampledPath(T, x, PIECEWISE_LINEAR)
    raise ValueError(f"unknown family {spec.family!r}")


def empirical_holder_exponent(path: SampledPath, lags) -> EstimateReport:
    """Least-squares slope of log max_i |X(t_i + tau) - X(t_i)| against log tau."""
    dt = path.dt
    offsets = sorted({int(round(float(l) / dt)) for l in lags})
    offsets = [o for o in offsets if 1 <= o <= path.n_steps - 1]
    if len(offsets) < 3:
        raise ValueError("need at least 3 distinct lags inside the grid")
    v = path.values
    sups = []
    for o in offsets:
        d = v[o:] - v[:-o]
        sups.append(float(np.sqrt((d**2).sum(axis=1)).max()))
    sups = np.array(sups)
    if sups.max() == 0.0:
        raise ValueError("degenerate path")
    good = sups > 0
    if good.sum() < 2:
        raise ValueError("degenerate path")
    logl = np.log(np.array(offsets, dtype=float)[good] * dt)
    logs = np.log(sups[good])
    slope = float(np.polyfit(logl, logs, 1)[0])
    return EstimateReport(
        value=slope,
        resolution={"n_steps": path.n_steps, "n_lags": len(offsets)},
        notes={"lag_range": (offsets[0] * dt, offsets[-1] * dt)},
    )


def path_to_csv(path: SampledPath, file) -> None:
    """Write `t,x1,...,xn` rows at full double precision."""
    header = ["t"] + [f"x{j + 1}" for j in range(path.dim)]
    times = path.times
    with open(file, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(path.n_steps + 1):
            cells = [fmt(times[i])] + [fmt(path.values[i, j]) for j in range(path.dim)]
            fh.write(",".join(cells) + "\n")


def path_from_csv(file) -> SampledPath:
    data = np.loadtxt(file, delimiter=",", skiprows=1)
    t = data[:, 0]
    return SampledPath(T=float(t[-1] - t[0]), values=data[:, 1:], t0=float(t[0]))
