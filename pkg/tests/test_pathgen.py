import numpy as np
import pytest

from conftest import fbm, stable
from fracpath import GeneratorSpec, empirical_holder_exponent, generate
from fracpath.pathgen import path_from_csv, path_to_csv, stream


def test_linear_family_values():
    p = generate(GeneratorSpec("linear", T=1.0, n_steps=4))
    assert np.allclose(p.values.ravel(), [0.0, 0.25, 0.5, 0.75, 1.0])


def test_spec_validation():
    with pytest.raises(ValueError):
        GeneratorSpec("fbm", params={"hurst": 1.2})
    with pytest.raises(ValueError):
        GeneratorSpec("stable_levy", params={"alpha": 2.5})
    with pytest.raises(ValueError):
        GeneratorSpec("warp")
    with pytest.raises(ValueError):
        GeneratorSpec("piecewise_linear", params={"breakpoints": [0.5, 0.2], "levels": [0, 1]})


def test_determinism():
    for spec in (
        GeneratorSpec("fbm", n_steps=512, params={"hurst": 0.7}, seed=42),
        GeneratorSpec("stable_levy", n_steps=512, params={"alpha": 1.5}, seed=42),
    ):
        assert np.array_equal(generate(spec).values, generate(spec).values)


def test_fbm_brownian_marginal():
    # Monte Carlo against the Brownian law: Var X_1 = 1 (exact covariance makes
    # small N sufficient)
    vals = np.array([fbm(64, 0.5, s).values[-1, 0] for s in range(10_000)])
    assert np.var(vals) == pytest.approx(1.0, abs=0.05)


def test_fbm_self_similarity_slope():
    # regression of log E|X_{t+tau} - X_t|^2 on log tau must give 2H
    hurst = 0.3
    lags = np.array([1, 2, 4, 8, 16, 32])
    acc = np.zeros(len(lags))
    n_seeds = 400
    for s in range(n_seeds):
        x = fbm(1024, hurst, 20_000 + s).x
        for i, lag in enumerate(lags):
            d = x[lag:] - x[:-lag]
            acc[i] += np.mean(d**2)
    slope = np.polyfit(np.log(lags / 1024.0), np.log(acc / n_seeds), 1)[0]
    assert slope == pytest.approx(2.0 * hurst, abs=0.05)


def test_fgn_lag_one_autocovariance():
    # empirical correlation of consecutive unit-lag increments matches
    # rho(H) = (2^{2H} - 2)/2
    hurst = 0.7
    num, den = 0.0, 0.0
    for s in range(2000):
        inc = np.diff(fbm(128, hurst, 40_000 + s).x)
        num += float((inc[:-1] * inc[1:]).sum())
        den += float((inc**2).sum())
    rho = num / den
    assert rho == pytest.approx((2.0**(2 * hurst) - 2.0) / 2.0, abs=0.05)


def test_stable_alpha2_matches_brownian():
    # Kolmogorov-Smirnov distance between X_1 samples of the two generators
    a = np.sort([stable(64, 2.0, s).values[-1, 0] for s in range(10_000)])
    b = np.sort([fbm(64, 0.5, 60_000 + s).values[-1, 0] for s in range(10_000)])
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / len(a)
    fb = np.searchsorted(b, grid, side="right") / len(b)
    assert np.abs(fa - fb).max() < 0.02


def test_stable_is_cadlag_and_scaled():
    p = stable(256, 1.2, 3)
    assert p.interpolation == "piecewise-constant-cadlag"
    # heavy tails present: increments exceed the Gaussian envelope eventually
    inc = np.abs(np.diff(p.x))
    assert inc.max() > 3.0 * np.median(inc)


def test_holder_exponent_linear(linear_1024):
    rep = empirical_holder_exponent(linear_1024, [k / 1024 for k in (1, 2, 4, 8, 16)])
    assert rep.value == pytest.approx(1.0, abs=1e-6)


def test_holder_exponent_fbm():
    lags = [2**k / 2**14 for k in range(0, 8)]
    inside = 0
    for s in range(100):
        rep = empirical_holder_exponent(fbm(2**14, 0.7, 80_000 + s), lags)
        inside += 0.6 <= rep.value <= 0.8
    assert inside >= 90


def test_holder_exponent_step():
    p = generate(GeneratorSpec("step", n_steps=512, params={"jumps": [(0.5, 1.0)]}))
    rep = empirical_holder_exponent(p, [k / 512 for k in (8, 16, 32, 64)])
    assert abs(rep.value) < 0.05  # a jump kills Hoelder regularity


def test_holder_exponent_errors(linear_1024):
    const = generate(
        GeneratorSpec("piecewise_linear", n_steps=64, params={"breakpoints": [0, 1], "levels": [1, 1]})
    )
    with pytest.raises(ValueError, match="degenerate path"):
        empirical_holder_exponent(const, [k / 64 for k in (1, 2, 4)])
    with pytest.raises(ValueError):
        empirical_holder_exponent(linear_1024, [1.0 / 1024])


def test_weierstrass_and_step_families():
    w = generate(GeneratorSpec("weierstrass", n_steps=1024, params={"a": 0.5, "b": 3.0}))
    assert np.isfinite(w.values).all()
    st = generate(GeneratorSpec("step", n_steps=300, T=3.0, params={"jumps": [(1.0, 1.0), (2.0, 1.0)]}))
    assert st.evaluate(0.5)[0] == 0.0 and st.evaluate(1.5)[0] == 1.0 and st.evaluate(2.5)[0] == 2.0


def test_stream_splitting_independent():
    a = stream(7, 0).standard_normal(8)
    b = stream(7, 1).standard_normal(8)
    assert not np.allclose(a, b)
    assert np.allclose(a, stream(7, 0).standard_normal(8))


def test_csv_roundtrip(tmp_path):
    p = fbm(128, 0.6, 5, dim=2)
    f = tmp_path / "path.csv"
    path_to_csv(p, f)
    header = f.read_text().splitlines()[0]
    assert header == "t,x1,x2"
    q = path_from_csv(f)
    assert np.allclose(p.values, q.values, rtol=0, atol=0)  # 17 digits round-trips exactly
