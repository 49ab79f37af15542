import numpy as np
import pytest

from conftest import fbm
from fracpath import DiscreteMeasure, GeneratorSpec, TimeWindow, generate
from fracpath.occupation import (
    ball_mass,
    ball_mass_profile,
    exact_local_time_pl,
    local_time_histogram,
    occupation_measure,
    upper_regularity_exponent,
)


def test_occupation_linear_mass_and_ball(linear_1024):
    mu = occupation_measure(linear_1024)
    assert mu.total_mass == pytest.approx(1.0, abs=1e-12)
    assert ball_mass(mu, [0.5], 0.2) == pytest.approx(0.4, abs=linear_1024.dt)


def test_occupation_constant_path():
    const = generate(
        GeneratorSpec("piecewise_linear", n_steps=64, T=2.0, params={"breakpoints": [0, 2], "levels": [0.7, 0.7]})
    )
    mu = occupation_measure(const)
    assert mu.n_atoms == 1
    assert mu.atoms[0, 0] == 0.7
    assert mu.total_mass == pytest.approx(2.0)


def test_occupation_tent_preimage(tent_4096):
    # exact preimage: L^1(X^{-1}([0, 0.5])) = 0.5 for the tent path
    mu = occupation_measure(tent_4096)
    in_set = mu.atoms[:, 0] <= 0.5
    assert float(mu.weights[in_set].sum()) == pytest.approx(0.5, abs=2 * tent_4096.dt)


def test_occupation_time_formula_exact():
    path = fbm(512, 0.5, 1)
    mu = occupation_measure(path)
    for g in (lambda y: np.cos(3 * y), lambda y: np.abs(y) ** 1.5):
        lhs = float((g(mu.atoms[:, 0]) * mu.weights).sum())
        rhs = path.dt * float(g(path.x[:-1]).sum())
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_occupation_additivity_and_reversal():
    path = fbm(512, 0.5, 2)
    whole = occupation_measure(path)
    left = occupation_measure(path, TimeWindow(0.0, 0.5))
    right = occupation_measure(path, TimeWindow(0.5, 1.0))
    assert whole.total_mass == pytest.approx(left.total_mass + right.total_mass, abs=1e-12)
    rev = path.with_values(path.values[::-1])
    mu_rev = occupation_measure(rev)
    for x in path.values[::64]:
        assert ball_mass(mu_rev, x, 0.15) == pytest.approx(
            ball_mass(whole, x, 0.15), abs=path.dt + 1e-12
        )


def test_ball_mass_cases():
    from fracpath.core import empty_measure

    assert ball_mass(empty_measure(1), [0.0], 1.0) == 0.0
    atom = DiscreteMeasure(np.array([[0.0]]), np.array([1.0]), 0.01)
    assert ball_mass(atom, [0.0], 1.0) == 1.0
    with pytest.raises(ValueError):
        ball_mass(atom, [0.0], 0.0)
    prof = ball_mass_profile(atom, np.array([0.5]), np.array([0.1, 0.6]))
    assert np.allclose(prof, [0.0, 1.0])


def test_upper_regularity_linear(linear_4096):
    mu = occupation_measure(linear_4096)
    rep = upper_regularity_exponent(mu, [[0.3], [0.5], [0.7]], [2.0**-k for k in range(2, 7)])
    assert rep.value == pytest.approx(1.0, abs=0.05)


def test_upper_regularity_atom():
    atom = DiscreteMeasure(np.array([[0.0]]), np.array([1.0]), 1e-6)
    rep = upper_regularity_exponent(atom, [[0.0]], [2.0**-k for k in range(2, 7)])
    assert abs(rep.value) < 1e-9


def test_upper_regularity_errors():
    atom = DiscreteMeasure(np.array([[0.0]]), np.array([1.0]), 1e-6)
    with pytest.raises(ValueError, match="zero"):
        upper_regularity_exponent(atom, [[50.0]], [0.01, 0.02, 0.04])
    with pytest.raises(ValueError, match="3 scales"):
        upper_regularity_exponent(atom, [[0.0]], [0.01, 0.02])


def test_histogram_tent_density():
    tent = generate(GeneratorSpec("tent", n_steps=2**16))
    lt = local_time_histogram(occupation_measure(tent), 2.0**-8)
    mid = (lt.bin_centers[:, 0] > 0.05) & (lt.bin_centers[:, 0] < 0.95)
    assert np.abs(lt.density_values[mid] - 1.0).max() <= 0.05
    assert lt.integral() == pytest.approx(1.0, abs=1e-10)


def test_histogram_constant_divergence_indicator():
    const = generate(
        GeneratorSpec("piecewise_linear", n_steps=64, params={"breakpoints": [0, 1], "levels": [0.3, 0.3]})
    )
    lt = local_time_histogram(occupation_measure(const), 0.01)
    assert len(lt.density_values) == 1
    assert lt.density_values[0] == pytest.approx(1.0 / 0.01)  # T / h_y, no L1 density


def test_histogram_dimension_guard():
    m = DiscreteMeasure(np.zeros((4, 4)), np.ones(4), 0.1)
    with pytest.raises(ValueError, match="dimension too large"):
        local_time_histogram(m, 0.1)


def test_histogram_matches_exact_pl():
    tent = generate(GeneratorSpec("tent", n_steps=2**14))
    lt = local_time_histogram(occupation_measure(tent), 2.0**-6)
    mid = (lt.bin_centers[:, 0] > 0.1) & (lt.bin_centers[:, 0] < 0.9)
    exact = exact_local_time_pl(tent, 0.4)
    assert np.abs(lt.density_values[mid] - exact).max() <= 2.0**-6 + tent.dt + 1e-6


def test_exact_local_time_examples(linear_1024):
    assert exact_local_time_pl(linear_1024, 0.5) == pytest.approx(1.0)
    tent = generate(GeneratorSpec("tent", n_steps=1024))
    assert exact_local_time_pl(tent, 0.3) == pytest.approx(1.0)  # slopes +-2, two crossings
    assert exact_local_time_pl(linear_1024, 2.0) == 0.0


def test_exact_local_time_tie_rule(linear_1024):
    # y equal to a sample value: nudged, still one crossing of slope 1
    y = linear_1024.x[512]
    assert exact_local_time_pl(linear_1024, y) == pytest.approx(1.0)


def test_exact_local_time_plateau_error():
    p = generate(
        GeneratorSpec(
            "piecewise_linear", n_steps=128, params={"breakpoints": [0, 0.4, 0.6, 1], "levels": [0, 0.5, 0.5, 1]}
        )
    )
    with pytest.raises(ValueError, match="plateau at level"):
        exact_local_time_pl(p, 0.5)
    # off the plateau the formula still applies
    assert exact_local_time_pl(p, 0.2) == pytest.approx(1.0 / 1.25)


def test_fbm_regularity_slope_module_scale():
    slopes = []
    for s in range(10):
        path = fbm(2**14, 0.3, 90_000 + s)
        mu = occupation_measure(path)
        centers = path.values[:: 2**14 // 32]
        slopes.append(upper_regularity_exponent(mu, centers, [2.0**-k for k in range(3, 8)]).value)
    assert np.mean(slopes) == pytest.approx(1.0, abs=0.15)
