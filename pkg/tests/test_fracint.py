import cmath
import math

import numpy as np
import pytest

from conftest import fbm
from fracpath import GeneratorSpec, SampledPath, generate
from fracpath.fracint import (
    FracDerivParams,
    hardy_bound_report,
    left_marchaud_profile,
    right_marchaud_profile,
    stieltjes_forward_sum,
    weyl_marchaud,
    zahle_existence_check,
    zahle_integral,
)

# frozen oracles
MARCHAUD_LINEAR_T1 = 1.1283791670955126  # Gamma(2)/Gamma(1.5) = 2/sqrt(pi)
ZAHLE_SMOOTH = 0.23913362692838303  # int_0^1 t^2 cos t dt by antiderivative
HARDY_LHS = 0.45454545454545453  # int_0^1 t^(1.2) dt = 1/2.2
HARDY_RHS = 1.0909090909090908  # 2/((1.2)(2.2)) + 1/3


def smooth_pair(n=4096):
    t = np.arange(n + 1) / n
    return SampledPath(1.0, t**2), SampledPath(1.0, np.sin(t))


def test_marchaud_constant_zero():
    prof = left_marchaud_profile(np.full(129, 3.0), 1.0 / 128, 0.4)
    assert np.nanmax(np.abs(prof)) == 0.0


def test_marchaud_linear_oracle(linear_1024):
    prof = left_marchaud_profile(linear_1024.x, linear_1024.dt, 0.5)
    assert prof[-1] == pytest.approx(MARCHAUD_LINEAR_T1, rel=1e-12)
    assert prof[512] == pytest.approx(MARCHAUD_LINEAR_T1 * math.sqrt(0.5), rel=1e-12)


def test_marchaud_right_oracle(linear_1024):
    # bracket of order kappa for g(t) = t is -(T-t)^(1-kappa)/Gamma(2-kappa)
    prof = right_marchaud_profile(linear_1024.x, linear_1024.dt, 0.5)
    assert prof[0] == pytest.approx(-1.0 / math.gamma(1.5), rel=1e-12)


def test_marchaud_linearity():
    rng = np.random.default_rng(0)
    a = rng.standard_normal(129)
    b = rng.standard_normal(129)
    la = left_marchaud_profile(a, 1.0 / 128, 0.3)
    lb = left_marchaud_profile(b, 1.0 / 128, 0.3)
    lab = left_marchaud_profile(2.0 * a - 3.0 * b, 1.0 / 128, 0.3)
    assert np.nanmax(np.abs(lab - (2.0 * la - 3.0 * lb))) < 1e-12


def test_weyl_marchaud_phase():
    lin = generate(GeneratorSpec("linear", n_steps=256))
    left = weyl_marchaud(lin, FracDerivParams(0.5, "left_from_0"), 1.0)
    assert left.imag == 0.0
    right = weyl_marchaud(lin, FracDerivParams(0.5, "right_from_T"), 0.0)
    assert cmath.phase(right) != 0.0  # carries exp(i pi kappa)
    with pytest.raises(ValueError):
        weyl_marchaud(lin, FracDerivParams(0.5, "left_from_0"), 0.0)
    with pytest.raises(ValueError):
        FracDerivParams(1.2)


def test_zahle_constant_f_boundary_only():
    n = 256
    g = SampledPath(1.0, np.sin(np.arange(n + 1) / n))
    rep = zahle_integral(SampledPath(1.0, np.ones(n + 1)), g, 0.4)
    assert rep.value == pytest.approx(math.sin(1.0), abs=1e-12)


def test_zahle_smooth_oracle():
    f, g = smooth_pair(4096)
    rep = zahle_integral(f, g, 0.4)
    assert abs(rep.value - ZAHLE_SMOOTH) < 1e-4
    assert rep.notes["imag_residual"] < 1e-10


def test_zahle_alpha_independence():
    f, g = smooth_pair(4096)
    vals = [zahle_integral(f, g, a).value for a in (0.3, 0.45, 0.6)]
    assert max(vals) - min(vals) < 1e-4
    ref = zahle_integral(f, g, 0.45)
    assert np.std(vals) < 10.0 * max(ref.refinement_delta, 1e-12)


def test_zahle_bilinear_and_shift():
    n = 256
    t = np.arange(n + 1) / n
    g = SampledPath(1.0, np.sin(t))
    f1 = SampledPath(1.0, t**2)
    f2 = SampledPath(1.0, np.cos(2.0 * t))
    combo = SampledPath(1.0, 2.0 * t**2 + 3.0 * np.cos(2.0 * t))
    a = zahle_integral(combo, g, 0.4).value
    b = 2.0 * zahle_integral(f1, g, 0.4).value + 3.0 * zahle_integral(f2, g, 0.4).value
    assert a == pytest.approx(b, abs=1e-10)
    va = zahle_integral(f1, g, 0.35)
    vb = zahle_integral(SampledPath(1.0, t**2 + 5.0), g, 0.35)
    assert va.value - va.notes["boundary_term"] == pytest.approx(
        vb.value - vb.notes["boundary_term"], abs=1e-10
    )


def test_zahle_convergence_order():
    # against the classical value, first-order-ish in dt for C^1 pairs
    errs = []
    for n in (512, 1024, 2048):
        f, g = smooth_pair(n)
        errs.append(abs(zahle_integral(f, g, 0.4).value - ZAHLE_SMOOTH))
    order = np.polyfit(np.log([512, 1024, 2048]), np.log(errs), 1)[0]
    assert -order >= 0.8


def test_zahle_divergence_sentinel():
    # two H = 0.2 paths: gamma + delta < 1 for every admissible exponent
    # pair, so the profile product mass grows without bound under refinement
    f = fbm(2048, 0.2, 3)
    g = fbm(2048, 0.2, 4)
    rep = zahle_integral(f, g, 0.5)
    assert rep.value == math.inf
    assert "hypotheses violated" in rep.notes["reason"]


def test_zahle_grid_mismatch():
    f, _ = smooth_pair(256)
    _, g = smooth_pair(512)
    with pytest.raises(ValueError):
        zahle_integral(f, g, 0.4)


def test_forward_sums():
    lin = generate(GeneratorSpec("linear", n_steps=512))
    one = SampledPath(1.0, np.ones(513))
    assert stieltjes_forward_sum(one, lin, range(0, 513, 64)) == pytest.approx(1.0)
    sums = [stieltjes_forward_sum(lin, lin, range(0, 513, 512 // m)) for m in (8, 64, 512)]
    errs = [abs(s - 0.5) for s in sums]
    assert errs[0] > errs[1] > errs[2]
    with pytest.raises(ValueError):
        stieltjes_forward_sum(lin, lin, [0, 10, 5, 512])


def test_hardy_closed_forms():
    lin = generate(GeneratorSpec("linear", n_steps=2048))
    lhs, rhs = hardy_bound_report(lin, 0.4, 2.0)
    assert lhs == pytest.approx(HARDY_LHS, rel=2e-3)
    assert rhs == pytest.approx(HARDY_RHS, rel=2e-3)
    const = SampledPath(1.0, np.full(65, 1.5))
    assert hardy_bound_report(const, 0.4, 2.0) == (0.0, 0.0)
    with pytest.raises(ValueError, match="excluded exponent"):
        hardy_bound_report(lin, 0.5, 2.0)


def test_hardy_fbm_family_bounded():
    ratios = {n: [] for n in (512, 1024)}
    for n in ratios:
        for s in range(20):
            path = fbm(n, 0.5, 900 + s)
            lhs, rhs = hardy_bound_report(path, 0.3, 2.0)
            ratios[n].append(lhs / rhs)
    m1, m2 = max(ratios[512]), max(ratios[1024])
    assert m1 < 1.5 and m2 < 1.5  # the embedding direction holds with margin
    assert abs(m2 - m1) <= 0.25 * m1


def test_existence_check_zero_f():
    n = 256
    f = SampledPath(1.0, np.zeros(n + 1))
    g = SampledPath(1.0, np.sin(np.arange(n + 1) / n))
    rep = zahle_existence_check(f, g, 0.5, 2.0, 0.5, 2.0)
    assert rep.value == 0.0
    assert rep.notes["ratio"] == 0.0


def test_existence_check_smooth_pass():
    f, g = smooth_pair(1024)
    rep = zahle_existence_check(f, g, 0.6, 2.0, 0.6, 2.0)
    assert rep.notes["hypotheses_pass"]
    assert rep.notes["branch"] == "direct"
    assert np.isfinite(rep.notes["ratio"])
    assert rep.value == pytest.approx(ZAHLE_SMOOTH, abs=1e-3)


def test_existence_check_failed_hypotheses_still_attempted():
    f, g = smooth_pair(512)
    rep = zahle_existence_check(f, g, 0.4, 2.0, 0.4, 2.0)
    assert not rep.notes["hypotheses_pass"]
    assert not rep.notes["order_condition"]
    assert np.isfinite(rep.value)  # integral still attempted and reported


def test_existence_check_exponent_adjusted_branch():
    f, g = smooth_pair(512)
    rep = zahle_existence_check(f, g, 0.9, 1.0, 0.9, 2.0)  # 1/p + 1/q = 1.5 > 1
    assert rep.notes["branch"] == "exponent-adjusted"
    assert rep.notes["adjusted_gamma"] == pytest.approx(0.9 - 1.0 + 0.5)


def test_zahle_boundary_free_variant():
    # alpha p < 1 branch: the derivative applies to f itself and the boundary
    # term is dropped; for smooth data the value is still the classical one
    n = 2048
    t = np.arange(n + 1) / n
    f = SampledPath(1.0, t + 1.0)  # f(0) = 1
    g = SampledPath(1.0, t.copy())
    rep = zahle_integral(f, g, 0.3, use_f0=False)
    # the unsplit t^(-alpha) head converges at first order in dt^(1-alpha)
    assert rep.value == pytest.approx(1.5, abs=5e-3)  # int (t+1) dt
    assert rep.notes["boundary_term"] == 0.0
    errs = [abs(v - 1.5) for v in rep.notes["value_ladder"]]
    assert errs[0] > errs[1] > errs[2]
    default = zahle_integral(f, g, 0.3)
    assert default.value == pytest.approx(1.5, abs=1e-3)


def test_integral_bound_family_ratio():
    # |int f dg - boundary| / (||f_0|| ||g_T||) stays bounded over a
    # 50-member random smooth + fbm family
    n = 1024
    t = np.arange(n + 1) / n
    ratios = []
    for k in range(50):
        g = fbm(n, 0.75, 1000 + k)
        kind = k % 3
        if kind == 0:
            f = SampledPath(1.0, t**2 + 0.3 * np.sin((k % 5 + 1) * t))
        elif kind == 1:
            f = SampledPath(1.0, np.cos((k % 4 + 1) * t))
        else:
            f = fbm(n, 0.75, 2000 + k)
        rep = zahle_existence_check(f, g, 0.6, 2.0, 0.6, 2.0)
        assert rep.notes["hypotheses_pass"]
        ratios.append(rep.notes["ratio"])
    assert np.isfinite(ratios).all()
    assert max(ratios) < 10.0
