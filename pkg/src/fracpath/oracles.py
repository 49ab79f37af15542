"""Pinned oracle corpus: independently computed expected values.

Every entry is computed from a closed form or adaptive quadrature of an
analytic formula, never from the code paths under test.  ``fracpath
oracle-build`` regenerates the corpus at high resolution and writes it with
provenance comments; the verification suite compares implementation output
against the checked-in copy, so a silent change in any numerical kernel shows
up as an oracle mismatch.
"""

from __future__ import annotations

import math
from importlib import resources

import numpy as np
from scipy.integrate import quad

from .potential import riesz_constant

DEFAULT_RESOURCE = "oracles.txt"


def _lebesgue_fourier_sq(x: float) -> float:
    # |FT of Lebesgue on [0,1]|^2 under the (2 pi)^(-1/2) convention
    return (2.0 - 2.0 * math.cos(x)) / x**2 / (2.0 * math.pi)


def build_oracles() -> list[tuple[str, float, str]]:
    c05 = riesz_constant(0.5, 1)
    c025 = riesz_constant(0.25, 1)
    entries: list[tuple[str, float, str]] = []

    entries.append(
        (
            "kernel.c_gamma_05_n1",
            c05,
            "Gamma((1-g)/2) / (pi^(1/2) 2^g Gamma(g/2)) at g=0.5; pinned by the semigroup check",
        )
    )
    entries.append(
        (
            "kernel.semigroup_target_g03_g04_x1",
            riesz_constant(0.7, 1),
            "k_{0.7}(1) = c(0.7, 1); convolution of k_{0.3} and k_{0.4} must land here",
        )
    )
    entries.append(
        (
            "potential.lebesgue01_mid_g05",
            c05 * 2.0 * 2.0 * math.sqrt(0.5),
            "closed-form antiderivative: c(0.5,1) * int_0^1 |0.5 - y|^(-1/2) dy = c * 2 * sqrt(2)",
        )
    )

    rho = 0.025  # cell_width 0.05 convention used by the matching checks
    inside = (c025 * (1.0 / 0.25) * rho ** (-0.75)) ** 2 * 2.0 * rho
    outside = 2.0 * c025**2 * rho ** (-0.5) / 0.5
    entries.append(
        (
            "energy.single_atom_g025_q2_cw005",
            inside + outside,
            "regularized closed form: plateau (cell average)^2 * 2 rho plus 2 c^2 int_rho^inf x^(-1.5) dx",
        )
    )
    entries.append(
        (
            "wolff.single_atom_g025_p2_cw005",
            4.0 / math.sqrt(rho),
            "split at the cell scale: int_0^rho (r/rho) r^(-3/2) dr + int_rho^inf r^(-3/2) dr = 4 rho^(-1/2)",
        )
    )

    var_l1 = c05 * (
        quad(lambda t: abs(t - 0.25) ** -0.5, 0, 1, points=[0.25], limit=200)[0]
        + quad(lambda t: abs(t - 0.75) ** -0.5, 0, 1, points=[0.75], limit=200)[0]
    )
    entries.append(
        (
            "variability.linear_indicator_L1_s05",
            var_l1,
            "adaptive quadrature of c(0.5,1)(|t-1/4|^(-1/2) + |t-3/4|^(-1/2)) over (0,1)",
        )
    )

    entries.append(("gagliardo.linear_theta05_p2", 1.0, "double integral of |t - tau|^0 over the unit square"))
    entries.append(
        (
            "sobolev.linear_theta05_p2",
            1.0 + math.sqrt(1.0 / 3.0),
            "L^2 norm (1/3)^(1/2) of f(t) = t plus the Gagliardo value 1",
        )
    )
    entries.append(
        (
            "marchaud.linear_a05_t1",
            2.0 / math.sqrt(math.pi),
            "Gamma(2)/Gamma(1.5) t^(1/2) at t = 1; cross-checked by direct fine quadrature below",
        )
    )
    # direct high-resolution quadrature of the derivative definition at t = 1
    alpha = 0.5
    n_fine = 1 << 18
    u = (np.arange(n_fine) + 0.5) / n_fine
    direct = (1.0 / math.gamma(1.0 - alpha)) * (
        1.0 + alpha * float(((1.0 - u) * (1.0 - u) ** (-alpha - 1.0)).mean())
    )
    entries.append(
        (
            "marchaud.linear_a05_t1_direct_quadrature",
            direct,
            f"midpoint rule with 2^18 nodes on the defining integral (f(t) = t)",
        )
    )

    entries.append(
        (
            "zahle.t2_sin_classical",
            math.sin(1.0) + 2.0 * math.cos(1.0) - 2.0 * math.sin(1.0),
            "classical Stieltjes value int_0^1 t^2 cos t dt by antiderivative",
        )
    )
    entries.append(("hardy.linear_lhs_b04_p2", 1.0 / 2.2, "int_0^1 t^(2 - 0.8) dt"))
    entries.append(
        (
            "hardy.linear_rhs_b04_p2",
            2.0 / (1.2 * 2.2) + 1.0 / 3.0,
            "int int |t-u|^0.2 = 2/((1.2)(2.2)) plus int_0^1 t^2 dt",
        )
    )

    # oscillatory tail handled analytically: beyond the cut, cos averages out
    # and the residue decays like x^(-2.6)
    cut = 400.0 * math.pi
    head = quad(lambda x: x**-0.6 * _lebesgue_fourier_sq(x), 0, cut, limit=4000)[0]
    tail_mean = (1.0 / math.pi) * cut**-1.6 / 1.6
    fnorm_sq = 2.0 * (head + tail_mean)
    entries.append(
        (
            "fourier.lebesgue01_norm_a_neg03_p2",
            math.sqrt(fnorm_sq),
            "adaptive quadrature of |xi|^(-0.6) |mu_hat|^2 with the analytic transform of Lebesgue on [0,1]",
        )
    )
    entries.append(
        (
            "berman.linear_K_a_neg03_p2",
            math.sqrt(fnorm_sq),
            "diam = L1(J) = 1 on the unit window, so the empirical constant equals the Fourier norm",
        )
    )
    entries.append(("localtime.tent_level", 1.0, "two crossings of slope +-2: 1/2 + 1/2"))
    entries.append(
        (
            "tau.linear_unit_window_a_neg03_p2",
            1.0 / math.sqrt(fnorm_sq),
            "window length 1 over the pinned Fourier norm",
        )
    )
    return entries


def write_oracle_file(path, entries=None) -> None:
    entries = entries if entries is not None else build_oracles()
    lines = [
        "# fracpath oracle corpus",
        "# Each value is computed from a closed form or adaptive quadrature,",
        "# independently of the implementation it validates.",
    ]
    for key, value, provenance in entries:
        lines.append(f"# {provenance}")
        lines.append(f"{key} = {value!r}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_oracle_file(path=None) -> dict[str, float]:
    if path is None:
        with resources.files("fracpath").joinpath("data").joinpath(DEFAULT_RESOURCE).open() as fh:
            text = fh.read()
    else:
        with open(path) as fh:
            text = fh.read()
    out = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, value = line.split("=", 1)
        out[key.strip()] = float(value)
    return out
