"""Closed-form cross-checks for the two-dimensional code paths."""

import math

import numpy as np
import pytest
from scipy.special import j1

from conftest import fbm
from fracpath import DiscreteMeasure, TimeWindow
from fracpath.berman import berman_ratio, default_fourier_grid, fourier_weighted_norm, measure_fourier
from fracpath.potential import (
    WeightSpec,
    _weight_ball,
    energy,
    riesz_constant,
    riesz_potential,
    wolff_potential,
)


def disk_measure(m):
    # uniform measure on the unit disk, total mass pi
    g = (np.arange(m) + 0.5) / m * 2.0 - 1.0
    xx, yy = np.meshgrid(g, g)
    pts = np.stack([xx.ravel(), yy.ravel()], axis=1)
    pts = pts[(pts**2).sum(axis=1) <= 1.0]
    return DiscreteMeasure(pts, np.full(len(pts), (2.0 / m) ** 2), 2.0 / m)


def test_planar_atom_energy_closed_form():
    atom = DiscreteMeasure(np.array([[0.0, 0.0]]), np.array([1.0]), 0.1)
    c = riesz_constant(0.5, 2)
    rho = 0.05
    inside = (c * (2.0 / 0.5) * rho**-1.5) ** 2 * math.pi * rho**2
    outside = 2.0 * math.pi * c * c / rho
    rep = energy(atom, 0.5, 2.0, box=(np.array([-2.0, -2.0]), np.array([2.0, 2.0])), dx=0.0125)
    assert rep.value == pytest.approx(inside + outside, rel=0.05)


def test_planar_radial_weight_ball_closed_form():
    aw = 1.3
    radii = np.array([0.5, 1.0, 2.0])
    wb = _weight_ball(WeightSpec("radial_power", aw), np.array([0.0, 0.0]), radii, 2)
    assert wb == pytest.approx(2.0 * math.pi * radii**aw / aw, rel=1e-4)


def test_disk_fourier_transform_is_bessel():
    mu = disk_measure(64)
    assert mu.total_mass == pytest.approx(math.pi, rel=0.01)
    for r in (0.5, 2.0, 5.0):
        got = measure_fourier(mu, [r, 0.0])
        assert abs(got.imag) < 1e-12  # symmetric support
        assert got.real == pytest.approx(j1(r) / r, abs=0.005)


def test_disk_center_potential_converges():
    exact = riesz_constant(0.7, 2) * 2.0 * math.pi / 0.7
    errs = [abs(riesz_potential(disk_measure(m), 0.7, [0.0, 0.0]) - exact) for m in (64, 128)]
    assert errs[1] < errs[0]
    assert errs[1] / exact < 0.04


def test_planar_weighted_wolff_finite():
    mu = disk_measure(48)
    v = wolff_potential(mu, 0.3, 2.0, [0.5, 0.0], WeightSpec("radial_power", 1.5))
    assert np.isfinite(v) and v > 0.0


def test_planar_berman_positive():
    path = fbm(2048, 0.5, 8, dim=2)
    rep = berman_ratio(path, TimeWindow(0.25, 0.75), -0.4, 2.0)
    assert np.isfinite(rep.value) and rep.value > 0.0


def test_planar_fourier_norm_runs():
    mu = disk_measure(48)
    rep = fourier_weighted_norm(mu, -0.5, 2.0, default_fourier_grid(mu, n_radial=128))
    assert np.isfinite(rep.value) and rep.value > 0.0
