import math

import numpy as np
import pytest

from semikernel import wavepacket as wp


def test_standard_window_normalized():
    g = wp.standard_window()
    assert g.l2_norm() == pytest.approx(1.0, abs=1e-14)
    assert g(0.0) == pytest.approx(math.pi ** -0.25)


def test_dilate_is_isometry():
    g = wp.standard_window()
    for eps in (0.1, 0.5, 2.0):
        d = wp.dilate(g, eps)
        assert d.l2_norm() == pytest.approx(1.0, abs=1e-13)
        # (D_eps g)(x) = eps^{-1/2} g(x/eps)
        assert d(0.3) == pytest.approx(g(0.3 / eps) / math.sqrt(eps), abs=1e-13)


def test_evolved_window_values():
    """Freely evolved dilate: complex width eps^2 + i t, unit norm, and the
    known central value at eps = t = 1."""
    w = wp.evolved_window(1.0, 1.0)
    assert w.l2_norm() == pytest.approx(1.0, abs=1e-13)
    assert abs(w(0.0)) == pytest.approx(math.pi ** -0.25 * 2.0 ** -0.25, abs=1e-13)
    assert w.cwidth2 == pytest.approx(1.0 + 1.0j)


def test_evolved_window_matches_free_propagation():
    """Grid cross-check: split-step free evolution of the dilated window."""
    from semikernel import potentials, propagator

    eps, t = 0.5, 0.3
    grid = propagator.GridSpec(half_len=16.0, n_points=1024)
    u0 = wp.dilate(wp.standard_window(), eps)(grid.x)
    u1 = propagator.split_step_values(potentials.free(), grid, u0, t, 64)
    w = wp.evolved_window(eps, t)
    assert np.max(np.abs(u1 - w(grid.x))) <= 1e-10


def test_abs_width():
    w = wp.evolved_window(0.5, 0.3)
    assert w.abs_width() == pytest.approx(
        math.sqrt(0.5**4 + 0.3**2) / 0.5, abs=1e-13
    )


def test_transform_inversion_five_functions():
    """f = ||phi||^-2 W*[W f] to 1e-6 relative L2 on five test functions."""
    y = np.linspace(-12.0, 12.0, 961)
    x = np.linspace(-12.0, 12.0, 241)
    xi = np.linspace(-14.0, 14.0, 281)
    window = wp.standard_window()
    tests = [
        np.exp(-(y**2) / 2.0),
        np.exp(-((y - 1.5) ** 2)) * np.exp(2j * y),
        y * np.exp(-(y**2) / 1.4),
        np.exp(-(y**2) / 3.0) * np.cos(3 * y),
        (1.0 + 0.5j) * np.exp(-((y + 2.0) ** 2) / 2.5) * np.exp(-1j * y),
    ]
    for f in tests:
        field = wp.wp_transform(window, f, y, y, xi)
        rec = wp.invert(window, field, y)
        rel = np.linalg.norm(rec - f) / np.linalg.norm(f)
        assert rel <= 1e-6


def test_transform_grid_guard():
    y = np.linspace(-10, 10, 41)  # dy = 0.5
    window = wp.dilate(wp.standard_window(), 0.2)  # width 0.2 < 4 dy
    with pytest.raises(wp.GridTooCoarse):
        wp.wp_transform(window, np.exp(-(y**2)), y, y, y)


def test_closed_form_moments_match_quadrature():
    """Closed-form L1/L2 moments vs grid quadrature, 1e-8 relative."""
    for eps in (0.3, 1.0):
        for t in (0.05, 0.4):
            w = wp.evolved_window(eps, t)
            for alpha in (0, 1, 2):
                l1c, l2c = wp._abs_moments(w, alpha)
                l1g, l2g = wp.window_grid_norms(w, alpha)
                assert abs(l1c - l1g) / l1g <= 1e-8
                assert abs(l2c - l2g) / l2g <= 1e-8


def test_key_estimate_ratios_stable():
    """Measured-over-bound ratios stay finite and within a 10x band per
    moment order across the (t, eps) sweep."""
    ts = [0.02, 0.04, 0.08, 0.16, 0.32]
    for alpha in (0, 1, 2):
        r1, r2 = [], []
        for t in ts:
            for rule in ("sqrt", "fixed"):
                eps = math.sqrt(t) if rule == "sqrt" else 0.5
                s = wp.key_estimate_check(alpha, t, eps)
                assert np.isfinite(s.ratio_l1) and s.ratio_l1 > 0
                assert np.isfinite(s.ratio_l2) and s.ratio_l2 > 0
                r1.append(s.ratio_l1)
                r2.append(s.ratio_l2)
        assert max(r1) / min(r1) < 10.0
        assert max(r2) / min(r2) < 10.0


def test_key_estimate_small_t_limit():
    """alpha = 0, eps = 1: as t -> 0 the L1 bound ratio approaches
    sqrt(2 pi) pi^{-1/4} over the k-sum."""
    s = wp.key_estimate_check(0, 1e-8, 1.0)
    lhs_expect = math.pi ** -0.25 * math.sqrt(2 * math.pi)
    assert s.lhs_l1 == pytest.approx(lhs_expect, rel=1e-6)


def test_transform_isometry_scaled():
    """||W f||^2 with the (2 pi)^-1 measure equals ||phi||^2 ||f||^2."""
    y = np.linspace(-12.0, 12.0, 961)
    xi = np.linspace(-14.0, 14.0, 561)
    window = wp.standard_window()
    f = np.exp(-(y**2) / 2.0) * np.exp(1j * y)
    field = wp.wp_transform(window, f, y, y, xi)
    dy = y[1] - y[0]
    dxi = xi[1] - xi[0]
    lhs = np.sum(np.abs(field.values) ** 2) * dy * dxi / (2 * math.pi)
    rhs = window.l2_norm() ** 2 * np.sum(np.abs(f) ** 2) * dy
    assert lhs == pytest.approx(rhs, rel=1e-6)
