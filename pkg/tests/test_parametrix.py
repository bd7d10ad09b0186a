import math

import numpy as np
import pytest

from semikernel import classical, parametrix, potentials, propagator
from semikernel.parametrix import QuadratureSpec
from semikernel.wavepacket import ComplexGaussian


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(nodes_x=16)
    with pytest.raises(ValueError):
        QuadratureSpec(trunc_sigma=3.0)
    with pytest.raises(ValueError):
        QuadratureSpec(phase_step_cap=0.0)


def test_h_integral_stark_oracle():
    st = potentials.stark(1.0)
    x2, xi2, h = parametrix.h_integral(st, 0.5, 1.0, 2.0)
    # backward: xi(0) = xi + t, x(0) = x - t xi - t^2/2
    assert xi2 == pytest.approx(2.5, abs=1e-10)
    assert x2 == pytest.approx(1.0 - 0.5 * 2.0 - 0.125, abs=1e-10)
    assert h == pytest.approx((2.5**3 - 2.0**3) / 6.0, abs=1e-9)


def test_leading_term_is_free_kernel():
    f = potentials.free()
    t, x, y = 0.25, 1.0, -0.5
    lead = parametrix.leading_term(f, t, x, y)
    exact = complex(propagator.exact_kernel("free", t, x, y))
    assert lead == pytest.approx(exact, abs=1e-9)


def test_e0_free_equals_exact_kernel():
    """For V = 0 the phase-space integral collapses to the free kernel."""
    f = potentials.free()
    t, eps = 0.1, math.sqrt(0.1)
    for x, y in ((0.0, 0.0), (0.8, -0.3)):
        val = parametrix.e0(f, t, x, y, eps)
        exact = complex(propagator.exact_kernel("free", t, x, y))
        assert abs(val - exact) <= 1e-8 * abs(exact)


def test_e0_stark_equals_exact_kernel():
    st = potentials.stark(1.0)
    t, eps = 0.2, math.sqrt(0.2)
    val = parametrix.e0(st, t, 0.5, -0.2, eps)
    exact = complex(propagator.exact_kernel("stark", t, 0.5, -0.2))
    assert abs(val - exact) <= 1e-8 * abs(exact)


def test_amplitude_free_is_one():
    f = potentials.free()
    s = parametrix.amplitude_a0(f, 0.05, 0.3, -0.7, math.sqrt(0.05))
    assert abs(s.a0 - 1.0) <= 1e-9


def test_amplitude_harmonic_envelope():
    """|a0 - (t/sin t)^{1/2}| within the t (eps + t/eps)^2 envelope."""
    h = potentials.harmonic()
    for t in (0.1, 0.3):
        eps = math.sqrt(t)
        s = parametrix.amplitude_a0(h, t, 0.4, -0.2, eps)
        pred = math.sqrt(t / math.sin(t))
        assert abs(s.a0 - pred) <= 0.5 * t * (eps + t / eps) ** 2


def test_amplitude_window_shares_table():
    f = potentials.free()
    a0 = parametrix.amplitude_window(
        f, 0.08, np.linspace(-0.5, 0.5, 3), np.linspace(-0.5, 0.5, 3), math.sqrt(0.08)
    )
    assert a0.shape == (3, 3)
    assert np.max(np.abs(a0 - 1.0)) <= 1e-8


def test_truncation_guard_fires():
    """A table that does not cover the requested sample must be rejected."""
    f = potentials.free()
    t, eps = 0.1, math.sqrt(0.1)
    spec = QuadratureSpec()
    xp, xi = parametrix.table_grids(f, t, eps, (0.0, 0.0), (0.0, 0.0), spec)
    table = parametrix.build_table(f, t, xp, xi)
    with pytest.raises(parametrix.TruncationTooTight):
        parametrix.e0(f, t, 5.0, 5.0, eps, spec, table)


def test_table_grids_respect_minimum_nodes():
    f = potentials.free()
    spec = QuadratureSpec(nodes_x=700, nodes_xi=5000)
    xp, xi = parametrix.table_grids(f, 0.2, 0.4, (0.0, 0.0), (0.0, 0.0), spec)
    assert xp.size >= 700
    assert xi.size >= 5000


def test_e0_quadrature_refinement_stable():
    """Halving the node spacing moves e0 by well under 5%."""
    h = potentials.harmonic()
    t, eps = 0.2, math.sqrt(0.2)
    base = parametrix.e0(h, t, 0.3, 0.1, eps, QuadratureSpec())
    spec_fine = QuadratureSpec(phase_step_cap=math.pi / 8.0)
    fine = parametrix.e0(h, t, 0.3, 0.1, eps, spec_fine)
    assert abs(base - fine) <= 0.0005 * abs(base)


def test_apply_to_gaussian_matches_split_step():
    """Operator action on a probe agrees with the reference propagator for
    an exactly-reproduced potential (Stark)."""
    st = potentials.stark(1.0)
    t, eps = 0.1, math.sqrt(0.1)
    grid = propagator.GridSpec(half_len=16.0, n_points=1024)
    probe = ComplexGaussian(
        amp=math.pi ** -0.25 / math.sqrt(0.5), center=0.5, momentum=2.0, cwidth2=0.25
    )
    u_ref = propagator.split_step_values(st, grid, probe(grid.x), t, 512)
    mask = np.abs(grid.x) <= 8.0
    u_par = parametrix.apply_to_gaussian(st, t, eps, probe, grid.x[mask])
    err = np.sqrt(np.sum(np.abs(u_ref[mask] - u_par) ** 2) * grid.dx)
    assert err <= 1e-6


def test_phase_decomposition_residual_small():
    """r1 stays O(1) relative to the quadratic gap for nearby node points."""
    h = potentials.harmonic()
    t, x, y = 0.2, 0.5, -0.1
    bvp = classical.solve_bvp(h, t, x, y)
    # node at the stationary point: residual r1 collapses to S-level error
    pd0 = parametrix.phase_decomposition_check(h, t, x, y, x, bvp.xit)
    assert abs(pd0.r1) <= 1e-6
    # displaced node: residual controlled by the squared gaps
    pd = parametrix.phase_decomposition_check(h, t, x, y, x + 0.3, bvp.xit + 0.5)
    assert abs(pd.r1) <= 2.0 * pd.quad_bound


def test_e0_rejects_bad_eps():
    with pytest.raises(ValueError):
        parametrix.e0(potentials.free(), 0.1, 0.0, 0.0, -1.0)


def test_table_grids_horizon_guard():
    h = potentials.harmonic()
    with pytest.raises(classical.HorizonExceeded):
        parametrix.table_grids(h, 4.0, 0.5, (0, 0), (0, 0), QuadratureSpec())
