import math

import numpy as np
import pytest

from semikernel import potentials


def test_free_is_zero():
    f = potentials.free()
    x = np.linspace(-5, 5, 11)
    assert np.all(f.v(0.0, x) == 0)
    assert np.all(f.grad(1.0, x) == 0)
    assert f.hess_bound == 0.0


def test_stark_linear():
    s = potentials.stark(2.5)
    x = np.linspace(-3, 3, 7)
    assert np.allclose(s.v(0.0, x), 2.5 * x)
    assert np.allclose(s.grad(0.0, x), 2.5)
    assert np.all(s.hess(0.0, x) == 0)


def test_harmonic_values():
    h = potentials.harmonic()
    v, g, hess = h.eval(0.0, np.array([2.0]))
    assert v[0] == pytest.approx(2.0)
    assert g[0] == pytest.approx(2.0)
    assert hess[0] == pytest.approx(1.0)


def test_abscubed_c2_matching():
    """Value, gradient and hessian are continuous across |x| = 1."""
    a = potentials.abscubed()
    for side in (-1.0, 1.0):
        lo, hi = side * (1 - 1e-9), side * (1 + 1e-9)
        assert a.v(0.0, lo) == pytest.approx(a.v(0.0, hi), abs=1e-8)
        assert a.grad(0.0, lo) == pytest.approx(a.grad(0.0, hi), abs=1e-8)
        assert a.hess(0.0, lo) == pytest.approx(a.hess(0.0, hi), abs=1e-8)
    # hessian is min(|x|, 1): saturates at the bound
    assert a.hess(0.0, 5.0) == pytest.approx(1.0)
    assert a.hess(0.0, 0.25) == pytest.approx(0.25)
    assert a.hess_bound == 1.0


def test_breathing_time_dependence():
    b = potentials.breathing()
    assert b.time_dependent
    assert b.v(0.0, 2.0) == pytest.approx(2.0)
    assert b.v(math.pi / 2, 2.0) == pytest.approx(3.0)
    assert b.hess_bound == pytest.approx(1.5)


def test_from_name_roundtrip():
    for name in ("free", "harmonic", "abscubed", "breathing"):
        assert potentials.from_name(name).id == name
    s = potentials.from_name("stark:E=0.5")
    assert s.v(0.0, 2.0) == pytest.approx(1.0)
    assert potentials.from_name("stark").grad(0.0, 0.0) == pytest.approx(1.0)


def test_from_name_rejects_unknown():
    with pytest.raises(ValueError):
        potentials.from_name("coulomb")
    with pytest.raises(ValueError):
        potentials.from_name("stark:B=1")


def test_safe_horizon():
    assert potentials.safe_horizon(potentials.free()) == math.inf
    assert potentials.safe_horizon(potentials.harmonic()) == pytest.approx(math.pi)
    assert potentials.safe_horizon(potentials.breathing()) == pytest.approx(
        math.pi / math.sqrt(1.5)
    )


def test_check_assumption_passes_builtins():
    for name in ("free", "harmonic", "abscubed", "breathing"):
        report = potentials.check_assumption(potentials.from_name(name))
        assert report.passed, name


def test_check_assumption_flags_bad_bound():
    """A potential declaring a too-small curvature bound must fail."""
    bad = potentials.PotentialModel(
        id="bad",
        v=lambda t, x: np.asarray(x, dtype=float) ** 2,
        grad=lambda t, x: 2.0 * np.asarray(x, dtype=float),
        hess=lambda t, x: np.full_like(np.asarray(x, dtype=float), 2.0),
        hess_bound=1.0,
    )
    report = potentials.check_assumption(bad)
    assert not report.hess_ok
    assert not report.passed


def test_check_assumption_flags_wrong_gradient():
    bad = potentials.PotentialModel(
        id="bad-grad",
        v=lambda t, x: np.asarray(x, dtype=float) ** 2 / 2.0,
        grad=lambda t, x: 0.9 * np.asarray(x, dtype=float),
        hess=lambda t, x: np.ones_like(np.asarray(x, dtype=float)),
        hess_bound=1.0,
    )
    report = potentials.check_assumption(bad)
    assert not report.grad_ok
