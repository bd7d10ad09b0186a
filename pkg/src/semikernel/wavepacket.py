"""Wave packet (Gabor) transform, its adjoint, and closed-form Gaussian
windows under dilation and free evolution.

The base window is the standard Gaussian pi^{-1/4} e^{-x^2/2}; its dilates
and their free evolutions stay complex Gaussians, which gives closed-form
norms for the key estimate sweeps and a fast evaluator for the
oscillatory-integral quadrature.

Measure convention: the transform uses plain dy, the adjoint carries
dy (2pi)^{-1} dxi, so that f = ||phi||^{-2} W*[W f] holds exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "GridTooCoarse",
    "ComplexGaussian",
    "GaborField",
    "standard_window",
    "dilate",
    "evolved_window",
    "wp_transform",
    "wp_adjoint",
    "invert",
    "KeyEstimateSample",
    "key_estimate_check",
    "window_grid_norms",
]

_PI14 = math.pi ** (-0.25)


class GridTooCoarse(ValueError):
    """Sampling grid does not resolve the window."""


@dataclass(frozen=True)
class ComplexGaussian:
    """g(u) = amp * exp(i momentum (u - center) - (u - center)^2 / (2 cwidth2))
    with Re cwidth2 > 0."""

    amp: complex
    center: float = 0.0
    momentum: float = 0.0
    cwidth2: complex = 1.0 + 0.0j

    def __post_init__(self):
        if not (complex(self.cwidth2).real > 0):
            raise ValueError("Re cwidth2 must be positive")

    def __call__(self, u):
        u = np.asarray(u, dtype=float) - self.center
        return self.amp * np.exp(1j * self.momentum * u - u * u / (2.0 * self.cwidth2))

    def l2_norm(self) -> float:
        c = complex(self.cwidth2)
        integral = math.sqrt(math.pi) * abs(c) / math.sqrt(c.real)
        return abs(self.amp) * math.sqrt(integral)

    def abs_width(self) -> float:
        """Width of |g|: |g(u)| = |amp| exp(-(u-center)^2 / (2 w^2))."""
        c = complex(self.cwidth2)
        return abs(c) / math.sqrt(c.real)


def standard_window() -> ComplexGaussian:
    return ComplexGaussian(amp=_PI14)


def dilate(g: ComplexGaussian, eps: float) -> ComplexGaussian:
    """L2-isometric rescaling (D_eps g)(x) = eps^{-1/2} g(x / eps)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return replace(
        g,
        amp=g.amp / math.sqrt(eps),
        center=g.center * eps,
        momentum=g.momentum / eps,
        cwidth2=g.cwidth2 * eps**2,
    )


def evolved_window(eps: float, t: float) -> ComplexGaussian:
    """Free evolution of the dilated standard Gaussian: complex squared width
    eps^2 + i t, amplitude chosen so the L2 norm stays exactly 1."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if t < 0:
        raise ValueError("t must be >= 0")
    c = eps**2 + 1j * t
    amp = _PI14 * math.sqrt(eps) / np.sqrt(c)
    return ComplexGaussian(amp=complex(amp), cwidth2=c)


def _trapz_weights(grid: np.ndarray) -> np.ndarray:
    d = grid[1] - grid[0]
    w = np.full(grid.shape, d)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


@dataclass(frozen=True)
class GaborField:
    x_grid: np.ndarray
    xi_grid: np.ndarray
    values: np.ndarray  # shape (len(x_grid), len(xi_grid))


def wp_transform(window: ComplexGaussian, f, y_grid, x_grid, xi_grid) -> GaborField:
    """W f(x, xi) = int conj(window(y - x)) f(y) e^{-i y xi} dy by trapezoid
    quadrature on the sampling grid of f."""
    y_grid = np.asarray(y_grid, dtype=float)
    f = np.asarray(f)
    x_grid = np.asarray(x_grid, dtype=float)
    xi_grid = np.asarray(xi_grid, dtype=float)
    dy = y_grid[1] - y_grid[0]
    if window.abs_width() < 4 * dy:
        raise GridTooCoarse("window width below 4 grid steps")
    wy = _trapz_weights(y_grid)
    # rows: window centers x, columns: sample points y
    win = np.conj(window(y_grid[None, :] - x_grid[:, None]))
    phases = np.exp(-1j * np.outer(y_grid, xi_grid))
    values = (win * (f * wy)[None, :]) @ phases
    return GaborField(x_grid=x_grid, xi_grid=xi_grid, values=values)


def wp_adjoint(window: ComplexGaussian, field: GaborField, out_grid=None) -> np.ndarray:
    """W* F(x) = (2pi)^{-1} iint window(x - y) F(y, xi) e^{i x xi} dy dxi."""
    if out_grid is None:
        out_grid = field.x_grid
    out_grid = np.asarray(out_grid, dtype=float)
    y_grid = field.x_grid
    dy = y_grid[1] - y_grid[0]
    if window.abs_width() < 4 * dy:
        raise GridTooCoarse("window width below 4 grid steps")
    wy = _trapz_weights(y_grid)
    wxi = _trapz_weights(field.xi_grid)
    phases = np.exp(1j * np.outer(field.xi_grid, out_grid))  # (nxi, nx_out)
    partial = (field.values * wxi[None, :]) @ phases  # (ny, nx_out)
    win = window(out_grid[:, None] - y_grid[None, :])  # (nx_out, ny)
    out = np.sum(win * (wy[None, :] * partial.T), axis=1)
    return out / (2.0 * math.pi)


def invert(window: ComplexGaussian, field: GaborField, out_grid=None) -> np.ndarray:
    """f = ||window||^{-2} W*[W f]."""
    return wp_adjoint(window, field, out_grid) / window.l2_norm() ** 2


@dataclass(frozen=True)
class KeyEstimateSample:
    alpha: int
    t: float
    eps: float
    lhs_l1: float
    lhs_l2: float
    rhs_l1: float
    rhs_l2: float

    @property
    def ratio_l1(self) -> float:
        return self.lhs_l1 / self.rhs_l1

    @property
    def ratio_l2(self) -> float:
        return self.lhs_l2 / self.rhs_l2


def _abs_moments(window: ComplexGaussian, alpha: int):
    """Closed-form ||u^alpha |g|||_{L1} and ||u^alpha g||_{L2} for a centered
    complex Gaussian."""
    a = abs(window.amp)
    w = window.abs_width()
    if alpha == 0:
        l1 = a * w * math.sqrt(2 * math.pi)
        l2sq = a * a * w * math.sqrt(math.pi)
    elif alpha == 1:
        l1 = a * 2 * w * w
        l2sq = a * a * 0.5 * w**3 * math.sqrt(math.pi)
    elif alpha == 2:
        l1 = a * w**3 * math.sqrt(2 * math.pi)
        l2sq = a * a * 0.75 * w**5 * math.sqrt(math.pi)
    else:
        raise ValueError("alpha must be 0, 1 or 2")
    return l1, math.sqrt(l2sq)


def key_estimate_check(alpha: int, t: float, eps: float) -> KeyEstimateSample:
    """Measured-over-bound ratios for the moment estimates of the freely
    evolved dilated window (reference constants taken as 1)."""
    if t <= 0 or eps <= 0:
        raise ValueError("t and eps must be positive")
    win = evolved_window(eps, t)
    lhs_l1, lhs_l2 = _abs_moments(win, alpha)
    scale = (eps + t / eps) ** alpha
    ksum = sum((eps / math.sqrt(t)) ** k for k in range(3))  # k = 0 .. n+1, n=1
    rhs_l1 = scale * (t / eps) ** 0.5 * ksum
    rhs_l2 = scale
    return KeyEstimateSample(alpha, t, eps, lhs_l1, lhs_l2, rhs_l1, rhs_l2)


def window_grid_norms(window: ComplexGaussian, alpha: int, n_points: int = 200001):
    """Grid-quadrature cross-check of the closed-form moments."""
    half = 12.0 * window.abs_width()
    u = np.linspace(window.center - half, window.center + half, n_points)
    vals = np.abs(window(u))
    mono = (np.abs(u) ** alpha) * vals
    l1 = float(np.trapezoid(mono, u))
    l2 = float(math.sqrt(np.trapezoid(mono**2, u)))
    return l1, l2
