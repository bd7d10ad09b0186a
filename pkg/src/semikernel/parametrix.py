"""Oscillatory-integral approximation of the propagator kernel.

The approximate kernel is a phase-space integral of evolved Gaussian windows
against classical-orbit phases:

    e0(t, x, y) = (2 pi)^{-1} iint  phi_t(x - x')  conj(phi_0(y - X2))
                  exp(-i int_0^t h ds)  exp(-i y Xi2)  exp(i x xi)  dx' dxi,

with (X2, Xi2) the backward terminal-data orbit endpoint for node (x', xi)
and h = xi^2/2 + V - grad V . x along that orbit.  Orbit endpoint data is
tabulated once per (t, grid) and reused across kernel samples.

Quadrature is tensor trapezoid on a truncated box; node spacings resolve
both the Gaussian envelopes (>= 8 nodes per width) and the phase (bounded
phase change per step), which keeps the trapezoid error far below the
envelope truncation threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import classical
from .potentials import PotentialModel, safe_horizon
from .wavepacket import ComplexGaussian, evolved_window

__all__ = [
    "TruncationTooTight",
    "QuadratureSpec",
    "OrbitTable",
    "AmplitudeSample",
    "table_grids",
    "build_table",
    "h_integral",
    "e0",
    "leading_term",
    "amplitude_a0",
    "amplitude_window",
    "apply_to_gaussian",
    "phase_decomposition_check",
    "PhaseDecomposition",
]

_TWO_PI = 2.0 * math.pi
_BRANCH = np.exp(-0.25j * math.pi)


class TruncationTooTight(RuntimeError):
    """Integrand not negligible on the quadrature box boundary."""


@dataclass(frozen=True)
class QuadratureSpec:
    trunc_sigma: float = 10.0
    nodes_x: int = 64
    nodes_xi: int = 64
    phase_step_cap: float = math.pi / 4.0

    def __post_init__(self):
        if self.nodes_x < 32 or self.nodes_xi < 32:
            raise ValueError("node counts must be >= 32")
        if self.trunc_sigma < 6:
            raise ValueError("trunc_sigma must be >= 6")
        if self.phase_step_cap <= 0:
            raise ValueError("phase_step_cap must be positive")


@dataclass(frozen=True)
class OrbitTable:
    """Backward-orbit endpoint data on a tensor (x', xi) grid."""

    potential_id: str
    t: float
    xp: np.ndarray
    xi: np.ndarray
    x2_0: np.ndarray  # (n_xp, n_xi)
    xi2_0: np.ndarray
    h_int: np.ndarray


def _widths(eps: float, t: float):
    wt = math.sqrt(eps**4 + t * t) / eps
    return wt, eps


def _grid(lo: float, hi: float, step: float, min_nodes: int) -> np.ndarray:
    n = max(min_nodes, int(math.ceil((hi - lo) / step)) + 1)
    return np.linspace(lo, hi, n)


def table_grids(
    potential: PotentialModel,
    t: float,
    eps: float,
    x_window: tuple[float, float],
    y_window: tuple[float, float],
    spec: QuadratureSpec,
):
    """Quadrature grids covering every kernel sample (x, y) in the given
    windows.  The x' box pads the x window by trunc_sigma widths of phi_t;
    the xi box covers the transport condition |y - x'+ t xi| <~ trunc_sigma
    widths of phi_0, with a safety margin for orbit curvature."""
    if not (0 < t < safe_horizon(potential)):
        raise classical.HorizonExceeded(f"t={t} outside (0, horizon)")
    wt, w0 = _widths(eps, t)
    cap = spec.phase_step_cap
    margin = 1.2
    m_bound = potential.hess_bound

    rx = spec.trunc_sigma * wt
    xp_lo = x_window[0] - rx
    xp_hi = x_window[1] + rx

    rxi = spec.trunc_sigma * w0 / t * margin + 2.0
    xi_lo = (xp_lo - y_window[1]) / t - rxi
    xi_hi = (xp_hi - y_window[0]) / t + rxi

    # phase gradient along x' is O(M t (|x| + t |xi|) + |y| M t)
    xabs = max(abs(xp_lo), abs(xp_hi)) + 1.0
    xiabs = max(abs(xi_lo), abs(xi_hi))
    yabs = max(abs(y_window[0]), abs(y_window[1])) + 1.0
    gx = 1.5 * m_bound * t * (xabs + t * xiabs + yabs)
    dxp = min(wt, w0) / 8.0
    if gx > 0:
        dxp = min(dxp, cap / gx)

    # phase gradient along xi stays local: |(x - x') - (y - X2)| plus margin
    x_max_local = rx + spec.trunc_sigma * w0 * margin + 1.0
    dxi = min((w0 / t) / 8.0, cap / x_max_local)

    xp = _grid(xp_lo, xp_hi, dxp, spec.nodes_x)
    xi = _grid(xi_lo, xi_hi, dxi, spec.nodes_xi)
    return xp, xi


def build_table(
    potential: PotentialModel,
    t: float,
    xp: np.ndarray,
    xi: np.ndarray,
    steps: int | None = None,
) -> OrbitTable:
    """Vectorized backward flow over the tensor grid, accumulating the
    phase-density integral along each orbit."""
    xp_m, xi_m = np.meshgrid(xp, xi, indexing="ij")
    x2_0, xi2_0, _, _, h_int = classical.flow_endpoint(
        potential, t, xp_m, xi_m, steps=steps, want_h=True
    )
    return OrbitTable(
        potential_id=potential.id,
        t=t,
        xp=np.asarray(xp, dtype=float),
        xi=np.asarray(xi, dtype=float),
        x2_0=x2_0,
        xi2_0=xi2_0,
        h_int=h_int,
    )


def h_integral(
    potential: PotentialModel,
    t: float,
    x_prime: float,
    xi: float,
    steps: int | None = None,
):
    """Endpoint (X2, Xi2) of the backward orbit from (x', xi) and the
    integral of h(s) = xi(s)^2/2 + V - grad V . x(s) over [0, t]."""
    x2, xi2, _, _, h = classical.flow_endpoint(
        potential, t, float(x_prime), float(xi), steps=steps, want_h=True
    )
    return float(x2), float(xi2), float(h)


def _trapz_weights(grid: np.ndarray) -> np.ndarray:
    d = grid[1] - grid[0]
    w = np.full(grid.shape, d)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _local_slice(table: OrbitTable, t, x, y, eps, spec: QuadratureSpec):
    """Restrict the table to the box relevant for the sample (x, y)."""
    wt, w0 = _widths(eps, t)
    rx = spec.trunc_sigma * wt
    r_xi = (rx + spec.trunc_sigma * w0 * 1.2) / t + 2.0
    ia = np.searchsorted(table.xp, [x - rx - 1e-12, x + rx + 1e-12])
    xi_c = (x - y) / t
    ib = np.searchsorted(table.xi, [xi_c - r_xi, xi_c + r_xi])
    sa = slice(max(ia[0] - 1, 0), min(ia[1] + 1, table.xp.size))
    sb = slice(max(ib[0] - 1, 0), min(ib[1] + 1, table.xi.size))
    if sa.stop - sa.start < 8 or sb.stop - sb.start < 8:
        raise TruncationTooTight("table does not cover the sample's box")
    return sa, sb


def e0(
    potential: PotentialModel,
    t: float,
    x: float,
    y: float,
    eps: float,
    spec: QuadratureSpec | None = None,
    table: OrbitTable | None = None,
) -> complex:
    """Kernel sample by tensor trapezoid quadrature over the orbit table."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if spec is None:
        spec = QuadratureSpec()
    if table is None:
        xp, xi = table_grids(potential, t, eps, (x, x), (y, y), spec)
        table = build_table(potential, t, xp, xi)
    sa, sb = _local_slice(table, t, x, y, eps, spec)
    xp = table.xp[sa]
    xi = table.xi[sb]
    x2_0 = table.x2_0[sa, sb]
    xi2_0 = table.xi2_0[sa, sb]
    h_int = table.h_int[sa, sb]

    phi_t = evolved_window(eps, t)
    phi_0 = evolved_window(eps, 0.0)
    a = phi_t(x - xp)  # (na,)
    b = np.conj(phi_0(y - x2_0))  # (na, nb)
    envelope = np.abs(a)[:, None] * np.abs(b)
    peak = envelope.max()
    edge = max(
        envelope[0].max(), envelope[-1].max(), envelope[:, 0].max(), envelope[:, -1].max()
    )
    if peak > 0 and edge > 1e-10 * peak:
        raise TruncationTooTight(
            f"boundary envelope {edge / peak:.2e} of peak exceeds 1e-10"
        )
    phase = np.exp(1j * (-h_int - y * xi2_0 + x * xi[None, :]))
    wa = _trapz_weights(xp)
    wb = _trapz_weights(xi)
    integrand = a[:, None] * b * phase
    return complex(np.sum((wa[:, None] * wb[None, :]) * integrand) / _TWO_PI)


def leading_term(
    potential: PotentialModel, t: float, x: float, y: float, steps=None
) -> complex:
    """(2 pi i t)^{-1/2} e^{i S(t,x,y)} with the principal branch matching
    the free kernel as t -> 0."""
    bvp = classical.solve_bvp(potential, t, x, y, steps=steps)
    return complex(_BRANCH / math.sqrt(_TWO_PI * t) * np.exp(1j * bvp.action))


@dataclass(frozen=True)
class AmplitudeSample:
    t: float
    x: float
    y: float
    eps: float
    e0: complex
    s_action: float
    a0: complex


def amplitude_a0(
    potential: PotentialModel,
    t: float,
    x: float,
    y: float,
    eps: float,
    spec: QuadratureSpec | None = None,
    table: OrbitTable | None = None,
) -> AmplitudeSample:
    """Amplitude relative to the leading term: a0 = e0 / [(2 pi i t)^{-1/2}
    e^{iS}]."""
    val = e0(potential, t, x, y, eps, spec, table)
    bvp = classical.solve_bvp(potential, t, x, y)
    lead = complex(_BRANCH / math.sqrt(_TWO_PI * t) * np.exp(1j * bvp.action))
    return AmplitudeSample(
        t=t, x=x, y=y, eps=eps, e0=val, s_action=bvp.action, a0=val / lead
    )


def amplitude_window(
    potential: PotentialModel,
    t: float,
    xs,
    ys,
    eps: float,
    spec: QuadratureSpec | None = None,
    steps: int | None = None,
) -> np.ndarray:
    """Amplitude a0 over a tensor (x, y) window, sharing one orbit table."""
    if spec is None:
        spec = QuadratureSpec()
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    xp, xi = table_grids(
        potential, t, eps, (xs.min(), xs.max()), (ys.min(), ys.max()), spec
    )
    table = build_table(potential, t, xp, xi, steps=steps)
    out = np.empty((xs.size, ys.size), dtype=complex)
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            out[i, j] = amplitude_a0(potential, t, x, y, eps, spec, table).a0
    return out


def _gaussian_integral(a, b, c):
    """int exp(-a y^2 + b y + c) dy for Re a > 0 (vectorized)."""
    return np.sqrt(np.pi / a) * np.exp(b * b / (4.0 * a) + c)


def apply_to_gaussian(
    potential: PotentialModel,
    t: float,
    eps: float,
    probe: ComplexGaussian,
    out_x,
    spec: QuadratureSpec | None = None,
    steps: int | None = None,
) -> np.ndarray:
    """Apply the kernel e0(t, ., .) as a continuum integral operator to a
    complex Gaussian; the inner y-integral is evaluated in closed form, so
    only the phase-space quadrature is numerical.

    Used for operator-norm experiments: the probe's image under e0 is
    compared against the reference split-step propagation of the same probe.
    """
    if spec is None:
        spec = QuadratureSpec()
    out_x = np.asarray(out_x, dtype=float)
    wt, w0 = _widths(eps, t)
    cap = spec.phase_step_cap
    margin = 1.2

    wp = probe.abs_width()
    y0 = probe.center
    nu = probe.momentum

    rx = spec.trunc_sigma * wt
    xp_lo = float(out_x.min()) - rx
    xp_hi = float(out_x.max()) + rx
    # momentum spread of the probe's windowed transform: RSS of the window
    # and probe inverse widths
    sigma_xi = math.sqrt(1.0 / eps**2 + 1.0 / wp**2)
    r_nu = spec.trunc_sigma * sigma_xi * margin + 2.0
    xi_lo, xi_hi = nu - r_nu, nu + r_nu

    m_bound = potential.hess_bound
    xabs = max(abs(xp_lo), abs(xp_hi)) + 1.0
    xiabs = max(abs(xi_lo), abs(xi_hi))
    gx = 1.5 * m_bound * t * (xabs + t * xiabs + abs(y0) + 1.0)
    dxp = min(wt, math.sqrt(eps**2 + wp**2)) / 8.0
    if gx > 0:
        dxp = min(dxp, cap / gx)
    x_max_local = rx + spec.trunc_sigma * math.sqrt(eps**2 + wp**2) * margin + 2.0
    dxi = min(sigma_xi / 8.0, cap / x_max_local)

    xp = _grid(xp_lo, xp_hi, dxp, spec.nodes_x)
    xi = _grid(xi_lo, xi_hi, dxi, spec.nodes_xi)
    table = build_table(potential, t, xp, xi, steps=steps)

    # closed-form wave packet transform of the probe at the orbit endpoints
    amp0 = evolved_window(eps, 0.0).amp
    s2 = complex(probe.cwidth2)
    a = 1.0 / (2.0 * eps**2) + 1.0 / (2.0 * s2)
    b = table.x2_0 / eps**2 + y0 / s2 + 1j * (nu - table.xi2_0)
    c = -(table.x2_0**2) / (2.0 * eps**2) - y0**2 / (2.0 * s2) - 1j * nu * y0
    wp_val = np.conj(amp0) * probe.amp * _gaussian_integral(a, b, c)

    q = wp_val * np.exp(-1j * table.h_int)
    wa = _trapz_weights(xp)
    wb = _trapz_weights(xi)
    q = q * wa[:, None] * wb[None, :]

    env = np.abs(wp_val)
    peak = env.max()
    edge = max(env[0].max(), env[-1].max(), env[:, 0].max(), env[:, -1].max())
    if peak > 0 and edge > 1e-10 * peak:
        raise TruncationTooTight(
            f"probe boundary envelope {edge / peak:.2e} of peak exceeds 1e-10"
        )

    phases = np.exp(1j * np.outer(xi, out_x))  # (n_xi, n_out)
    partial = q @ phases  # (n_xp, n_out)
    phi_t = evolved_window(eps, t)
    win = phi_t(out_x[None, :] - xp[:, None])  # (n_xp, n_out)
    return np.sum(win * partial, axis=0) / _TWO_PI


@dataclass(frozen=True)
class PhaseDecomposition:
    r1: float
    quad_bound: float
    phase: float
    action: float


def phase_decomposition_check(
    potential: PotentialModel,
    t: float,
    x: float,
    y: float,
    x_prime: float,
    xi: float,
    steps: int | None = None,
) -> PhaseDecomposition:
    """Residual of the short-time phase decomposition:

    phase(t,x,y,x',xi) = S(t,x,y) - X^2/(2t) + t r1,   X = (x-x') - (y-X2).

    Returns the measured r1 together with the quadratic gap
    (x-x')^2 + (y-X2)^2 that bounds it.
    """
    x2_0, xi2_0, h_int = h_integral(potential, t, x_prime, xi, steps)
    phase = -h_int - y * xi2_0 + x * xi
    bvp = classical.solve_bvp(potential, t, x, y, steps=steps)
    big_x = (x - x_prime) - (y - x2_0)
    r1 = (phase - bvp.action + big_x**2 / (2.0 * t)) / t
    quad_bound = (x - x_prime) ** 2 + (y - x2_0) ** 2
    return PhaseDecomposition(
        r1=float(r1), quad_bound=float(quad_bound), phase=float(phase), action=bvp.action
    )
