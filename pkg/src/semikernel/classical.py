"""Classical orbits of the Hamiltonian system x' = xi, xi' = -grad V.

Terminal-data flows (position and momentum fixed at time t) are integrated
backward with fixed-step RK4, co-integrating the variational pair
(dx/dxi_t, dxi/dxi_t) and, on request, the running integral of a phase
density.  The two-point boundary value problem is solved by single shooting
with a damped Newton iteration on the initial momentum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .potentials import PotentialModel, safe_horizon

__all__ = [
    "NonFiniteState",
    "NoConvergence",
    "HorizonExceeded",
    "SingularJacobian",
    "PhasePoint",
    "Orbit",
    "BvpSolution",
    "OrbitGapReport",
    "default_steps",
    "flow_from_terminal",
    "flow_from_initial",
    "solve_bvp",
    "action",
    "jacobian_r0",
    "orbit_gap_check",
    "flow_endpoint",
]


class NonFiniteState(RuntimeError):
    """Orbit state overflowed during integration."""


class NoConvergence(RuntimeError):
    """Shooting iteration failed to reach the boundary tolerance."""


class HorizonExceeded(ValueError):
    """Requested time at or beyond pi/sqrt(M)."""


class SingularJacobian(RuntimeError):
    """Variational Jacobian vanished (conjugate point)."""


@dataclass(frozen=True)
class PhasePoint:
    x: float
    xi: float


@dataclass(frozen=True)
class Orbit:
    """Sampled trajectory on [0, t] with the variational pair.

    ``jx``/``jxi`` are d x(s)/d xi_ref and d xi(s)/d xi_ref, where xi_ref is
    the terminal momentum for terminal-data orbits (so jx(t) = 0, jxi(t) = 1;
    free particle: jx(s) = s - t) and the initial momentum for boundary-data
    orbits (jx(0) = 0, jxi(0) = 1).
    """

    t_grid: np.ndarray
    x: np.ndarray
    xi: np.ndarray
    jx: np.ndarray
    jxi: np.ndarray
    kind: str  # "terminal" or "boundary"

    @property
    def t(self) -> float:
        return float(self.t_grid[-1])

    def state(self, i: int) -> PhasePoint:
        return PhasePoint(float(self.x[i]), float(self.xi[i]))


@dataclass(frozen=True)
class BvpSolution:
    orbit: Orbit
    xi0: float
    xit: float
    action: float
    residual: float


def default_steps(t: float) -> int:
    return max(64, int(math.ceil(t / 0.005)))


def _rhs(potential, s, x, xi, jx, jxi, want_h):
    grad = potential.grad(s, x)
    dx = xi
    dxi = -grad
    djx = jxi
    djxi = -potential.hess(s, x) * jx
    if want_h:
        v = potential.v(s, x)
        dh = 0.5 * xi * xi + v - grad * x
    else:
        dh = None
    return dx, dxi, djx, djxi, dh


def _rk4(potential, s0, s1, x, xi, jx, jxi, steps, record=False, want_h=False):
    """Fixed-step RK4 from s0 to s1 (either direction), vectorized over
    arbitrarily shaped state arrays."""
    x = np.asarray(x, dtype=float).copy()
    xi = np.asarray(xi, dtype=float).copy()
    jx = np.asarray(jx, dtype=float) * np.ones_like(x)
    jxi = np.asarray(jxi, dtype=float) * np.ones_like(x)
    acc = np.zeros_like(x) if want_h else None
    ds = (s1 - s0) / steps
    if record:
        rec = {
            "s": np.empty(steps + 1),
            "x": np.empty((steps + 1,) + x.shape),
            "xi": np.empty_like(np.empty((steps + 1,) + x.shape)),
            "jx": np.empty((steps + 1,) + x.shape),
            "jxi": np.empty((steps + 1,) + x.shape),
        }
        rec["s"][0] = s0
        rec["x"][0], rec["xi"][0] = x, xi
        rec["jx"][0], rec["jxi"][0] = jx, jxi
    s = s0
    for i in range(steps):
        k1 = _rhs(potential, s, x, xi, jx, jxi, want_h)
        k2 = _rhs(
            potential,
            s + 0.5 * ds,
            x + 0.5 * ds * k1[0],
            xi + 0.5 * ds * k1[1],
            jx + 0.5 * ds * k1[2],
            jxi + 0.5 * ds * k1[3],
            want_h,
        )
        k3 = _rhs(
            potential,
            s + 0.5 * ds,
            x + 0.5 * ds * k2[0],
            xi + 0.5 * ds * k2[1],
            jx + 0.5 * ds * k2[2],
            jxi + 0.5 * ds * k2[3],
            want_h,
        )
        k4 = _rhs(
            potential,
            s + ds,
            x + ds * k3[0],
            xi + ds * k3[1],
            jx + ds * k3[2],
            jxi + ds * k3[3],
            want_h,
        )
        x = x + (ds / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        xi = xi + (ds / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        jx = jx + (ds / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        jxi = jxi + (ds / 6.0) * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
        if want_h:
            acc = acc + (ds / 6.0) * (k1[4] + 2 * k2[4] + 2 * k3[4] + k4[4])
        s = s0 + (i + 1) * ds
        if record:
            rec["s"][i + 1] = s
            rec["x"][i + 1], rec["xi"][i + 1] = x, xi
            rec["jx"][i + 1], rec["jxi"][i + 1] = jx, jxi
    if record:
        return x, xi, jx, jxi, acc, rec
    return x, xi, jx, jxi, acc, None


def flow_from_terminal(
    potential: PotentialModel, t: float, x: float, xi: float, steps: int | None = None
) -> Orbit:
    """Integrate backward from (x(t), xi(t)) = (x, xi) to s = 0."""
    if t <= 0:
        raise ValueError("t must be positive")
    if steps is None:
        steps = default_steps(t)
    if steps < 16:
        raise ValueError("steps must be >= 16")
    _, _, _, _, _, rec = _rk4(
        potential, t, 0.0, float(x), float(xi), 0.0, 1.0, steps, record=True
    )
    if not (np.all(np.isfinite(rec["x"])) and np.all(np.isfinite(rec["xi"]))):
        raise NonFiniteState("orbit state overflowed")
    # reorder to ascending s
    sl = slice(None, None, -1)
    return Orbit(
        t_grid=rec["s"][sl].copy(),
        x=rec["x"][sl].copy(),
        xi=rec["xi"][sl].copy(),
        jx=rec["jx"][sl].copy(),
        jxi=rec["jxi"][sl].copy(),
        kind="terminal",
    )


def flow_from_initial(
    potential: PotentialModel, t: float, y: float, v: float, steps: int | None = None
) -> Orbit:
    """Integrate forward from (x(0), xi(0)) = (y, v) to s = t."""
    if t <= 0:
        raise ValueError("t must be positive")
    if steps is None:
        steps = default_steps(t)
    if steps < 16:
        raise ValueError("steps must be >= 16")
    _, _, _, _, _, rec = _rk4(
        potential, 0.0, t, float(y), float(v), 0.0, 1.0, steps, record=True
    )
    if not (np.all(np.isfinite(rec["x"])) and np.all(np.isfinite(rec["xi"]))):
        raise NonFiniteState("orbit state overflowed")
    return Orbit(
        t_grid=rec["s"].copy(),
        x=rec["x"].copy(),
        xi=rec["xi"].copy(),
        jx=rec["jx"].copy(),
        jxi=rec["jxi"].copy(),
        kind="boundary",
    )


def flow_endpoint(potential, t, x, xi, steps=None, want_h=False):
    """Vectorized backward flow: endpoint state (x(0), xi(0)) and optionally
    the integral of h(s) = xi^2/2 + V - grad V . x along the orbit.

    ``x`` and ``xi`` may be arrays of any matching shape; used in bulk by the
    oscillatory-integral quadrature.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if steps is None:
        steps = default_steps(t)
    x0, xi0, jx0, jxi0, acc, _ = _rk4(
        potential, t, 0.0, x, xi, 0.0, 1.0, steps, want_h=want_h
    )
    if not (np.all(np.isfinite(x0)) and np.all(np.isfinite(xi0))):
        raise NonFiniteState("orbit state overflowed")
    # h was accumulated from s=t down to 0; flip sign for int_0^t
    h_int = -acc if want_h else None
    return x0, xi0, jx0, jxi0, h_int


def action(potential: PotentialModel, orbit: Orbit) -> float:
    """Composite Simpson quadrature of xi^2/2 - V along the orbit nodes."""
    v = np.array([potential.v(s, x) for s, x in zip(orbit.t_grid, orbit.x)])
    lagr = 0.5 * orbit.xi**2 - v
    return float(simpson(lagr, x=orbit.t_grid))


def solve_bvp(
    potential: PotentialModel,
    t: float,
    x: float,
    y: float,
    tol: float = 1e-10,
    steps: int | None = None,
    max_iter: int = 50,
) -> BvpSolution:
    """Shooting solution of x(0) = y, x(t) = x with Newton on the initial
    momentum; step halving guards mild nonmonotonicity at curvature kinks."""
    if t <= 0 or tol <= 0:
        raise ValueError("t and tol must be positive")
    if t >= safe_horizon(potential):
        raise HorizonExceeded(f"t={t} >= safe horizon {safe_horizon(potential)}")
    if steps is None:
        steps = default_steps(t)

    def shoot(v):
        xe, xie, jxe, jxie, _, _ = _rk4(
            potential, 0.0, t, float(y), float(v), 0.0, 1.0, steps
        )
        return float(xe), float(xie), float(jxe)

    v = (x - y) / t
    xe, xie, jxe = shoot(v)
    res = xe - x
    for _ in range(max_iter):
        if abs(res) <= tol:
            break
        if abs(jxe) < 1e-14:
            raise SingularJacobian("vanishing shooting Jacobian")
        dv = -res / jxe
        scale = 1.0
        while True:
            v_new = v + scale * dv
            xe_n, xie_n, jxe_n = shoot(v_new)
            res_n = xe_n - x
            if abs(res_n) < abs(res) or scale < 1e-6:
                break
            scale *= 0.5
        v, xe, xie, jxe, res = v_new, xe_n, xie_n, jxe_n, res_n
    else:
        raise NoConvergence(f"shooting did not converge, residual {res:.3e}")

    orbit = flow_from_initial(potential, t, y, v, steps)
    s_val = action(potential, orbit)
    return BvpSolution(
        orbit=orbit,
        xi0=float(v),
        xit=float(orbit.xi[-1]),
        action=s_val,
        residual=abs(res),
    )


def jacobian_r0(potential: PotentialModel, t: float, x: float, xi: float, steps=None):
    """Jacobian of the momentum-to-endpoint map and its deviation from the
    free-particle value: det_ratio = 1/|dx(0)/dxi|, r0 = det_ratio - 1/t."""
    if t <= 0:
        raise ValueError("t must be positive")
    if t >= safe_horizon(potential):
        raise HorizonExceeded(f"t={t} >= safe horizon {safe_horizon(potential)}")
    _, _, jx0, _, _ = flow_endpoint(potential, t, float(x), float(xi), steps)
    jx0 = float(jx0)
    if abs(jx0) < 1e-14:
        raise SingularJacobian("conjugate point: dx(0)/dxi vanished")
    det_ratio = 1.0 / abs(jx0)
    r0 = det_ratio - 1.0 / t
    return det_ratio, r0


@dataclass(frozen=True)
class OrbitGapReport:
    pos_gap: float
    mom_gap: float
    rhs: float
    c1: float
    c2: float


def orbit_gap_check(
    potential: PotentialModel,
    t: float,
    x: float,
    y: float,
    x_prime: float,
    xi: float,
    steps: int | None = None,
) -> OrbitGapReport:
    """Compare the boundary-data orbit (x, y) against the terminal-data orbit
    (x', xi) and report the measured gap constants.

    pos_gap = sup_s |x1(s) - x2(s)| and mom_gap = sup_s |xi1(s) - xi2(s) -
    X/t| with X = (x - x') - (y - x2(0)); both are divided by
    rhs = |x - x'| + |y - x2(0)| (c1), respectively by t*rhs (c2).
    """
    if steps is None:
        steps = default_steps(t)
    bvp = solve_bvp(potential, t, x, y, steps=steps)
    term = flow_from_terminal(potential, t, x_prime, xi, steps)
    x2_0 = float(term.x[0])
    pos_gap = float(np.max(np.abs(bvp.orbit.x - term.x)))
    big_x = (x - x_prime) - (y - x2_0)
    mom_gap = float(np.max(np.abs(bvp.orbit.xi - term.xi - big_x / t)))
    rhs = abs(x - x_prime) + abs(y - x2_0)
    if rhs == 0.0:
        return OrbitGapReport(pos_gap, mom_gap, rhs, 0.0, 0.0)
    return OrbitGapReport(pos_gap, mom_gap, rhs, pos_gap / rhs, mom_gap / (t * rhs))
