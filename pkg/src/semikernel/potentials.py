"""Potential models: evaluator bundles (V, V', V'') with a global Hessian bound.

All evaluators are vectorized over position arrays and pure, so they are safe
for unrestricted concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "PotentialModel",
    "AssumptionReport",
    "free",
    "stark",
    "harmonic",
    "abscubed",
    "breathing",
    "from_name",
    "safe_horizon",
    "check_assumption",
]


@dataclass(frozen=True)
class PotentialModel:
    """Bundle of V, grad V and Hess V with a declared global curvature bound.

    ``hess_bound`` is the supremum of |V''| over all (t, x); the short-time
    theory is valid below the horizon pi/sqrt(hess_bound).
    """

    id: str
    v: Callable = field(repr=False)
    grad: Callable = field(repr=False)
    hess: Callable = field(repr=False)
    hess_bound: float = 0.0
    time_dependent: bool = False

    def eval(self, t, x):
        """Return the triple (V, grad V, Hess V) at (t, x)."""
        return self.v(t, x), self.grad(t, x), self.hess(t, x)


def free() -> PotentialModel:
    return PotentialModel(
        id="free",
        v=lambda t, x: np.zeros_like(np.asarray(x, dtype=float)),
        grad=lambda t, x: np.zeros_like(np.asarray(x, dtype=float)),
        hess=lambda t, x: np.zeros_like(np.asarray(x, dtype=float)),
        hess_bound=0.0,
    )


def stark(e_field: float = 1.0) -> PotentialModel:
    e = float(e_field)
    return PotentialModel(
        id=f"stark:E={e:g}",
        v=lambda t, x: e * np.asarray(x, dtype=float),
        grad=lambda t, x: np.full_like(np.asarray(x, dtype=float), e),
        hess=lambda t, x: np.zeros_like(np.asarray(x, dtype=float)),
        hess_bound=0.0,
    )


def harmonic() -> PotentialModel:
    return PotentialModel(
        id="harmonic",
        v=lambda t, x: 0.5 * np.asarray(x, dtype=float) ** 2,
        grad=lambda t, x: np.asarray(x, dtype=float),
        hess=lambda t, x: np.ones_like(np.asarray(x, dtype=float)),
        hess_bound=1.0,
    )


def _abscubed_v(t, x):
    x = np.asarray(x, dtype=float)
    r = np.abs(x)
    inner = r**3 / 6.0
    outer = 1.0 / 6.0 + (r - 1.0) / 2.0 + (r - 1.0) ** 2 / 2.0
    return np.where(r <= 1.0, inner, outer)


def _abscubed_grad(t, x):
    x = np.asarray(x, dtype=float)
    r = np.abs(x)
    fp = np.where(r <= 1.0, r**2 / 2.0, 0.5 + (r - 1.0))
    return np.sign(x) * fp


def _abscubed_hess(t, x):
    x = np.asarray(x, dtype=float)
    return np.minimum(np.abs(x), 1.0)


def abscubed() -> PotentialModel:
    """C2-but-not-C3 potential: |x|^3/6 inside |x|<=1, quadratic continuation
    outside.  V'' = min(|x|, 1), so the curvature bound is exactly 1."""
    return PotentialModel(
        id="abscubed",
        v=_abscubed_v,
        grad=_abscubed_grad,
        hess=_abscubed_hess,
        hess_bound=1.0,
    )


def breathing() -> PotentialModel:
    """Time-dependent oscillator V = (1 + sin(t)/2) x^2/2."""
    return PotentialModel(
        id="breathing",
        v=lambda t, x: (1.0 + 0.5 * math.sin(t)) * np.asarray(x, dtype=float) ** 2 / 2.0,
        grad=lambda t, x: (1.0 + 0.5 * math.sin(t)) * np.asarray(x, dtype=float),
        hess=lambda t, x: np.full_like(
            np.asarray(x, dtype=float), 1.0 + 0.5 * math.sin(t)
        ),
        hess_bound=1.5,
        time_dependent=True,
    )


def from_name(name: str) -> PotentialModel:
    """Parse a potential selector string: ``free``, ``stark:E=<float>``,
    ``harmonic``, ``abscubed``, ``breathing``."""
    name = name.strip()
    if name == "free":
        return free()
    if name == "harmonic":
        return harmonic()
    if name == "abscubed":
        return abscubed()
    if name == "breathing":
        return breathing()
    if name.startswith("stark"):
        if name == "stark":
            return stark()
        prefix = "stark:E="
        if not name.startswith(prefix):
            raise ValueError(f"bad stark selector {name!r}, expected stark:E=<float>")
        return stark(float(name[len(prefix):]))
    raise ValueError(f"unknown potential {name!r}")


def safe_horizon(potential: PotentialModel) -> float:
    """Time below which the two-point boundary value problem is uniquely
    solvable: pi/sqrt(M), or +inf when the potential has no curvature."""
    m = potential.hess_bound
    if m < 0:
        raise ValueError("hess_bound must be >= 0")
    if m == 0.0:
        return math.inf
    return math.pi / math.sqrt(m)


@dataclass(frozen=True)
class AssumptionReport:
    potential_id: str
    max_abs_hess: float
    max_grad_error: float
    hess_ok: bool
    grad_ok: bool

    @property
    def passed(self) -> bool:
        return self.hess_ok and self.grad_ok


def check_assumption(
    potential: PotentialModel,
    t_samples=None,
    x_samples=None,
    fd_step: float = 1e-5,
) -> AssumptionReport:
    """Numerically validate the curvature bound and gradient consistency.

    The Hessian samples must stay below ``hess_bound`` (up to round-off) and
    the analytic gradient must agree with central differences of V to
    relative tolerance 1e-5.  Violations fail the report, not the process.
    """
    if t_samples is None:
        t_samples = np.linspace(0.0, 2.0 * math.pi, 64)
    if x_samples is None:
        x_samples = np.linspace(-8.0, 8.0, 512)
    t_samples = np.atleast_1d(np.asarray(t_samples, dtype=float))
    x_samples = np.atleast_1d(np.asarray(x_samples, dtype=float))
    if t_samples.size == 0 or x_samples.size == 0:
        raise ValueError("sample sets must be nonempty")

    max_hess = 0.0
    max_grad_err = 0.0
    h = fd_step
    for t in t_samples:
        hess = potential.hess(t, x_samples)
        max_hess = max(max_hess, float(np.max(np.abs(hess))))
        grad = potential.grad(t, x_samples)
        fd = (potential.v(t, x_samples + h) - potential.v(t, x_samples - h)) / (2 * h)
        err = np.abs(fd - grad) / (1.0 + np.abs(grad))
        max_grad_err = max(max_grad_err, float(np.max(err)))

    hess_ok = max_hess <= potential.hess_bound * (1.0 + 1e-9)
    grad_ok = max_grad_err <= 1e-5
    return AssumptionReport(
        potential_id=potential.id,
        max_abs_hess=max_hess,
        max_grad_error=max_grad_err,
        hess_ok=hess_ok,
        grad_ok=grad_ok,
    )
