"""Rate experiments: amplitude deviation O(t) and remainder O(t^2).

Two experiments share the config/report plumbing:

* ``amplitude_rate_experiment`` measures err(t) = max |a0 - 1| over an
  (x, y) sample window, with the window scale eps tied to t (eps = sqrt t
  by default).
* ``remainder_rate_experiment`` measures how far the approximate kernel is
  from the reference split-step propagator as an operator: a fixed family
  of Gaussian probes is pushed through both, and err(t) is the largest
  relative L2 residual.  This is a lower bound for the operator norm of
  the remainder, so quadratic decay here evidences the O(t^2) claim.

Reports carry a log-log least-squares slope plus an ``exact`` flag for the
closed-form cases where the error sits at the quadrature floor and a rate
fit would be meaningless.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import parametrix, propagator
from .parametrix import QuadratureSpec
from .potentials import PotentialModel, from_name, safe_horizon
from .propagator import GridSpec
from .wavepacket import ComplexGaussian

__all__ = [
    "DegenerateFit",
    "ExperimentConfig",
    "RateReport",
    "thread_cap",
    "probe_family",
    "fit_rate",
    "amplitude_rate_experiment",
    "remainder_rate_experiment",
    "emit_report",
    "default_config",
]

AMPLITUDE_EXACT_TOL = 1e-6
REMAINDER_EXACT_TOL = 1e-4
_PI14 = math.pi ** (-0.25)


class DegenerateFit(RuntimeError):
    """Rate fit impossible: too few points, non-positive errors, or no
    spread in t."""


def thread_cap() -> int:
    """Worker cap from SEMIKERNEL_THREADS (>= 1).  The numerical reductions
    are fixed-order regardless of the cap, so reports are byte-identical
    across settings."""
    raw = os.environ.get("SEMIKERNEL_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(n, 1)


@dataclass(frozen=True)
class ExperimentConfig:
    potential: str
    t_values: tuple
    window: tuple  # (x0, x1, nx, y0, y1, ny)
    grid_n: int = 2048
    grid_l: float = 16.0
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    eps_rule: str | float = "sqrt_t"
    steps: int = 1024
    out_dir: str = "."

    def __post_init__(self):
        if len(self.t_values) < 4:
            raise ValueError("need at least 4 t values")
        horizon = safe_horizon(self.model())
        for t in self.t_values:
            if not (0.0 < t < horizon):
                raise ValueError(f"t={t} outside (0, safe horizon {horizon:g})")
        x0, x1, nx, y0, y1, ny = self.window
        if not (x0 <= x1 and y0 <= y1 and nx >= 1 and ny >= 1):
            raise ValueError("bad window")
        if isinstance(self.eps_rule, str) and self.eps_rule != "sqrt_t":
            raise ValueError("eps_rule must be 'sqrt_t' or a positive number")
        if not isinstance(self.eps_rule, str) and not self.eps_rule > 0:
            raise ValueError("fixed eps must be positive")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")

    def model(self) -> PotentialModel:
        return from_name(self.potential)

    def eps_for(self, t: float) -> float:
        if self.eps_rule == "sqrt_t":
            return math.sqrt(t)
        return float(self.eps_rule)

    def grid(self) -> GridSpec:
        return GridSpec(half_len=self.grid_l, n_points=self.grid_n)

    def to_dict(self) -> dict:
        return {
            "potential": self.potential,
            "t_values": list(self.t_values),
            "window": {
                "x0": self.window[0],
                "x1": self.window[1],
                "nx": self.window[2],
                "y0": self.window[3],
                "y1": self.window[4],
                "ny": self.window[5],
            },
            "grid": {"n": self.grid_n, "l": self.grid_l},
            "quad": {
                "nodes_x": self.quad.nodes_x,
                "nodes_xi": self.quad.nodes_xi,
                "trunc_sigma": self.quad.trunc_sigma,
            },
            "eps_rule": self.eps_rule,
            "steps": self.steps,
            "out_dir": self.out_dir,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        w = d["window"]
        q = d.get("quad", {})
        quad = QuadratureSpec(
            trunc_sigma=q.get("trunc_sigma", 10.0),
            nodes_x=q.get("nodes_x", 64),
            nodes_xi=q.get("nodes_xi", 64),
        )
        g = d.get("grid", {"n": 2048, "l": 16.0})
        return cls(
            potential=d["potential"],
            t_values=tuple(float(t) for t in d["t_values"]),
            window=(w["x0"], w["x1"], int(w["nx"]), w["y0"], w["y1"], int(w["ny"])),
            grid_n=int(g["n"]),
            grid_l=float(g["l"]),
            quad=quad,
            eps_rule=d.get("eps_rule", "sqrt_t"),
            steps=int(d.get("steps", 1024)),
            out_dir=d.get("out_dir", "."),
        )

    @classmethod
    def from_json_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def default_config(potential: str, kind: str = "amplitude") -> ExperimentConfig:
    if kind == "amplitude":
        return ExperimentConfig(
            potential=potential,
            t_values=(0.32, 0.16, 0.08, 0.04, 0.02),
            window=(-1.0, 1.0, 5, -1.0, 1.0, 5),
        )
    if kind == "remainder":
        return ExperimentConfig(
            potential=potential,
            t_values=(0.32, 0.16, 0.08, 0.04),
            window=(-1.0, 1.0, 3, -1.0, 1.0, 3),
            grid_n=1024,
        )
    raise ValueError(f"unknown experiment kind {kind!r}")


@dataclass(frozen=True)
class RateReport:
    name: str
    rows: tuple  # ((t, err), ...) descending in t
    slope: float
    intercept: float
    r2: float
    exact: bool
    meta: dict


def fit_rate(points) -> tuple:
    """Ordinary least squares of log err against log t."""
    pts = [(float(t), float(e)) for t, e in points]
    if len(pts) < 3:
        raise DegenerateFit("need at least 3 points")
    if any(e <= 0 for _, e in pts):
        raise DegenerateFit("errors must be positive")
    lt = np.log(np.array([t for t, _ in pts]))
    le = np.log(np.array([e for _, e in pts]))
    if np.ptp(lt) == 0:
        raise DegenerateFit("all t values identical")
    slope, intercept = np.polyfit(lt, le, 1)
    resid = le - (slope * lt + intercept)
    ss_tot = float(np.sum((le - le.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return float(slope), float(intercept), float(r2)


def _finish(name: str, rows, exact_tol: float, config: ExperimentConfig, notes: str):
    exact = all(e <= exact_tol for _, e in rows)
    if exact:
        slope, intercept, r2 = 0.0, 0.0, 0.0
    else:
        slope, intercept, r2 = fit_rate(rows)
    meta = {
        "config": config.to_dict(),
        "numpy": np.__version__,
        "exact_tol": exact_tol,
        "notes": notes,
    }
    return RateReport(
        name=name,
        rows=tuple(rows),
        slope=slope,
        intercept=intercept,
        r2=r2,
        exact=exact,
        meta=meta,
    )


def amplitude_rate_experiment(config: ExperimentConfig) -> RateReport:
    """err(t) = max |a0 - 1| over the config window, eps per eps_rule."""
    model = config.model()
    x0, x1, nx, y0, y1, ny = config.window
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    rows = []
    for t in sorted(config.t_values, reverse=True):
        eps = config.eps_for(t)
        a0 = parametrix.amplitude_window(model, t, xs, ys, eps, config.quad)
        rows.append((float(t), float(np.max(np.abs(a0 - 1.0)))))
    return _finish(
        f"amplitude_{model.id.replace(':', '_')}",
        rows,
        AMPLITUDE_EXACT_TOL,
        config,
        "err = max |a0 - 1| over the sample window",
    )


def probe_family() -> tuple:
    """Fixed normalized Gaussian probes (width 0.5) spanning shifted and
    boosted states; used as test vectors for the remainder operator."""
    sigma = 0.5
    amp = _PI14 / math.sqrt(sigma)
    combos = [(0.0, 0.0), (-1.0, 0.0), (1.0, 0.0), (0.0, 8.0), (0.0, -8.0)]
    return tuple(
        ComplexGaussian(amp=amp, center=c, momentum=m, cwidth2=sigma**2)
        for c, m in combos
    )


def remainder_rate_experiment(config: ExperimentConfig) -> RateReport:
    """err(t) = max over probes of ||(U_ref - E0) f||_2 / ||f||_2.

    Both operators act on the same continuum probes: the reference by
    split-step propagation of the sampled probe, the approximate kernel by
    closed-form y-integration inside its phase-space quadrature.  Residual
    norms are taken on the |x| <= half_len/2 subdomain, where both images
    are concentrated; this keeps the comparison free of periodic wrap-around.
    """
    model = config.model()
    grid = config.grid()
    probes = probe_family()
    mask = np.abs(grid.x) <= 0.5 * grid.half_len
    x_sub = grid.x[mask]
    rows = []
    for t in sorted(config.t_values, reverse=True):
        eps = config.eps_for(t)
        worst = 0.0
        for probe in probes:
            u_num = propagator.split_step_values(
                model, grid, probe(grid.x), t, config.steps
            )
            u_par = parametrix.apply_to_gaussian(
                model, t, eps, probe, x_sub, config.quad
            )
            resid = u_num[mask] - u_par
            err = math.sqrt(float(np.sum(np.abs(resid) ** 2)) * grid.dx)
            worst = max(worst, err / probe.l2_norm())
        rows.append((float(t), worst))
    return _finish(
        f"remainder_{model.id.replace(':', '_')}",
        rows,
        REMAINDER_EXACT_TOL,
        config,
        "err = max probe residual ratio; lower bound of the remainder "
        "operator norm, measured on the central subdomain",
    )


def emit_report(report: RateReport, out_dir=None) -> tuple:
    """Write <name>.csv (t, err) and <name>.json (fit + config echo)."""
    if out_dir is None:
        out_dir = report.meta["config"]["out_dir"]
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{report.name}.csv"
        lines = ["t,err"]
        lines += [f"{t:.17g},{e:.17g}" for t, e in report.rows]
        csv_path.write_text("\n".join(lines) + "\n")
        json_path = out / f"{report.name}.json"
        payload = {
            "name": report.name,
            "slope": report.slope,
            "intercept": report.intercept,
            "r2": report.r2,
            "exact": report.exact,
            "rows": [{"t": t, "err": e} for t, e in report.rows],
            "meta": report.meta,
        }
        json_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write report under {out}: {exc}") from exc
    return csv_path, json_path
