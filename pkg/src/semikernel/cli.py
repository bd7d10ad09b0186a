"""Command line interface.

Subcommands: validate | orbit | kernel | parametrix | keyest | rates.
Exit codes: 0 success, 1 failed acceptance threshold, 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import struct
import sys

import numpy as np

from . import classical, harness, parametrix, propagator, wavepacket
from .parametrix import QuadratureSpec
from .potentials import check_assumption, from_name

__all__ = ["main", "build_parser"]

KERNEL_MAGIC = b"SKRN"


def _float_list(text: str):
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="semikernel",
        description="Short-time Schrodinger propagator parametrix toolkit",
    )
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check potential assumptions")
    v.add_argument("--potential", required=True)

    o = sub.add_parser("orbit", help="classical orbit / BVP table as CSV")
    o.add_argument("--potential", required=True)
    o.add_argument("--t", type=float, required=True)
    o.add_argument("--x", type=float, required=True)
    o.add_argument("--y", type=float, help="BVP mode: initial position")
    o.add_argument("--xi", type=float, help="terminal mode: momentum at time t")
    o.add_argument("--steps", type=int, default=None)
    o.add_argument("--out", default=None)

    k = sub.add_parser("kernel", help="numeric kernel matrix (binary)")
    k.add_argument("--potential", required=True)
    k.add_argument("--t", type=float, required=True)
    k.add_argument("--grid-n", type=int, default=256)
    k.add_argument("--grid-l", type=float, default=16.0)
    k.add_argument("--steps", type=int, default=2048)
    k.add_argument("--out", required=True)
    k.add_argument("--csv-slice", default=None, help="also write the y=0 column as CSV")

    x = sub.add_parser("parametrix", help="kernel samples e0 and amplitude a0")
    x.add_argument("--potential", required=True)
    x.add_argument("--t", type=float, required=True)
    x.add_argument("--eps", default="sqrt_t", help="float or 'sqrt_t'")
    x.add_argument("--x", type=float, default=0.0)
    x.add_argument("--y", type=float, default=0.0)
    x.add_argument("--window", default=None, help="x0,x1,nx,y0,y1,ny")
    x.add_argument("--quad-nodes", default=None, help="nx',nxi minimum node counts")
    x.add_argument("--out", default=None)

    ke = sub.add_parser("keyest", help="window moment ratio sweep as CSV")
    ke.add_argument("--t-values", default="0.02,0.04,0.08,0.16,0.32")
    ke.add_argument("--eps", default="sqrt_t", help="float or 'sqrt_t'")
    ke.add_argument("--alphas", default="0,1,2")
    ke.add_argument("--out", default=None)

    r = sub.add_parser("rates", help="run both rate experiments from a config")
    r.add_argument("--config", required=True)
    return p


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_validate(args) -> int:
    model = from_name(args.potential)
    report = check_assumption(model)
    print(f"potential: {report.potential_id}")
    print(f"max |V''| sampled: {report.max_abs_hess:.6g} (bound {model.hess_bound:g})")
    print(f"max gradient error: {report.max_grad_error:.3g}")
    print(f"hessian bound: {'ok' if report.hess_ok else 'VIOLATED'}")
    print(f"gradient consistency: {'ok' if report.grad_ok else 'VIOLATED'}")
    return 0 if report.passed else 1


def _cmd_orbit(args) -> int:
    model = from_name(args.potential)
    if (args.y is None) == (args.xi is None):
        print("orbit: provide exactly one of --y (BVP) or --xi (terminal)",
              file=sys.stderr)
        return 2
    if args.y is not None:
        orbit = classical.solve_bvp(
            model, args.t, args.x, args.y, steps=args.steps
        ).orbit
    else:
        orbit = classical.flow_from_terminal(
            model, args.t, args.x, args.xi, steps=args.steps
        )
    lines = ["s,x,xi,j"]
    lines += [
        f"{s:.17g},{xv:.17g},{xiv:.17g},{jv:.17g}"
        for s, xv, xiv, jv in zip(orbit.t_grid, orbit.x, orbit.xi, orbit.jx)
    ]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_kernel(args) -> int:
    model = from_name(args.potential)
    grid = propagator.GridSpec(half_len=args.grid_l, n_points=args.grid_n)
    km = propagator.numeric_kernel_matrix(model, args.t, grid, args.steps)
    with open(args.out, "wb") as fh:
        fh.write(KERNEL_MAGIC)
        fh.write(struct.pack("<Idd", grid.n_points, grid.half_len, args.t))
        fh.write(np.ascontiguousarray(km.entries.astype(np.complex64)).tobytes())
    if args.csv_slice:
        j = grid.n_points // 2  # column nearest y = 0
        lines = ["x,re,im"]
        lines += [
            f"{xv:.17g},{c.real:.17g},{c.imag:.17g}"
            for xv, c in zip(grid.x, km.entries[:, j])
        ]
        with open(args.csv_slice, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    return 0


def _parse_eps(raw, t: float) -> float:
    if raw == "sqrt_t":
        return math.sqrt(t)
    return float(raw)


def _cmd_parametrix(args) -> int:
    model = from_name(args.potential)
    eps = _parse_eps(args.eps, args.t)
    if args.quad_nodes:
        nx, nxi = (int(v) for v in args.quad_nodes.split(","))
        spec = QuadratureSpec(nodes_x=nx, nodes_xi=nxi)
    else:
        spec = QuadratureSpec()
    if args.window:
        x0, x1, nx, y0, y1, ny = _float_list(args.window)
        xs = np.linspace(x0, x1, int(nx))
        ys = np.linspace(y0, y1, int(ny))
    else:
        xs = np.array([args.x])
        ys = np.array([args.y])
    xp, xi = parametrix.table_grids(
        model, args.t, eps, (xs.min(), xs.max()), (ys.min(), ys.max()), spec
    )
    table = parametrix.build_table(model, args.t, xp, xi)
    lines = ["t,x,y,eps,re_e0,im_e0,s_action,re_a0,im_a0,abs_a0_minus_1"]
    for xv in xs:
        for yv in ys:
            s = parametrix.amplitude_a0(model, args.t, xv, yv, eps, spec, table)
            lines.append(
                f"{s.t:.17g},{s.x:.17g},{s.y:.17g},{s.eps:.17g},"
                f"{s.e0.real:.17g},{s.e0.imag:.17g},{s.s_action:.17g},"
                f"{s.a0.real:.17g},{s.a0.imag:.17g},{abs(s.a0 - 1.0):.17g}"
            )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_keyest(args) -> int:
    t_values = _float_list(args.t_values)
    alphas = [int(a) for a in args.alphas.split(",") if a.strip()]
    lines = ["alpha,t,eps,lhs_l1,rhs_l1,ratio_l1,lhs_l2,rhs_l2,ratio_l2"]
    for alpha in alphas:
        for t in t_values:
            eps = _parse_eps(args.eps, t)
            s = wavepacket.key_estimate_check(alpha, t, eps)
            lines.append(
                f"{s.alpha},{s.t:.17g},{s.eps:.17g},"
                f"{s.lhs_l1:.17g},{s.rhs_l1:.17g},{s.ratio_l1:.17g},"
                f"{s.lhs_l2:.17g},{s.rhs_l2:.17g},{s.ratio_l2:.17g}"
            )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_rates(args) -> int:
    config = harness.ExperimentConfig.from_json_file(args.config)
    ok = True
    amp = harness.amplitude_rate_experiment(config)
    harness.emit_report(amp)
    if amp.exact:
        print(f"{amp.name}: exact (all err <= {amp.meta['exact_tol']:g})")
    else:
        print(f"{amp.name}: slope {amp.slope:.3f} (r2 {amp.r2:.4f})")
        ok = ok and amp.slope >= 0.9
    rem = harness.remainder_rate_experiment(config)
    harness.emit_report(rem)
    if rem.exact:
        print(f"{rem.name}: exact (all err <= {rem.meta['exact_tol']:g})")
    else:
        print(f"{rem.name}: slope {rem.slope:.3f} (r2 {rem.r2:.4f})")
        ok = ok and rem.slope >= 1.8
    return 0 if ok else 1


_COMMANDS = {
    "validate": _cmd_validate,
    "orbit": _cmd_orbit,
    "kernel": _cmd_kernel,
    "parametrix": _cmd_parametrix,
    "keyest": _cmd_keyest,
    "rates": _cmd_rates,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, classical.NoConvergence, classical.HorizonExceeded,
            parametrix.TruncationTooTight, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
