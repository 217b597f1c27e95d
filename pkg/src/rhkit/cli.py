"""Command-line front end: every computation as a CSV or JSON table.

Exit status 0 on success, 1 on a parameter error, 2 on a numeric failure.
CSV output is the table alone; scalar metadata (version, node counts,
tolerances, fits) goes to stderr as one JSON line.  JSON output carries the
columns as arrays plus a ``meta`` object.
"""

from __future__ import annotations

import os
import sys

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def _apply_thread_cap() -> None:
    # Must run before numpy loads BLAS.
    cap = os.environ.get("RHKIT_THREADS")
    if cap is None:
        return
    if not cap.isdigit() or int(cap) < 1:
        sys.stderr.write("error: RHKIT_THREADS must be a positive integer\n")
        raise SystemExit(1)
    for var in _THREAD_VARS:
        os.environ[var] = cap


_apply_thread_cap()

import argparse  # noqa: E402
import json  # noqa: E402
import math  # noqa: E402
from dataclasses import dataclass, field  # noqa: E402

import numpy as np  # noqa: E402
from scipy.special import ndtr  # noqa: E402

from . import __version__  # noqa: E402
from .errors import NumericError, ParameterError  # noqa: E402


# --------------------------------------------------------------------------
# Tables and formatting


@dataclass
class Table:
    columns: dict[str, list] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def add_row(self, **values) -> None:
        if self.columns and list(values) != list(self.columns):
            raise ValueError("row keys differ from the table columns")
        for k, v in values.items():
            self.columns.setdefault(k, []).append(v)


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def render(table: Table, fmt: str) -> str:
    if fmt == "json":
        doc = {"columns": _json_value(table.columns), "meta": _json_value(table.meta)}
        return json.dumps(doc, indent=1) + "\n"
    names = list(table.columns)
    rows = zip(*(table.columns[k] for k in names))
    lines = [",".join(names)] + [",".join(_cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def parse_grid(text: str) -> list[float]:
    """``a:step:b`` inclusive of b when step divides b - a within 1e-12, a
    comma list, or a single number."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3:
                raise ParameterError(f"grid {text!r} must be a:step:b")
            a, step, b = parts
            if step == 0 or (b - a) * step < 0:
                raise ParameterError(f"grid {text!r}: step must point from a to b")
            q = (b - a) / step
            m = round(q) if abs(q - round(q)) <= 1e-12 * max(1.0, abs(q)) else math.floor(q)
            if m > 100000:
                raise ParameterError(f"grid {text!r} has too many points")
            return [a + k * step for k in range(m + 1)]
        vals = [float(p) for p in text.split(",")]
    except ValueError as exc:
        raise ParameterError(f"cannot parse grid {text!r}") from exc
    if not all(math.isfinite(v) for v in vals):
        raise ParameterError(f"grid {text!r} has non-finite values")
    return vals


# --------------------------------------------------------------------------
# Subcommands


def cmd_tw_table(args) -> Table:
    from .painleve2 import solve_as, tw_cdf_from_pii, tw_det

    s_grid = parse_grid(args.s)
    tol = args.tol or 1e-8
    traj = solve_as(1.0, s_end=min(min(s_grid) - 0.5, -1.0), tol=tol)
    t = Table(meta={"pii_tol": tol, "pii_certified_s_min": traj.certified_s_min})
    for s in s_grid:
        d = tw_det(s, args.nodes)
        fd = float(np.real(d.value))
        fp = tw_cdf_from_pii(traj, s)
        t.add_row(s=s, F_det=fd, F_pii=fp, abs_diff=abs(fd - fp), det_err=d.err_estimate,
                  det_nodes=d.n_nodes)
    return t


def cmd_pii_solve(args) -> Table:
    from .painleve2 import (ASParameters, fit_connection_sub, fit_connection_super,
                            solve_as)

    params = ASParameters(args.gamma)
    tol = args.tol or 1e-8
    traj = solve_as(params, s0=args.s0, s_end=args.s_end, tol=tol, step=args.step)
    meta = {"gamma": args.gamma, "tol": tol, "certified_s_min": traj.certified_s_min,
            "poles": list(traj.pole_locations)}
    if 0 < args.gamma < 1 and traj.certified_s_min <= -60:
        f = fit_connection_sub(traj)
        meta["fit"] = {"beta": f.beta_fit, "beta_theory": f.beta_theory,
                       "phase": f.phase_fit, "phase_theory": f.phase_theory,
                       "window": list(f.fit_window)}
    elif args.gamma > 1 and traj.certified_s_min <= -40:
        f = fit_connection_super(traj)
        meta["fit"] = {"beta_hat": f.beta_fit, "beta_hat_theory": f.beta_theory,
                       "phase": f.phase_fit, "phase_theory": f.phase_theory,
                       "window": list(f.fit_window)}
    t = Table(meta=meta)
    for s, u, up, e in zip(traj.s_grid, traj.u, traj.u_prime, traj.check_diff):
        t.add_row(s=float(s), u=float(u), u_prime=float(up), check_diff=float(e),
                  certified=bool(s >= traj.certified_s_min))
    return t


def cmd_kpz_cdf(args) -> Table:
    from .kpz import crossover_cdf_many, kappa_T
    from .painleve2 import tw_cdf_from_det

    s_grid = parse_grid(args.s)
    tol = args.tol or 1e-9
    res = crossover_cdf_many(args.T, s_grid, det_nodes=args.nodes or 40, tol=tol)
    kappa = kappa_T(args.T)
    sigma = 2 ** -0.5 * (math.pi * args.T) ** 0.25
    shift = math.log(math.sqrt(2 * math.pi * args.T))
    t = Table(meta={"T": args.T, "kappa": kappa, "sigma": sigma, "tol": tol})
    for r in res:
        st = r.s / kappa
        tw = tw_cdf_from_det(st) if st >= -10 else float("nan")
        x = (r.s + shift) / sigma
        t.add_row(s=r.s, F_T=r.value, s_tw=st, dist_tw=abs(r.value - tw), x_gauss=x,
                  dist_gauss=abs(r.value - float(ndtr(x))), u_nodes=r.n_u, z_nodes=r.n_z)
    return t


def _measure(args):
    from .measure import discretize_measure, fermi, gaussian, point_mass

    if args.measure == "fermi":
        return discretize_measure(fermi(args.alpha), args.nodes or 200)
    if args.measure == "gaussian":
        return discretize_measure(gaussian(args.mu, args.var), args.nodes or 200)
    return point_mass(args.t0)


def cmd_idpii_check(args) -> Table:
    from .idpii import det_sigma, log_f_sigma_from_u, solve_idpii

    m = _measure(args)
    s_grid = parse_grid(args.s)
    tol = args.tol or 1e-8
    sol = solve_idpii(m, s_end=min(s_grid) - 0.5, tol=tol)
    t = Table(meta={"measure": args.measure, "measure_nodes": m.n, "tol": tol,
                    "start_point": sol.start_point, "certified_s_min": sol.certified_s_min})
    for s in s_grid:
        d = det_sigma(m, s, args.det_nodes)
        lu, ld = log_f_sigma_from_u(sol, s), d.log_abs
        t.add_row(s=s, lnF_ode=lu, lnF_det=ld, gap=abs(lu - ld), det_err=d.err_estimate,
                  det_nodes=d.n_nodes)
    return t


def cmd_efp(args) -> Table:
    from .efp import XX0Params, efp_asymptotic_check, efp_det_full, efp_ratio_iiks

    if not 1 <= args.n_min <= args.n_max:
        raise ParameterError("need 1 <= n-min <= n-max")
    XX0Params(args.h, args.n_max + 1)
    ns = list(range(args.n_min, args.n_max + 1))
    dets = {n: efp_det_full(XX0Params(args.h, n)) for n in ns + [args.n_max + 1]}
    p = XX0Params(args.h, 1)
    meta = {"h": args.h, "Lambda": p.Lambda, "phi": p.phi,
            "slope_theory": math.log(math.sin(0.5 * p.phi))}
    if len(ns) >= 2:
        meta["slope_fit"] = efp_asymptotic_check(args.h, ns).slope
    t = Table(meta=meta)
    for n in ns:
        r = efp_ratio_iiks(XX0Params(args.h, n))
        ratio_det = dets[n + 1].value / dets[n].value
        t.add_row(n=n, P_n=dets[n].value, ratio_iiks=r.real, ratio_det=ratio_det,
                  ratio_gap=abs(r - ratio_det), rel_accuracy=dets[n].relative_accuracy,
                  nodes=dets[n].n_nodes)
    return t


def cmd_milne(args) -> Table:
    from .rhp.wiener_hopf import milne_residual, milne_solution

    t = Table(meta={"c": args.c})
    for x in parse_grid(args.x):
        t.add_row(x=x, phi=milne_solution(x, args.c), residual=milne_residual(x, args.c))
    return t


OP_POINTS = (1 + 1j, 0.5 - 2j, -3 + 0.2j, 0.1 + 0.01j)
OP_REAL = (-2.0, -0.7, 0.0, 0.7, 2.0)


def cmd_op_rhp(args) -> Table:
    from .rhp.op import cd_kernel_rhp, cd_kernel_sum, op_jump_residual, op_rhp_gaussian

    t = Table(meta={"det_points": [[z.real, z.imag] for z in OP_POINTS],
                    "real_points": list(OP_REAL)})
    for n in range(1, args.n + 1):
        det = max(abs(np.linalg.det(op_rhp_gaussian(n, z)) - 1) for z in OP_POINTS)
        jump = max(op_jump_residual(n, x) for x in OP_REAL)
        cd = max(abs(cd_kernel_rhp(n, x, y) - cd_kernel_sum(n, x, y))
                 for x in OP_REAL for y in OP_REAL if x != y)
        t.add_row(n=n, det_residual=float(det), jump_residual=jump, cd_gap=cd)
    return t


def cmd_nls_demo(args) -> Table:
    from .rhp.nls import GaussianReflection, nls_pde_residual, nls_solve

    r = GaussianReflection(args.amplitude)
    t = Table(meta={"amplitude": args.amplitude, "pde_h": args.pde_h})
    for x in parse_grid(args.x):
        for tt in parse_grid(args.t):
            res = nls_solve(r, x, tt)
            if args.pde_h > 0 and tt >= 2 * args.pde_h:
                pde, ymax, _ = nls_pde_residual(r, x, tt, h=args.pde_h)
                rel = pde / ymax
            else:
                rel = float("nan")
            t.add_row(x=x, t=tt, y_re=res.y.real, y_im=res.y.imag, abs_y=abs(res.y),
                      sie_residual=res.solution.residual, certificate=res.certificate.bound,
                      pde_residual_rel=rel, nodes=res.n_nodes)
    return t


# --------------------------------------------------------------------------
# Parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rhkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("--nodes", type=int, default=None, help="node count override")
        sp.add_argument("--tol", type=float, default=None, help="tolerance override")
        sp.add_argument("--out", default=None, help="output file (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.set_defaults(fn=fn)
        return sp

    sp = add("tw-table", cmd_tw_table, "Tracy-Widom F by determinant and by Painleve II")
    sp.add_argument("--s", default="-5:1:3")

    sp = add("pii-solve", cmd_pii_solve, "Ablowitz-Segur trajectory and connection fit")
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--s0", type=float, default=8.0)
    sp.add_argument("--s-end", type=float, default=-8.0)
    sp.add_argument("--step", type=float, default=0.05)

    sp = add("kpz-cdf", cmd_kpz_cdf, "KPZ crossover distribution and limit distances")
    sp.add_argument("--T", type=float, required=True)
    sp.add_argument("--s", default="-2:1:2")

    sp = add("idpii-check", cmd_idpii_check, "ln F_sigma by the ODE system and determinant")
    sp.add_argument("--measure", choices=("fermi", "gaussian", "point"), default="fermi")
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--mu", type=float, default=0.0)
    sp.add_argument("--var", type=float, default=1.0)
    sp.add_argument("--t0", type=float, default=0.0)
    sp.add_argument("--s", default="-1:1:4")
    sp.add_argument("--det-nodes", type=int, default=80)

    sp = add("efp", cmd_efp, "XX0 emptiness formation probability")
    sp.add_argument("--h", type=float, required=True)
    sp.add_argument("--n-min", type=int, default=1)
    sp.add_argument("--n-max", type=int, default=10)

    sp = add("milne", cmd_milne, "Milne solution and its integral-equation residual")
    sp.add_argument("--x", default="0.5,1,2,5")
    sp.add_argument("--c", type=float, default=1.0)

    sp = add("op-rhp", cmd_op_rhp, "Hermite RHP residuals")
    sp.add_argument("--n", type=int, default=8)

    sp = add("nls-demo", cmd_nls_demo, "Defocusing NLS by the small-norm RHP solver")
    sp.add_argument("--amplitude", type=float, default=0.05)
    sp.add_argument("--x", default="1")
    sp.add_argument("--t", default="0.5")
    sp.add_argument("--pde-h", type=float, default=0.025,
                    help="stencil spacing for the PDE residual; 0 disables it")
    return p


GRID_FLAGS = ("--s", "--x", "--t")


def _join_grid_flags(argv: list[str]) -> list[str]:
    """``--s -2:0.5:2`` -> ``--s=-2:0.5:2`` so argparse does not read the
    grid as an option."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] in GRID_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_grid_flags(argv))
    try:
        if args.nodes is not None and args.nodes < 1:
            raise ParameterError("--nodes must be positive")
        if args.tol is not None and not args.tol > 0:
            raise ParameterError("--tol must be positive")
        table = args.fn(args)
    except ParameterError as exc:
        sys.stderr.write(f"parameter error: {exc}\n")
        return 1
    except (NumericError, ArithmeticError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"numeric error: {exc}\n")
        return 2
    table.meta = {"version": __version__, "command": args.command,
                  "nodes_override": args.nodes, **table.meta}
    text = render(table, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.format == "csv":
        sys.stderr.write(json.dumps(_json_value(table.meta)) + "\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
