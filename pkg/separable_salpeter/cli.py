"""
Command-line front end.

    python -m separable_salpeter solve --config configs/two_term_1d.json
    python -m separable_salpeter sweep-mass --config configs/exponential_1d.json --out exponential_sweep.csv
    python -m separable_salpeter nboson --u-min 0.6 --u-max 3 --steps 25 --lambda 0.5 --lambda 1
    python -m separable_salpeter critical
    python -m separable_salpeter oracle --config configs/gauss_3d.json --grid 400

Data goes to --out (or stdout); status lines and logs go to stderr.
Exit codes: 0 success, 2 no bound state, 3 invalid config, 4 convergence failure.
"""

import argparse
import io
import json
import logging
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pandas as pd

from . import config
from .errors import InvalidParameter, NoBoundState, SalpeterError
from .kernels import Dimension
from .nboson import bounds_point, bounds_table, critical_u
from .quadrature import Tolerance
from .spectral import (
    consistency_residual,
    coupling_curve,
    critical_threshold,
    oracle_extrapolated,
    reciprocal_coupling,
    solve_ground_energy,
)

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """Usage errors are configuration errors (exit 3), not argparse's exit 2."""

    def error(self, message):
        raise InvalidParameter("arguments", message)


def _status(message):
    print(message, file=sys.stderr)


# ============= FORMATTING =============

def _round(value):
    """Fixed significant digits for JSON; NaN and inf become null."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return None
        return float(f"{value:.{config.SIGNIFICANT_DIGITS}g}")
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_round(v) for v in value]
    return value


def format_report(report):
    return json.dumps({key: _round(value) for key, value in report.items()}, indent=2) + "\n"


def format_table(df):
    buffer = io.StringIO()
    df.to_csv(buffer, index=False, float_format=f"%.{config.SIGNIFICANT_DIGITS}g",
              lineterminator="\n", na_rep="")
    return buffer.getvalue()


def _report_as_table(report):
    row = {}
    for key, value in report.items():
        if isinstance(value, (list, tuple, np.ndarray)):
            value = " ".join(f"{v:.{config.SIGNIFICANT_DIGITS}g}" for v in value)
        row[key] = value
    return pd.DataFrame([row])


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
        _status(f"✅ Wrote {out}")


def _emit_report(report, args):
    text = format_report(report) if args.format == "json" else format_table(_report_as_table(report))
    _emit(text, args.out)


def _emit_table(df, args):
    if args.format == "json":
        records = [{key: _round(value) for key, value in row.items()} for row in df.to_dict(orient="records")]
        _emit(json.dumps(records, indent=2) + "\n", args.out)
    else:
        _emit(format_table(df), args.out)


def _append_discrepancy(path, title, lines):
    """Append one adjudication finding to the markdown discrepancy log."""
    if path is None:
        return
    stamp = datetime.now(timezone.utc).strftime("%Y-%m-%d %H:%M:%SZ")
    with open(path, "a", encoding="utf-8", newline="\n") as handle:
        handle.write(f"\n## {title} ({stamp})\n\n")
        for line in lines:
            handle.write(f"- {line}\n")
    _status(f"📝 Logged finding to {path}")


# ============= INPUTS =============

def _load(args, allow_free=False):
    if args.config is None:
        raise InvalidParameter("config", f"'{args.command}' needs --config PATH")
    run = config.load_run_config(args.config, allow_free)
    tolerance = Tolerance(
        args.tol_abs if args.tol_abs is not None else run.tolerance.absolute,
        args.tol_rel if args.tol_rel is not None else run.tolerance.relative,
    )
    return run, tolerance


def _grid(lower, upper, steps, name):
    if not (math.isfinite(lower) and math.isfinite(upper) and lower < upper):
        raise InvalidParameter(name, f"{name} range needs min < max, got [{lower}, {upper}]")
    if steps < 2:
        raise InvalidParameter("steps", f"a sweep needs at least 2 steps, got {steps}")
    return np.linspace(lower, upper, steps)


def _matches(energy, published):
    return energy is not None and published is not None and abs(energy - published) <= config.PUBLISHED_MATCH


def _try_energy(problem, tolerance):
    try:
        return solve_ground_energy(problem, tol=tolerance).energy
    except NoBoundState:
        return None


def _matching_variant(as_printed, halved, published):
    found = [name for name, energy in (("as_printed", as_printed), ("halved", halved))
             if _matches(energy, published)]
    return "+".join(found) if found else "none"


# ============= COMMANDS =============

def cmd_solve(args):
    run, tolerance = _load(args)
    problem = run.problem
    state = solve_ground_energy(problem, tol=tolerance)
    report = {
        "command": "solve",
        "mass": problem.mass,
        "energy": state.energy,
        "binding": state.binding,
        "coefficients": state.coefficients,
        "det_residual": state.det_residual,
        "consistency_residual": consistency_residual(state),
        "quad_error": state.quad_error,
        "iterations": state.iterations,
        "roots": state.roots,
    }

    published = run.published_energy(problem.mass)
    if published is not None:
        halved = _try_energy(problem.scaled(0.5), tolerance)
        report.update({
            "published_energy": published,
            "matches_published": _matches(state.energy, published),
            "halved_coupling_energy": halved,
            "halved_matches_published": _matches(halved, published),
        })
        _append_discrepancy(args.discrepancy_log, f"solve m = {problem.mass:g}", [
            f"published E = {published:.6g}",
            f"couplings as written: E = {state.energy:.6g}",
            f"halved couplings: E = {halved:.6g}" if halved is not None else "halved couplings: no bound state",
            f"matching variant: {_matching_variant(state.energy, halved, published)}",
        ])

    if args.psi_out:
        Path(args.psi_out).write_text(format_table(_psi_table(state)), encoding="utf-8", newline="\n")
        _status(f"✅ Wrote wavefunction table {args.psi_out}")

    _status(f"✅ E = {state.energy:.12g} (e = {state.binding:.6g})")
    _emit_report(report, args)
    return 0


def _psi_table(state):
    start, stop, points = config.PSI_GRID
    grid = np.linspace(start, stop, points)
    label = "x" if state.problem.dimension is Dimension.ONE_D else "r"
    return pd.DataFrame({
        label: grid,
        "psi_position": [state.psi_position(x) for x in grid],
        "k": grid,
        "psi_momentum": state.psi_momentum(grid),
    })


def cmd_sweep_mass(args):
    run, tolerance = _load(args)
    masses = _grid(args.m_min, args.m_max, args.steps, "mass")
    if args.m_min < 0:
        raise InvalidParameter("mass", f"mass sweep must start at m >= 0, got {args.m_min}")

    rows, exit_code = [], 0
    for scale in run.coupling_scales:
        for m in masses:
            problem = run.problem.with_mass(float(m)).scaled(scale)
            try:
                energy = solve_ground_energy(problem, tol=tolerance).energy
            except SalpeterError as e:
                logger.warning("m = %g, scale = %g: %s", m, scale, e)
                energy, exit_code = np.nan, max(exit_code, e.exit_code)
            rows.append({'coupling_scale': scale, 'm': float(m), 'E': energy, 'e': energy - m})

    _emit_table(pd.DataFrame(rows, columns=['coupling_scale', 'm', 'E', 'e']), args)
    _summary(len(rows), exit_code)
    return exit_code


def cmd_coupling_curve(args):
    run, tolerance = _load(args)
    problem = run.problem
    energies = _grid(args.e_min, args.e_max, args.steps, "energy")
    if args.e_max >= problem.mass:
        raise InvalidParameter("energy", f"energies must stay below m = {problem.mass}, got e_max = {args.e_max}")

    try:
        table = coupling_curve(problem, energies, tolerance)
        exit_code = 0
    except SalpeterError:
        table, exit_code = _coupling_curve_pointwise(problem, energies, tolerance)

    _emit_table(table, args)
    _summary(len(table), exit_code)
    return exit_code


def _coupling_curve_pointwise(problem, energies, tolerance):
    rows, exit_code = [], 0
    for energy in energies:
        try:
            reciprocal = reciprocal_coupling(problem, energy, tolerance)
        except InvalidParameter:
            raise
        except SalpeterError as e:
            logger.warning("E = %g: %s", energy, e)
            reciprocal, exit_code = np.nan, max(exit_code, e.exit_code)
        rows.append({'E': float(energy), 'e': float(energy) - problem.mass,
                     'reciprocal_coupling': reciprocal, 'coupling': 1.0 / reciprocal})
    return pd.DataFrame(rows, columns=['E', 'e', 'reciprocal_coupling', 'coupling']), exit_code


def _nboson_couplings(args):
    """u grid from --u-min/--u-max, or from --v-min/--v-max with u = (N - 1) v."""
    if args.particles is not None and args.particles < 2:
        raise InvalidParameter("N", f"need N >= 2 particles, got {args.particles}")
    if args.v_min is None and args.v_max is None:
        if args.u_min <= 0:
            raise InvalidParameter("u", f"scaled coupling must be positive, got u_min = {args.u_min}")
        return _grid(args.u_min, args.u_max, args.steps, "u"), None
    if args.v_min is None or args.v_max is None or args.particles is None:
        raise InvalidParameter("v", "a pair-coupling sweep needs --v-min, --v-max and --particles")
    if args.v_min <= 0:
        raise InvalidParameter("v", f"pair coupling must be positive, got v_min = {args.v_min}")
    v_values = _grid(args.v_min, args.v_max, args.steps, "v")
    return (args.particles - 1) * v_values, v_values


def cmd_nboson(args):
    u_values, v_values = _nboson_couplings(args)

    lams = list(args.lam or [])
    if args.particles is not None:
        lams.append((args.particles - 1) / args.particles)
    lams = tuple(dict.fromkeys(lams or config.LAMBDAS))

    table = bounds_table(u_values, lams)
    if v_values is not None:
        table.insert(0, "v", v_values)
    upper_columns = [c for c in table.columns if c.startswith("upper_pp_")]
    exit_code = 4 if table[upper_columns].isna().any().any() else 0

    if args.discrepancy_log:
        point = bounds_point(1.0, 0.5)
        quoted = config.QUOTED_PAIR_TOTALS
        _append_discrepancy(args.discrepancy_log, "N-boson bounds at u = 1", [
            f"per-particle lower bound {point.lower_pp:.6g}, twice it {2 * point.lower_pp:.6g}, quoted {quoted['lower']}",
            f"per-particle upper bound (lambda = 1/2) {point.upper_pp:.6g}, twice it {2 * point.upper_pp:.6g}, quoted {quoted['upper']}",
            "quoted values read as N = 2 pair totals",
        ])

    _emit_table(table, args)
    _summary(len(table), exit_code)
    return exit_code


def cmd_critical(args):
    u_c = critical_u()
    report = {"command": "critical", "u_c": u_c, "reciprocal_u_c": 1.0 / u_c}
    if args.config is not None:
        run, tolerance = _load(args)
        if run.problem.rank == 1:
            threshold = critical_threshold(run.problem, tolerance)
            report["threshold_diverges"] = threshold.diverges
            report["v_c"] = threshold.critical_coupling
    _status(f"✅ u_c = {u_c:.8g}")
    _emit_report(report, args)
    return 0


def cmd_oracle(args):
    run, tolerance = _load(args, allow_free=True)
    problem = run.problem
    coarse, fine, extrapolated = oracle_extrapolated(problem, args.grid, args.kmax)

    solver_energy = None
    if all(term.v > 0 for term in problem.terms):
        solver_energy = _try_energy(problem, tolerance)
    deviation = abs(solver_energy - extrapolated) if solver_energy is not None else None

    report = {
        "command": "oracle",
        "oracle_coarse": coarse.energy,
        "oracle_fine": fine.energy,
        "extrapolated": extrapolated,
        "solver_energy": solver_energy,
        "deviation": deviation,
        "hermitian": coarse.hermitian,
        "grid": args.grid,
        "k_max": args.kmax,
    }

    published = run.published_energy(problem.mass)
    if published is not None and solver_energy is not None:
        halved = _try_energy(problem.scaled(0.5), tolerance)
        variant = _matching_variant(solver_energy, halved, published)
        report.update({
            "published_energy": published,
            "halved_coupling_energy": halved,
            "matching_variant": variant,
            "oracle_agrees_with_solver": deviation <= 1e-4 * max(1.0, abs(solver_energy)),
        })
        _append_discrepancy(args.discrepancy_log, f"oracle m = {problem.mass:g}", [
            f"discretized Hamiltonian (extrapolated): E = {extrapolated:.6g}",
            f"secular equation as written: E = {solver_energy:.6g}",
            f"published E = {published:.6g}; matching variant: {variant}",
        ])

    _status(f"✅ oracle E = {extrapolated:.10g}")
    _emit_report(report, args)
    return 0


def _summary(n_rows, exit_code):
    if exit_code:
        _status(f"❌ {n_rows} rows written, some points failed (exit {exit_code})")
    else:
        _status(f"✅ {n_rows} rows written")


COMMANDS = {
    "solve": cmd_solve,
    "sweep-mass": cmd_sweep_mass,
    "coupling-curve": cmd_coupling_curve,
    "nboson": cmd_nboson,
    "critical": cmd_critical,
    "oracle": cmd_oracle,
}


# ============= PARSER =============

def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", default=None, help="run config (JSON)")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--tol-abs", type=float, default=None, help="absolute quadrature tolerance")
    common.add_argument("--tol-rel", type=float, default=None, help="relative quadrature tolerance")
    common.add_argument("--discrepancy-log", default=None, help="markdown file receiving adjudication findings")
    common.add_argument("--verbose", action="store_true", help="debug logging")

    parser = _Parser(prog="separable_salpeter",
                     description="Bound states of the spinless Salpeter equation with separable kernels.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    solve = sub.add_parser("solve", parents=[common], help="ground state of a config problem")
    solve.add_argument("--psi-out", default=None, help="write the wavefunction table here")

    m_start, m_stop, m_steps = config.MASS_SWEEP
    sweep = sub.add_parser("sweep-mass", parents=[common], help="E(m) for every coupling scale")
    sweep.add_argument("--m-min", type=float, default=m_start)
    sweep.add_argument("--m-max", type=float, default=m_stop)
    sweep.add_argument("--steps", type=int, default=m_steps)

    e_start, e_stop, e_steps = config.ENERGY_SWEEP
    curve = sub.add_parser("coupling-curve", parents=[common], help="1/v against E for a single-term problem")
    curve.add_argument("--e-min", type=float, default=e_start)
    curve.add_argument("--e-max", type=float, default=e_stop)
    curve.add_argument("--steps", type=int, default=e_steps)

    u_start, u_stop, u_steps = config.U_SWEEP
    nboson = sub.add_parser("nboson", parents=[common], help="N-boson energy bounds per particle against u")
    nboson.add_argument("--u-min", type=float, default=u_start)
    nboson.add_argument("--u-max", type=float, default=u_stop)
    nboson.add_argument("--steps", type=int, default=u_steps)
    nboson.add_argument("--lambda", dest="lam", type=float, action="append", help="(N-1)/N, repeatable")
    nboson.add_argument("--particles", type=int, default=None, help="adds lambda = (N-1)/N")
    nboson.add_argument("--v-min", type=float, default=None, help="pair-coupling sweep, needs --particles")
    nboson.add_argument("--v-max", type=float, default=None)

    sub.add_parser("critical", parents=[common], help="critical scaled coupling u_c (and v_c for a config)")

    oracle = sub.add_parser("oracle", parents=[common], help="dense-discretization cross-check")
    oracle.add_argument("--grid", type=int, default=config.ORACLE_POINTS)
    oracle.add_argument("--kmax", type=float, default=config.ORACLE_KMAX)

    return parser


def _default_format(command):
    return "json" if command in ("solve", "critical", "oracle") else "csv"


def main(argv=None):
    """Run one command; returns the process exit code."""
    try:
        args = build_parser().parse_args(argv)
    except InvalidParameter as e:
        _status(f"❌ {e}")
        return e.exit_code

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.format is None:
        args.format = _default_format(args.command)

    try:
        return COMMANDS[args.command](args)
    except SalpeterError as e:
        _status(f"❌ {type(e).__name__}: {e}")
        return e.exit_code
