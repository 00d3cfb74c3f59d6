"""Command-line interface.

Subcommands:

    verify   run one seeded verification suite (bernstein, bony, products,
             loginterp, heat, transport); reports written as CSV
    solve    march a single heat or transport problem from field files and
             write snapshots, a manifest, and the estimate report
    iterate  run the coupled iteration and write the diagnostics CSV plus
             the final iterate's fields
    unique   twin-run uniqueness gauge; writes the report JSON
    norms    print shell-localized norms of stored fields

Exit codes: 0 all checks passed, 1 an assertion or monitor failed, 2 usage
or configuration error.  Flags mirror run-config keys and override the
config file.  Identical config and seed reproduce byte-identical data
files; wallclock timing goes to a sidecar log only.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .io_config import (
    ConfigError,
    FormatError,
    RunConfig,
    load_config,
    read_field,
    validate_config,
    write_diagnostics,
    write_estimate_reports,
    write_field,
    write_filter_bank,
    write_run_manifest,
    write_uniqueness_report,
)
from .linear_solvers import (
    HeatProblem,
    TransportProblem,
    heat_estimate_report,
    solve_heat,
    solve_transport,
    transport_estimate_report,
)
from .littlewood_paley import BesovSpec, TimeSeriesField, besov_norm, chemin_lerner_norm
from .mhd import (
    prepare_initial_data,
    run_iteration,
    taylor_green_data,
    twin_run_uniqueness,
)
from .suites import SUITES

__all__ = ["main", "entry"]

_CONFIG_FLAGS = (
    ("d", int),
    ("N", int),
    ("L", float),
    ("p", float),
    ("dt", float),
    ("T_max", float),
    ("cadence", int),
    ("eta", float),
    ("C0", float),
    ("max_iterations", int),
    ("tolerance", float),
    ("seed", int),
    ("output_dir", str),
)
_FLAG_TO_ATTR = {
    "d": "d", "N": "N", "L": "L", "p": "p", "dt": "dt", "T_max": "t_max",
    "cadence": "cadence", "eta": "eta", "C0": "c0",
    "max_iterations": "max_iterations", "tolerance": "tolerance",
    "seed": "seed", "output_dir": "output_dir",
}


def _add_config_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", metavar="FILE", help="run-config file")
    for key, caster in _CONFIG_FLAGS:
        parser.add_argument(f"--{key}", type=caster, default=None,
                            help=f"override config key {key}")
    parser.add_argument("--threads", type=int, default=1,
                        help="parallelism cap for corpus evaluation")


def _build_config(args) -> RunConfig:
    if args.config is not None:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        cfg = load_config(text)
    else:
        cfg = RunConfig()
    for key, _ in _CONFIG_FLAGS:
        val = getattr(args, key)
        if val is not None:
            setattr(cfg, _FLAG_TO_ATTR[key], val)
    validate_config(cfg)
    return cfg


def _out_path(cfg: RunConfig, name: str) -> str:
    os.makedirs(cfg.output_dir, exist_ok=True)
    return os.path.join(cfg.output_dir, name)


def _cmd_verify(args) -> int:
    cfg = _build_config(args)
    grid = cfg.grid()
    bank = cfg.iteration().bank(grid)
    kwargs = dict(grid=grid, bank=bank, seed=cfg.seed,
                  n_samples=args.samples, threads=args.threads)
    if args.suite == "products":
        kwargs.update(p=cfg.p, s1=args.s1, s2=args.s2)
        if args.variant is not None:
            kwargs.update(variants=(args.variant,))
    elif args.suite == "loginterp":
        kwargs.update(p=cfg.p)
    result = SUITES[args.suite](**kwargs)
    print(result.summary())
    for msg in result.failures:
        print(f"  {msg}", file=sys.stderr)
    if result.reports:
        path = _out_path(cfg, f"verify_{args.suite}.csv")
        write_estimate_reports(result.reports, path)
        print(f"reports written to {path}")
    return 0 if result.passed else 1


def _read_field_checked(path, grid):
    if not os.path.exists(path):
        raise ConfigError(f"input field file not found: {path}")
    return read_field(path, grid)


def _cmd_solve(args) -> int:
    cfg = _build_config(args)
    grid = cfg.grid()
    bank = cfg.iteration().bank(grid)
    d, p = grid.d, cfg.p
    f0 = _read_field_checked(args.initial, grid)
    T, dt = cfg.t_max, cfg.dt
    if args.problem == "heat":
        problem = HeatProblem(f0, None, T, dt, cadence=cfg.cadence)
        solution = solve_heat(problem)
        report = heat_estimate_report(
            solution, problem, 1.0, 1.0, d / p - 1.0, p, 1.0, bank
        )
    else:
        if args.velocity is None:
            raise ConfigError("transport solves need --velocity FILE")
        v = _read_field_checked(args.velocity, grid)
        velocity = TimeSeriesField(np.array([0.0, T]), [v, v.copy()])
        problem = TransportProblem(f0, velocity, None, T, dt, cadence=cfg.cadence)
        solution = solve_transport(problem)
        report = transport_estimate_report(solution, problem, d / p, p, 1.0, bank).report()
    paths = []
    for i, snap in enumerate(solution.snapshots):
        path = _out_path(cfg, f"{args.problem}_snapshot_{i:06d}.field")
        write_field(path, snap)
        paths.append(os.path.basename(path))
    write_run_manifest(
        _out_path(cfg, f"{args.problem}_manifest.json"),
        args.problem, grid, dt, T, cfg.cadence, cfg.seed, paths,
    )
    write_estimate_reports([report], _out_path(cfg, f"{args.problem}_estimate.csv"))
    print(f"{args.problem}: {len(paths)} snapshots, estimate ratio {report.ratio:.6g}")
    return 0


def _load_initial_data(args, cfg: RunConfig):
    grid = cfg.grid()
    if args.u0 is not None or args.B0 is not None:
        if args.u0 is None or args.B0 is None:
            raise ConfigError("custom initial data needs both --u0 and --B0")
        return prepare_initial_data(
            _read_field_checked(args.u0, grid), _read_field_checked(args.B0, grid)
        )
    return taylor_green_data(grid)


def _cmd_iterate(args) -> int:
    cfg = _build_config(args)
    data = _load_initial_data(args, cfg)
    icfg = cfg.iteration()
    diag = run_iteration(data, icfg)
    write_diagnostics(diag, _out_path(cfg, "diagnostics.csv"))
    write_filter_bank(diag.final_state.bank, _out_path(cfg, "filter_bank.json"))
    write_field(_out_path(cfg, "final_u.field"), diag.final_state.u_series.snapshots[-1])
    write_field(_out_path(cfg, "final_B.field"), diag.final_state.b_series.snapshots[-1])
    ok = True
    for rec in diag.records:
        if rec.h1_lhs > rec.h1_rhs or rec.h2_lhs > rec.h2_rhs:
            print(f"bound violated at iterate {rec.n}", file=sys.stderr)
            ok = False
    ratio_str = "none" if diag.decay_ratio is None else f"{diag.decay_ratio:.3g}"
    print(
        f"T={diag.T} E0={diag.e0:.6g} iterates={len(diag.records)} "
        f"converged={diag.converged} decay_ratio={ratio_str}"
    )
    return 0 if ok else 1


def _cmd_unique(args) -> int:
    cfg = _build_config(args)
    if args.perturbation < 0.0:
        raise ConfigError(f"perturbation must be >= 0, got {args.perturbation}")
    data = _load_initial_data(args, cfg)
    report = twin_run_uniqueness(data, cfg.iteration(), args.perturbation)
    write_uniqueness_report(report, _out_path(cfg, "uniqueness.json"))
    print(
        f"perturbation={report.perturbation_size:g} rho(T)={report.rho[-1]:.6g} "
        f"A_T={report.a_t:.6g} C_T={report.c_t:.6g} "
        f"osgood={'pass' if report.osgood_passed else 'FAIL'}"
    )
    return 0 if report.osgood_passed else 1


def _cmd_norms(args) -> int:
    cfg = _build_config(args)
    grid = cfg.grid()
    bank = cfg.iteration().bank(grid)
    s = grid.d / cfg.p if args.s is None else args.s
    fields = [_read_field_checked(path, grid) for path in args.files]
    spec = BesovSpec(s, cfg.p, args.r)
    for path, f in zip(args.files, fields):
        print(f"{path}: besov(s={s:g}, p={cfg.p:g}, r={args.r:g}) = "
              f"{besov_norm(f, spec, bank)!r}")
    if args.q is not None:
        if len(fields) < 2:
            raise ConfigError("a mixed space-time norm needs at least two snapshot files")
        times = np.arange(len(fields)) * cfg.dt
        series = TimeSeriesField(times, fields)
        mixed = chemin_lerner_norm(series, BesovSpec(s, cfg.p, args.r, args.q), bank)
        print(f"series: mixed(q={args.q:g}) over dt={cfg.dt:g} spacing = {mixed!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpmhd",
        description="Shell-localized analysis and small-data solvers on the periodic box.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument("suite", choices=sorted(SUITES))
    p_verify.add_argument("--samples", type=int, default=100,
                          help="corpus size (default 100)")
    p_verify.add_argument("--s1", type=float, default=None,
                          help="products suite: first regularity index")
    p_verify.add_argument("--s2", type=float, default=None,
                          help="products suite: second regularity index")
    p_verify.add_argument("--variant", choices=("T", "R", "full", "mixed"),
                          default=None, help="products suite: single variant")
    _add_config_flags(p_verify)
    p_verify.set_defaults(func=_cmd_verify)

    p_solve = sub.add_parser("solve", help="march one linear problem")
    p_solve.add_argument("problem", choices=("heat", "transport"))
    p_solve.add_argument("--initial", required=True, metavar="FILE",
                         help="initial field file")
    p_solve.add_argument("--velocity", metavar="FILE",
                         help="steady advecting velocity (transport only)")
    _add_config_flags(p_solve)
    p_solve.set_defaults(func=_cmd_solve)

    p_iter = sub.add_parser("iterate", help="run the coupled iteration")
    p_iter.add_argument("--u0", metavar="FILE", help="initial velocity field file")
    p_iter.add_argument("--B0", metavar="FILE", help="initial magnetic field file")
    _add_config_flags(p_iter)
    p_iter.set_defaults(func=_cmd_iterate)

    p_uni = sub.add_parser("unique", help="twin-run uniqueness gauge")
    p_uni.add_argument("--perturbation", type=float, required=True,
                       help="L2 size of the data perturbation")
    p_uni.add_argument("--u0", metavar="FILE", help="initial velocity field file")
    p_uni.add_argument("--B0", metavar="FILE", help="initial magnetic field file")
    _add_config_flags(p_uni)
    p_uni.set_defaults(func=_cmd_unique)

    p_norms = sub.add_parser("norms", help="print norms of stored fields")
    p_norms.add_argument("files", nargs="+", metavar="FILE")
    p_norms.add_argument("--s", type=float, default=None,
                         help="regularity index (default d/p)")
    p_norms.add_argument("--r", type=float, default=1.0, help="shell summation index")
    p_norms.add_argument("--q", type=float, default=None,
                         help="also print the time-mixed norm at this q")
    _add_config_flags(p_norms)
    p_norms.set_defaults(func=_cmd_norms)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except (ConfigError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry():
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entry()
