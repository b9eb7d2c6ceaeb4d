"""Command-line front end: run, study, check, and weights subcommands.

Exit codes: 0 on success, 2 when an invariant check or study criterion fails,
1 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, config_to_text, parse_config
from .diagnostics import (
    check_conservation,
    check_entropy,
    check_max_principle,
    check_tvd,
)
from .harness import refine_fixed_delta, refine_joint_limit
from .kernels import Kernel, compute_weights
from .outputs import (
    weights_table,
    write_check_json,
    write_plot_data,
    write_solution_csv,
    write_study_csv,
    write_study_json,
    write_weights_csv,
)
from .solver import SchemeConfig, run

__all__ = ["main"]

_OVERRIDE_FLAGS = {
    "dx": "grid.dx",
    "delta": "kernel.delta",
    "flux": "flux.family",
    "T": "problem.T",
    "levels": "study.levels",
    "out": "output.dir",
}


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; this tool reserves 2 for invariant
    # failures, so remap usage problems to exit code 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_override_flags(sub) -> None:
    sub.add_argument("--dx", help="override [grid] dx")
    sub.add_argument("--delta", help="override [kernel] delta")
    sub.add_argument("--flux", help="override [flux] family")
    sub.add_argument("--T", help="override [problem] T")
    sub.add_argument("--levels", help="override [study] levels")
    sub.add_argument("--out", help="override [output] dir")


def _overrides(args) -> dict[str, str]:
    out = {}
    for flag, dotted in _OVERRIDE_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            out[dotted] = value
    return out


def build_parser() -> _Parser:
    parser = _Parser(prog="horizonflux", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a single simulation, write solution CSV")
    p_run.add_argument("--config", required=True, help="path to the config file")
    _add_override_flags(p_run)

    p_study = sub.add_parser("study", help="run a grid-refinement study")
    p_study.add_argument("--config", required=True)
    p_study.add_argument(
        "--workers", type=int, default=1, help="levels run concurrently with this many workers"
    )
    _add_override_flags(p_study)

    p_check = sub.add_parser("check", help="run and audit every invariant")
    p_check.add_argument("--config", required=True)
    _add_override_flags(p_check)

    p_weights = sub.add_parser("weights", help="print the W_k table for (kernel, dx)")
    p_weights.add_argument("--config", help="optional config supplying kernel and dx")
    p_weights.add_argument("--profile", help="kernel profile (default uniform)")
    _add_override_flags(p_weights)

    return parser


def _geometry(cfg: RunConfig) -> tuple[float, int]:
    span = cfg.x_right - cfg.x_left
    n = int(round(span / cfg.dx))
    if n < 1 or abs(span / cfg.dx - n) > 1e-9:
        raise ValueError(f"dx={cfg.dx} does not tile the domain [{cfg.x_left}, {cfg.x_right}]")
    return cfg.x_left, n


def _scheme(cfg: RunConfig) -> SchemeConfig:
    return SchemeConfig(
        kernel=Kernel(delta=cfg.delta, profile=cfg.profile),
        flux=cfg.build_flux(),
        mesh_ratio=cfg.mesh_ratio,
        final_time=cfg.final_time,
        cfl_safety=cfg.cfl_safety,
    )


def _config_echo(cfg: RunConfig) -> dict:
    return {"text": config_to_text(cfg)}

def _cmd_run(args) -> int:
    cfg = parse_config(args.config, _overrides(args))
    problem = cfg.resolved_problem()
    x0, n_cells = _geometry(cfg)
    targets = np.linspace(0.0, cfg.final_time, cfg.output_times)
    trajectory = run(
        _scheme(cfg),
        problem.u0,
        x0=x0,
        dx=cfg.dx,
        n_cells=n_cells,
        boundary=cfg.boundary,
        output_times=targets,
        store="snapshots",
        enforce_cfl=cfg.enforce_cfl,
        breakpoints=problem.u0_breakpoints or None,
    )
    out = Path(cfg.out_dir) / "solution.csv"
    write_solution_csv(trajectory, out)
    print(f"wrote {len(trajectory)} snapshots x {n_cells} cells to {out}")
    return 0


def _cmd_check(args) -> int:
    cfg = parse_config(args.config, _overrides(args))
    problem = cfg.resolved_problem()
    x0, n_cells = _geometry(cfg)
    trajectory = run(
        _scheme(cfg),
        problem.u0,
        x0=x0,
        dx=cfg.dx,
        n_cells=n_cells,
        boundary=cfg.boundary,
        store="all",
        enforce_cfl=cfg.enforce_cfl,
        breakpoints=problem.u0_breakpoints or None,
    )
    weights = compute_weights(Kernel(delta=cfg.delta, profile=cfg.profile), cfg.dx)
    reports = [check_max_principle(trajectory), check_tvd(trajectory)]
    if cfg.boundary == "periodic":
        reports.append(check_conservation(trajectory))
    reports.append(check_entropy(trajectory, weights, cfg.build_flux()))
    out = Path(cfg.out_dir) / "invariants.json"
    write_check_json(reports, out, config_echo=_config_echo(cfg))
    for rep in reports:
        verdict = "pass" if rep.passed else "FAIL"
        print(f"{rep.name}: {verdict} (violation {rep.violation:.3e}, tol {rep.tolerance:.3e})")
    print(f"wrote {out}")
    return 0 if all(rep.passed for rep in reports) else 2


def _cmd_study(args) -> int:
    cfg = parse_config(args.config, _overrides(args))
    problem = cfg.resolved_problem()
    common = dict(
        profile=cfg.profile,
        lf_lambda=cfg.lf_lambda,
        final_time=cfg.final_time,
        window=(cfg.window_left, cfg.window_right),
        n_output_times=cfg.output_times,
        workers=max(1, args.workers),
    )
    if cfg.regime == "fixed_delta":
        report = refine_fixed_delta(
            problem, cfg.flux_family, cfg.delta, cfg.dx, cfg.levels, cfg.mesh_ratio, **common
        )
    else:
        report = refine_joint_limit(
            problem, cfg.flux_family, cfg.coupling, cfg.dx, cfg.levels, cfg.mesh_ratio, **common
        )
    out_dir = Path(cfg.out_dir)
    write_study_json(report, out_dir / "study.json", config_echo=_config_echo(cfg))
    write_study_csv(report, out_dir / "study.csv")
    write_plot_data(report, out_dir / "study_plot.dat")

    print(f"{report.regime} study of {report.problem} ({report.measure_name})")
    for rec in report.levels:
        measure = "-" if rec.measure is None else f"{rec.measure:.6e}"
        print(
            f"  level {rec.level}: dx={rec.dx:.6g} delta={rec.delta:.6g} "
            f"n={rec.n_cells} measure={measure} wall={rec.wall_time:.2f}s"
        )
    print(f"  eoc: {['%.3f' % r for r in report.eoc]}")
    status = "pass" if report.passed() else "FAIL"
    print(f"  invariants+decrease: {status}; wrote {out_dir}/study.*")
    return 0 if report.passed() else 2


def _cmd_weights(args) -> int:
    if args.config is not None:
        cfg = parse_config(args.config, _overrides(args))
        profile = args.profile or cfg.profile
        delta, dx, out_dir = cfg.delta, cfg.dx, cfg.out_dir
    else:
        if args.delta is None or args.dx is None:
            raise ValueError("weights needs --config or both --delta and --dx")
        profile = args.profile or "uniform"
        delta, dx = float(args.delta), float(args.dx)
        out_dir = args.out
    weights = compute_weights(Kernel(delta=delta, profile=profile), dx)
    sys.stdout.write(weights_table(weights))
    if out_dir is not None:
        path = Path(out_dir) / "weights.csv"
        write_weights_csv(weights, path)
        print(f"wrote {path}")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "study": _cmd_study,
    "check": _cmd_check,
    "weights": _cmd_weights,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        # a run that lost finiteness is a failed invariant, not a usage error
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
