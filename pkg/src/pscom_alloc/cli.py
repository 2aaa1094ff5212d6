"""Command-line front end: solve, sweep, and oracle-check workflows.

Exit codes are a stable contract:

* 0 success
* 1 invalid arguments or config (message names the offending field)
* 2 the instance is infeasible for at least one requested scheme
* 3 I/O failure while writing results
* 4 oracle validation violated

Summary lines go to stdout, diagnostics to stderr; machine consumers should
read the CSV files. The optional ``PSCOM_ALLOC_JOBS`` environment variable
sets the default parallelism degree (overridden by ``--jobs``).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from .experiments import (
    ConfigError,
    RunRecord,
    ScenarioConfig,
    SweepParam,
    SweepSpec,
    emit_plot,
    export_csv,
    load_scenario_config,
    realize_channel,
    run_scenario,
    run_sweep,
)
from .model import Method, total_power, validate_curve
from .solvers import ORACLE_MAX_USERS, solve_method1, solve_method2, solve_oracle

__all__ = ["CliInvocation", "main", "entry"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2
EXIT_IO = 3
EXIT_ORACLE = 4

# Fixed-ratio enumeration guardrails: warn above the first bound, refuse
# above the second unless --force is given.
METHOD2_WARN_CANDIDATES = 10**6
METHOD2_REFUSE_CANDIDATES = 10**8


class CliError(Exception):
    """Bad command line; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise CliError(message)


@dataclass(frozen=True)
class CliInvocation:
    """One parsed invocation of the tool."""

    subcommand: str
    config_path: Path
    output_dir: Path
    methods: tuple[Method, ...] | None
    sweep_param: SweepParam | None
    sweep_values: tuple[float, ...] | None
    force: bool
    jobs: int
    grid_points: int


def _default_jobs() -> int:
    raw = os.environ.get("PSCOM_ALLOC_JOBS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _build_parser() -> _Parser:
    parser = _Parser(prog="pscom-alloc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p: _Parser) -> None:
        p.add_argument("--config", required=True, help="scenario config JSON path")
        p.add_argument("--out", default="results", help="output directory for CSV/SVG files")
        p.add_argument(
            "--method",
            default=None,
            help="comma-separated subset of: "
            + ",".join(m.value for m in Method)
            + " (default: config methods)",
        )
        p.add_argument("--jobs", type=int, default=_default_jobs(), help="parallel sweep workers")
        p.add_argument(
            "--force",
            action="store_true",
            help="allow very large fixed-ratio enumerations",
        )

    p_solve = sub.add_parser("solve", help="run the configured schemes on one scenario")
    common(p_solve)

    p_sweep = sub.add_parser("sweep", help="rerun the scenario over a parameter range")
    common(p_sweep)
    p_sweep.add_argument(
        "--param",
        required=True,
        choices=[s.value for s in SweepParam],
        help="parameter to sweep (pmax in W, users as counts, noise in dBm)",
    )
    p_sweep.add_argument(
        "--values", required=True, help="comma-separated sweep values, strictly monotone"
    )

    p_oracle = sub.add_parser(
        "oracle-check", help="validate both schemes against the brute-force oracle"
    )
    common(p_oracle)
    p_oracle.add_argument(
        "--grid-points",
        type=int,
        default=25,
        help="oracle grid points per curve segment (default 25)",
    )
    return parser


def _parse_methods(raw: str | None) -> tuple[Method, ...] | None:
    if raw is None:
        return None
    methods = []
    for name in raw.split(","):
        name = name.strip()
        if not name:
            continue
        try:
            m = Method(name)
        except ValueError:
            raise CliError(f"unknown method {name!r}")
        if m not in methods:
            methods.append(m)
    if not methods:
        raise CliError("--method needs at least one method name")
    return tuple(methods)


def _parse_invocation(argv) -> CliInvocation:
    args = _build_parser().parse_args(argv)
    config_path = Path(args.config)
    if not config_path.is_file():
        raise CliError(f"config path does not exist: {config_path}")
    sweep_param = None
    sweep_values = None
    if args.subcommand == "sweep":
        sweep_param = SweepParam(args.param)
        try:
            sweep_values = tuple(float(v) for v in args.values.split(","))
        except ValueError:
            raise CliError(f"--values must be a comma-separated number list: {args.values!r}")
    if args.jobs < 1:
        raise CliError("--jobs must be >= 1")
    return CliInvocation(
        subcommand=args.subcommand,
        config_path=config_path,
        output_dir=Path(args.out),
        methods=_parse_methods(args.method),
        sweep_param=sweep_param,
        sweep_values=sweep_values,
        force=args.force,
        jobs=args.jobs,
        grid_points=getattr(args, "grid_points", 25),
    )


def _effective_config(inv: CliInvocation) -> ScenarioConfig:
    config = load_scenario_config(inv.config_path)
    if inv.methods is not None:
        config = replace(config, methods=inv.methods)
    return config


def _guard_enumeration(config: ScenarioConfig, max_users: int, force: bool) -> None:
    """Refuse fixed-ratio searches whose candidate count explodes."""
    if Method.METHOD2 not in config.methods or config.method2_shared_eta:
        return
    n_candidates = len(config.curve_knots) ** max_users
    if n_candidates > METHOD2_REFUSE_CANDIDATES and not force:
        raise ConfigError(
            f"methods: fixed-ratio search would enumerate {n_candidates:.3e} "
            f"candidate vectors (> {METHOD2_REFUSE_CANDIDATES:.0e}); "
            "pass --force to run anyway"
        )
    if n_candidates > METHOD2_WARN_CANDIDATES:
        print(
            f"warning: fixed-ratio search enumerates {n_candidates} candidate vectors",
            file=sys.stderr,
        )


def _print_records(records: list[RunRecord], with_sweep: bool) -> None:
    for r in records:
        prefix = f"{r.scenario_id}  " if with_sweep else ""
        rep = r.report
        print(
            f"{prefix}{rep.method.value:<12} tau={rep.tau_bps:.6e} bit/s  "
            f"total_power={total_power(rep.allocation):.6f} W  "
            f"feasible={'yes' if rep.feasible else 'no'}  wall={r.wall_ms:.1f} ms"
        )


def _cmd_solve(inv: CliInvocation) -> int:
    config = _effective_config(inv)
    _guard_enumeration(config, config.channel.user_count, inv.force)
    records = run_scenario(config)
    summary, detail = export_csv(records, inv.output_dir)
    _print_records(records, with_sweep=False)
    print(f"wrote {summary} and {detail}", file=sys.stderr)
    if any(not r.report.feasible for r in records):
        print("at least one scheme found the instance infeasible", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_sweep(inv: CliInvocation) -> int:
    config = _effective_config(inv)
    try:
        sweep = SweepSpec(parameter=inv.sweep_param, values=inv.sweep_values)
    except ValueError as exc:
        raise ConfigError(f"sweep: {exc}") from exc
    if inv.sweep_param is SweepParam.USERS:
        max_users = int(max(inv.sweep_values))
    else:
        max_users = config.channel.user_count
    _guard_enumeration(config, max_users, inv.force)
    records = run_sweep(config, sweep, jobs=inv.jobs)
    summary, detail = export_csv(records, inv.output_dir)
    plot = emit_plot(records, Path(inv.output_dir) / f"sweep_{sweep.parameter.value}.svg")
    _print_records(records, with_sweep=True)
    print(f"wrote {summary}, {detail} and {plot}", file=sys.stderr)
    if any(not r.report.feasible for r in records):
        print("at least one scheme found an instance infeasible", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_oracle_check(inv: CliInvocation) -> int:
    config = load_scenario_config(inv.config_path)
    channel = realize_channel(config.channel)
    if channel.n_users > ORACLE_MAX_USERS:
        raise ConfigError(
            f"channel: oracle-check is limited to {ORACLE_MAX_USERS} users "
            f"(config has {channel.n_users})"
        )
    curve = validate_curve(config.curve_knots)
    params = config.system
    r1 = solve_method1(channel, curve, params)
    r2 = solve_method2(channel, curve, params, shared_eta=config.method2_shared_eta)
    fine = solve_oracle(channel, curve, params, inv.grid_points)
    knots_only = solve_oracle(channel, curve, params, 0)

    print(f"method1      tau={r1.tau_bps:.10e} bit/s")
    print(f"method2      tau={r2.tau_bps:.10e} bit/s")
    print(f"oracle       tau={fine.tau_bps:.10e} bit/s ({inv.grid_points} points/segment)")
    print(f"oracle-knots tau={knots_only.tau_bps:.10e} bit/s")
    print(f"oracle - method1 = {fine.tau_bps - r1.tau_bps:.6e} bit/s")
    print(f"oracle - method2 = {fine.tau_bps - r2.tau_bps:.6e} bit/s")

    eps = params.epsilon
    ok = True
    if fine.tau_bps < max(r1.tau_bps, r2.tau_bps) - eps:
        print("violation: oracle fell below a scheme it must dominate", file=sys.stderr)
        ok = False
    knots_gap = abs(knots_only.tau_bps - r2.tau_bps)
    if knots_gap > 1e-9 * max(1.0, abs(r2.tau_bps)):
        print(
            f"violation: knots-only oracle differs from method2 by {knots_gap:.3e} bit/s",
            file=sys.stderr,
        )
        ok = False
    print(f"oracle-check: {'OK' if ok else 'FAILED'}")
    return EXIT_OK if ok else EXIT_ORACLE


def main(argv=None) -> int:
    try:
        inv = _parse_invocation(argv)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if inv.subcommand == "solve":
            return _cmd_solve(inv)
        if inv.subcommand == "sweep":
            return _cmd_sweep(inv)
        return _cmd_oracle_check(inv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
