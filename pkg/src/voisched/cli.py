"""Command-line front end.

Subcommands: ``run`` (one policy), ``sweep`` (several policies and
optionally several fleet sizes), ``verify-lemma1`` (closed-form power vs
Monte Carlo outage), ``selftest`` (fast invariant checks).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__, backend_name
from .config import SimConfig, load_config
from .errors import ConfigError
from .scheduler import POLICY_ORDER, Policy


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="INI config file (defaults if omitted)")
    p.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override one config key (repeatable)",
    )


def _load(args) -> SimConfig:
    return load_config(args.config, args.overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="voisched",
        description="Sensor-scheduling simulation harness for digital-twin tracking",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one policy, write artifacts")
    _add_common(p_run)
    p_run.add_argument("--policy", required=True, choices=[p.value for p in POLICY_ORDER])
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--runs", type=int, default=None, help="override harness.runs")
    p_run.add_argument("--jobs", type=int, default=1, help="worker processes")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run several policies, write artifacts")
    _add_common(p_sweep)
    p_sweep.add_argument(
        "--policies",
        default="all",
        help="comma-separated policy names, or 'all'",
    )
    p_sweep.add_argument("--out", required=True, help="output directory")
    p_sweep.add_argument("--runs", type=int, default=None, help="override harness.runs")
    p_sweep.add_argument(
        "--fleet-sizes",
        default=None,
        help="comma-separated total sensor counts; adds per-size "
        "subdirectories and fleet_summary.csv",
    )
    p_sweep.add_argument("--jobs", type=int, default=1, help="worker processes")
    p_sweep.set_defaults(func=cmd_sweep)

    p_lemma = sub.add_parser(
        "verify-lemma1", help="check Monte Carlo outage at the closed-form power"
    )
    _add_common(p_lemma)
    p_lemma.add_argument(
        "--distances", default="5,10,20", help="comma-separated AP distances (m)"
    )
    p_lemma.add_argument("--trials", type=int, default=10_000_000)
    p_lemma.set_defaults(func=cmd_verify_lemma1)

    p_self = sub.add_parser("selftest", help="run fast invariant checks")
    _add_common(p_self)
    p_self.set_defaults(func=cmd_selftest)
    return parser


def _policy_list(cfg: SimConfig, text: str) -> list[Policy]:
    if text.strip() == "all":
        return [p for p in POLICY_ORDER if p in cfg.policies()] or list(POLICY_ORDER)
    out = []
    for name in text.split(","):
        name = name.strip()
        try:
            out.append(Policy(name))
        except ValueError:
            raise ConfigError(f"unknown policy {name!r}") from None
    return out


def _write_artifacts(cfg: SimConfig, policies: list[Policy], out_dir: Path,
                     runs: int | None, jobs: int):
    from .experiment import emit_summary, run_monte_carlo

    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.resolved").write_text(cfg.to_ini_text())
    agg = run_monte_carlo(
        cfg,
        policies=policies,
        runs=runs,
        trace_path=out_dir / "trace.csv",
        fleet_path=out_dir / "fleet.csv",
        jobs=jobs,
    )
    emit_summary(agg, out_dir / "summary.csv")
    return agg


def _print_agg(agg) -> None:
    print(f"backend: {backend_name()}")
    print(f"{'policy':<14} {'mrmse':>10} {'ss_n_sched':>10} {'ss_power_w':>11} {'ss_viol':>8}")
    for policy in agg.policies:
        print(
            f"{policy:<14} {agg.mrmse(policy):>10.4f} "
            f"{agg.steady_state_mean(policy, 'mean_n_scheduled'):>10.3f} "
            f"{agg.steady_state_mean(policy, 'mean_total_power_w'):>11.3f} "
            f"{agg.steady_state_mean(policy, 'violation_prob'):>8.4f}"
        )


def cmd_run(args) -> int:
    cfg = _load(args)
    agg = _write_artifacts(
        cfg, [Policy(args.policy)], Path(args.out), args.runs, args.jobs
    )
    _print_agg(agg)
    return 0


def cmd_sweep(args) -> int:
    from .experiment import emit_fleet_summary, fleet_summary_rows

    cfg = _load(args)
    policies = _policy_list(cfg, args.policies)
    out_dir = Path(args.out)

    if args.fleet_sizes is None:
        agg = _write_artifacts(cfg, policies, out_dir, args.runs, args.jobs)
        _print_agg(agg)
        return 0

    sizes = [int(s) for s in args.fleet_sizes.split(",") if s.strip()]
    if not sizes:
        raise ConfigError("--fleet-sizes is empty")
    rows = []
    out_dir.mkdir(parents=True, exist_ok=True)
    for size in sizes:
        n_pos = (size + 1) // 2
        n_vel = size - n_pos
        sub_cfg = cfg.with_overrides(
            [f"fleet.n_position={n_pos}", f"fleet.n_velocity={n_vel}"]
        )
        sub_dir = out_dir / f"M{size}"
        print(f"fleet size {size} ({n_pos} position, {n_vel} velocity)")
        agg = _write_artifacts(sub_cfg, policies, sub_dir, args.runs, args.jobs)
        _print_agg(agg)
        rows.extend(fleet_summary_rows(agg, size))
    emit_fleet_summary(rows, out_dir / "fleet_summary.csv")
    print(f"wrote {out_dir / 'fleet_summary.csv'}")
    return 0


def cmd_verify_lemma1(args) -> int:
    import numpy as np

    from .channel import outage_probability_mc, required_tx_power

    cfg = _load(args)
    lp = cfg.link_params()
    distances = [float(d) for d in args.distances.split(",") if d.strip()]
    bound = 5.0 * lp.outage_eps
    print(f"target outage eps={lp.outage_eps:g}, acceptance bound 5*eps={bound:g}, "
          f"trials={args.trials}")
    print(f"{'d_ap_m':>8} {'power_w':>12} {'outage_mc':>12} {'verdict':>8}")
    failed = False
    for i, d in enumerate(distances):
        power = required_tx_power(lp, d)
        rng = np.random.default_rng(1000 + i)
        outage = outage_probability_mc(lp, power, d, args.trials, rng)
        ok = outage <= bound
        failed |= not ok
        print(f"{d:>8.3g} {power:>12.6g} {outage:>12.4e} {'OK' if ok else 'FAIL':>8}")
    return 1 if failed else 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    cfg = _load(args)
    return run_selftest(cfg)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
