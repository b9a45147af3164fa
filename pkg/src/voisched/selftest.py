"""Fast invariant checks behind ``voisched selftest``.

Each check prints one PASS/FAIL line; the command exits nonzero if any
check fails.  Runtime target: a few seconds.
"""

from __future__ import annotations

import tempfile
import traceback
from pathlib import Path

import numpy as np

from .config import SimConfig, load_config
from .estimator import Belief, Requirements
from .experiment import (
    agent_powers,
    build_fleet_for_run,
    read_fleet,
    read_trace,
    run_episode,
    run_monte_carlo,
    emit_summary,
)
from .scheduler import Policy, voi_schedule
from .sensing import place_fleet


def _small(cfg: SimConfig) -> SimConfig:
    return cfg.with_overrides(["harness.runs=2", "harness.n_qi=30"])


def check_config_round_trip(cfg: SimConfig) -> str | None:
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "echo.ini"
        path.write_text(cfg.to_ini_text())
        again = load_config(path)
    if again.values != cfg.values:
        return "re-parsed config differs from original"
    return None


def check_loop_bound(cfg: SimConfig) -> str | None:
    rng = np.random.default_rng(303)
    req = cfg.requirements()
    budget = cfg["harness"]["slot_budget"]
    for trial in range(300):
        fleet = place_fleet(
            n_position=int(rng.integers(0, 8)),
            n_velocity=int(rng.integers(0, 8)),
            region_radius=cfg["dynamics"]["region_radius_m"],
            d_max=cfg["fleet"]["d_max_m"],
            pos_var_range=(0.01, 1.0),
            vel_var_range=(0.004, 0.4),
            rng=rng,
        )
        if len(fleet) == 0:
            continue
        a = rng.standard_normal((4, 4)) * 0.1
        prior = Belief(
            mean=np.zeros(4), cov=a @ a.T + np.diag(rng.uniform(0.002, 0.1, 4))
        )
        reach = np.flatnonzero(rng.random(len(fleet)) < 0.8)
        d = voi_schedule(prior, fleet, reach, req, budget, np.ones(len(fleet)))
        if d.iterations_used > budget or len(d.scheduled) > budget:
            return f"trial {trial}: {d.iterations_used} iterations > budget {budget}"
    return None


def check_early_exit(cfg: SimConfig) -> str | None:
    req = cfg.requirements()
    fleet = place_fleet(
        n_position=5,
        n_velocity=5,
        region_radius=cfg["dynamics"]["region_radius_m"],
        d_max=cfg["fleet"]["d_max_m"],
        pos_var_range=(0.01, 0.1),
        vel_var_range=(0.004, 0.04),
        rng=np.random.default_rng(7),
    )
    prior = Belief(mean=np.zeros(4), cov=np.diag(req.xi_sq * 0.9))
    d = voi_schedule(prior, fleet, np.arange(len(fleet)), req, 10, np.ones(len(fleet)))
    if d.scheduled or d.powers or d.objective_power_term != 0.0:
        return f"compliant prior produced schedule {d.scheduled}"
    return None


def check_benchmark_counts(cfg: SimConfig) -> str | None:
    small = _small(cfg)
    budget = small["harness"]["slot_budget"]
    for policy in (Policy.COST_BG, Policy.CONFIDENCE_BG, Policy.RANDOM):
        aux: dict = {}
        records = run_episode(small, policy, run=0, aux=aux)
        for rec, n_reach in zip(records, aux["reachable"]):
            if rec.n_scheduled != min(budget, n_reach):
                return (
                    f"{policy.value} qi={rec.qi}: scheduled {rec.n_scheduled}, "
                    f"expected min({budget}, {n_reach})"
                )
    return None


def check_power_conservation(cfg: SimConfig) -> str | None:
    small = _small(cfg)
    with tempfile.TemporaryDirectory() as tmp:
        trace_path = Path(tmp) / "trace.csv"
        fleet_path = Path(tmp) / "fleet.csv"
        run_monte_carlo(small, trace_path=trace_path, fleet_path=fleet_path)
        fleets = read_fleet(fleet_path)
        power_of = {
            (run, rec["agent_id"]): rec["power_w"]
            for run, recs in fleets.items()
            for rec in recs
        }
        for rec in read_trace(trace_path):
            expected = sum(power_of[(rec.run, a)] for a in rec.agents)
            if abs(rec.total_power_w - expected) > 1e-6 * max(expected, 1.0):
                return (
                    f"{rec.policy} run={rec.run} qi={rec.qi}: power "
                    f"{rec.total_power_w} != sum over agents {expected}"
                )
            if rec.n_scheduled == 0 and rec.total_power_w != 0.0:
                return f"{rec.policy} qi={rec.qi}: empty schedule with power"
    return None


def check_determinism(cfg: SimConfig) -> str | None:
    small = _small(cfg)
    blobs = []
    for _ in range(2):
        with tempfile.TemporaryDirectory() as tmp:
            trace_path = Path(tmp) / "trace.csv"
            summary_path = Path(tmp) / "summary.csv"
            agg = run_monte_carlo(small, trace_path=trace_path)
            emit_summary(agg, summary_path)
            blobs.append((trace_path.read_bytes(), summary_path.read_bytes()))
    if blobs[0] != blobs[1]:
        return "two identical invocations produced different bytes"
    return None


def check_fleet_powers_positive(cfg: SimConfig) -> str | None:
    fleet = build_fleet_for_run(cfg, run=0)
    powers = agent_powers(fleet, cfg)
    if len(powers) != len(fleet) or np.any(powers <= 0):
        return "nonpositive per-agent power"
    return None


CHECKS = [
    ("config-round-trip", check_config_round_trip),
    ("greedy-loop-bound", check_loop_bound),
    ("greedy-early-exit", check_early_exit),
    ("benchmark-counts", check_benchmark_counts),
    ("power-conservation", check_power_conservation),
    ("determinism", check_determinism),
    ("fleet-powers", check_fleet_powers_positive),
]


def run_selftest(cfg: SimConfig) -> int:
    failures = 0
    for name, check in CHECKS:
        try:
            problem = check(cfg)
        except Exception:
            problem = traceback.format_exc(limit=3)
        if problem is None:
            print(f"PASS {name}")
        else:
            print(f"FAIL {name}: {problem}")
            failures += 1
    print(f"{len(CHECKS) - failures}/{len(CHECKS)} checks passed")
    return 1 if failures else 0
