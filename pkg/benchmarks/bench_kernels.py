"""Compiled-vs-pure kernel timings.

Micro-benchmarks call both backends directly on identical instances;
the sweep benchmark runs the Monte Carlo harness end to end in a
subprocess with VOISCHED_PURE toggled.

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --sweep --runs 60
"""

from __future__ import annotations

import argparse
import os
import statistics
import subprocess
import sys
import time

import numpy as np

from voisched import _kernels_py
from voisched.config import default_config
from voisched.estimator import Belief
from voisched.experiment import agent_powers, build_fleet_for_run
from voisched.scheduler import voi_schedule

try:
    from voisched import _core
except ImportError:
    _core = None


def make_instances(n_instances: int, n_agents: int, seed: int = 7):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_instances):
        d = np.concatenate([rng.uniform(0.02, 0.3, 4), rng.uniform(0.005, 0.08, 4)])
        a = rng.standard_normal((4, 4)) * 0.01
        cov = np.diag(d[:4]) + a @ a.T
        kinds = (rng.uniform(size=n_agents) < 0.5).astype(np.uint8)
        noise = rng.uniform(0.01, 0.5, (n_agents, 2))
        dist = rng.uniform(1.0, 25.0, n_agents)
        avail = rng.uniform(size=n_agents) < 0.7
        xi = np.array([0.05, 0.05, 0.02, 0.02])
        out.append((cov, xi, kinds, noise, dist, avail))
    return out


def time_calls(fn, reps: int = 5) -> float:
    """Median wall time of ``fn()`` over ``reps`` repetitions."""
    samples = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def bench_greedy(backend, instances, budget: int = 10) -> float:
    def body():
        for cov, xi, kinds, noise, dist, avail in instances:
            backend.greedy_voi_select(cov, xi, kinds, noise, dist, avail, budget)

    return time_calls(body)


def bench_selector(backend, instances) -> float:
    def body():
        for cov, _xi, kinds, noise, _dist, _avail in instances:
            take = slice(0, 8)
            backend.selector_update(cov, kinds[take], noise[take])

    return time_calls(body)


def bench_schedule(backend, n_calls: int = 300) -> float:
    """voi_schedule through the public API with a frozen fleet, close to
    the per-QI production call."""
    cfg = default_config()
    fleet = build_fleet_for_run(cfg, 0)
    powers = agent_powers(fleet, cfg)
    req = cfg.requirements()
    rng = np.random.default_rng(3)
    priors = []
    for _ in range(n_calls):
        d = np.concatenate([rng.uniform(0.02, 0.3, 2), rng.uniform(0.004, 0.05, 2)])
        priors.append(Belief(mean=np.zeros(4), cov=np.diag(d)))
    reach = fleet.reachable_indices(np.zeros(2))

    def body():
        for prior in priors:
            voi_schedule(prior, fleet, reach, req, 10, powers, backend=backend)

    return time_calls(body)


def bench_sweep(runs: int) -> None:
    env_base = dict(os.environ)
    for label, extra in (("compiled", {}), ("pure", {"VOISCHED_PURE": "1"})):
        env = dict(env_base, **extra)
        t0 = time.perf_counter()
        subprocess.run(
            [
                sys.executable, "-m", "voisched.cli", "sweep",
                "--policies", "all", "--out", f"/tmp/voisched_bench_{label}",
                "--set", f"harness.runs={runs}",
            ],
            check=True,
            env=env,
            stdout=subprocess.DEVNULL,
        )
        print(f"sweep ({label:>8}): {time.perf_counter() - t0:7.2f} s "
              f"({runs} runs, 5 policies)")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--instances", type=int, default=400)
    ap.add_argument("--agents", type=int, default=60)
    ap.add_argument("--sweep", action="store_true", help="also time full sweeps")
    ap.add_argument("--runs", type=int, default=60, help="sweep runs per policy")
    args = ap.parse_args(argv)

    if _core is None:
        print("compiled backend not importable; micro-benchmarks cover pure only")
    instances = make_instances(args.instances, args.agents)
    rows = []
    for name, fn in (
        ("greedy_voi_select", lambda b: bench_greedy(b, instances)),
        ("selector_update", lambda b: bench_selector(b, instances)),
        ("voi_schedule", bench_schedule),
    ):
        pure = fn(_kernels_py)
        # The compiled module inlines its selector update, so not every
        # kernel has a compiled counterpart.
        has = _core is not None and (
            name != "selector_update" or hasattr(_core, "selector_update")
        )
        comp = fn(_core) if has else float("nan")
        rows.append((name, comp, pure))

    print(f"{'kernel':<20} {'compiled s':>11} {'pure s':>9} {'speedup':>8}")
    for name, comp, pure in rows:
        if comp == comp:
            print(f"{name:<20} {comp:>11.4f} {pure:>9.4f} {pure / comp:>7.2f}x")
        else:
            print(f"{name:<20} {'n/a':>11} {pure:>9.4f} {'n/a':>8}")

    if args.sweep:
        bench_sweep(args.runs)
    return 0


if __name__ == "__main__":
    sys.exit(main())
