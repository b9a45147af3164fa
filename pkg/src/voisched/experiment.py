"""Monte Carlo harness: runs episodes per (policy, run), aggregates the
four reported metrics, and reads/writes the CSV artifacts.

Seeding: scenario streams (fleet placement, truth trajectory) derive
from (base_seed, run) so every policy faces the same world in run r;
policy-dependent streams (measurement noise, random policy) derive from
(base_seed, policy, run).  Everything is deterministic given the config.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import required_tx_power
from .config import SimConfig
from .dynamics import POS, clamp_to_region, control_input, linearize, step_true_state
from .errors import ContractViolation
from .estimator import Belief, predict, stack, update, violated_features
from .scheduler import (
    POLICY_ORDER,
    Policy,
    ScheduleDecision,
    bcs_schedule,
    confidence_bg_schedule,
    cost_bg_schedule,
    random_schedule,
    voi_schedule,
)
from .sensing import Fleet, KIND_POSITION, observe_many, place_fleet

TRACE_HEADER = [
    "qi", "policy", "run", "n_scheduled", "total_power_w",
    "violated", "sq_error", "objective", "agents",
]
SUMMARY_HEADER = [
    "policy", "qi", "mean_n_scheduled", "mean_total_power_w",
    "violation_prob", "rmse",
]
FLEET_HEADER = [
    "run", "agent_id", "kind", "x_m", "y_m", "noise_var", "dist_ap_m", "power_w",
]
FLEET_SUMMARY_HEADER = [
    "fleet_size", "policy", "mean_n_scheduled", "mean_total_power_w",
    "violation_prob", "mrmse",
]

# QIs before this index are transient; steady-state aggregates start here.
WARMUP_QI = 40

# Uplink powers are priced at no less than 1 m (the path-loss reference
# distance); agents may land arbitrarily close to the AP.
_MIN_PRICING_DIST_M = 1.0


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


@dataclass
class QIRecord:
    qi: int
    policy: str
    run: int
    n_scheduled: int
    total_power_w: float
    violated: bool
    sq_error: float
    objective: float
    agents: tuple[int, ...]


@dataclass
class AggregateMetrics:
    """Per-policy, per-QI means across runs plus MRMSE per policy."""

    n_qi: int
    runs: int
    policies: list[str]
    mean_n_scheduled: dict[str, np.ndarray] = field(default_factory=dict)
    mean_total_power_w: dict[str, np.ndarray] = field(default_factory=dict)
    violation_prob: dict[str, np.ndarray] = field(default_factory=dict)
    rmse: dict[str, np.ndarray] = field(default_factory=dict)

    def mrmse(self, policy: str) -> float:
        return float(np.mean(self.rmse[policy]))

    def steady_state_mean(self, policy: str, metric: str, start_qi: int = WARMUP_QI) -> float:
        values = getattr(self, metric)[policy]
        # Short debug runs: fall back to the last QI rather than nan.
        start = min(start_qi - 1, len(values) - 1)
        return float(np.mean(values[start:]))


def agent_powers(fleet: Fleet, cfg: SimConfig) -> np.ndarray:
    """Per-agent uplink power (W), fixed for an episode."""
    lp = cfg.link_params()
    ptx_max = cfg["link"]["ptx_max_w"]
    powers = np.empty(len(fleet))
    for i, d in enumerate(fleet.dist_ap):
        powers[i] = required_tx_power(lp, max(float(d), _MIN_PRICING_DIST_M))
    worst = float(powers.max(initial=0.0))
    if worst > ptx_max:
        warnings.warn(
            f"required transmit power {worst:.3g} W exceeds ptx_max_w "
            f"{ptx_max:.3g} W",
            stacklevel=2,
        )
    return powers


def scenario_seed(base_seed: int, run: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([base_seed, run])


def _scenario_streams(base_seed: int, run: int) -> tuple[np.random.SeedSequence, ...]:
    """(fleet, truth) seed sequences, shared by all policies in a run."""
    return tuple(scenario_seed(base_seed, run).spawn(2))


def episode_seed(base_seed: int, policy: Policy, run: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([base_seed, POLICY_ORDER.index(policy) + 1, run])


def build_fleet_for_run(cfg: SimConfig, run: int) -> Fleet:
    rng = np.random.default_rng(_scenario_streams(cfg["harness"]["base_seed"], run)[0])
    fl = cfg["fleet"]
    return place_fleet(
        n_position=fl["n_position"],
        n_velocity=fl["n_velocity"],
        region_radius=cfg["dynamics"]["region_radius_m"],
        d_max=fl["d_max_m"],
        pos_var_range=(fl["pos_var_lo"], fl["pos_var_hi"]),
        vel_var_range=(fl["vel_var_lo"], fl["vel_var_hi"]),
        rng=rng,
        noise_dist=fl["noise_dist"],
        ap_location=np.array([cfg["dynamics"]["center_x_m"], cfg["dynamics"]["center_y_m"]]),
        elite_frac=fl["elite_frac"],
        bulk_scale=fl["bulk_scale"],
    )


def run_episode(
    cfg: SimConfig,
    policy: Policy,
    run: int,
    fleet: Fleet | None = None,
    powers: np.ndarray | None = None,
    aux: dict | None = None,
) -> list[QIRecord]:
    """One episode: n_qi scheduling/estimation cycles under one policy.

    The truth trajectory stream is drawn from the scenario seed so all
    policies in the same run see the same trajectory; measurement and
    policy randomness are per-(policy, run).  When ``aux`` is given, the
    per-QI reachable-set sizes are stored under aux["reachable"] and the
    per-QI prior compliance flags under aux["prior_violated"].
    """
    harness = cfg["harness"]
    base_seed = harness["base_seed"]
    truth_rng = np.random.default_rng(_scenario_streams(base_seed, run)[1])
    meas_ss, policy_ss = episode_seed(base_seed, policy, run).spawn(2)
    meas_rng = np.random.default_rng(meas_ss)
    policy_rng = np.random.default_rng(policy_ss)

    if fleet is None:
        fleet = build_fleet_for_run(cfg, run)
    if powers is None:
        powers = agent_powers(fleet, cfg)

    dyn = cfg.dynamics_config()
    pm = linearize(dyn)
    req = cfg.requirements()
    budget = harness["slot_budget"]
    alpha = harness["alpha"]
    regularize = harness["regularize"]

    belief = Belief(mean=dyn.init_mean.copy(), cov=dyn.init_cov())
    s_true = belief.mean + np.linalg.cholesky(dyn.init_cov()) @ truth_rng.standard_normal(4)
    s_true[POS] = clamp_to_region(s_true[POS], dyn.force)

    reachable_sizes: list[int] = []
    prior_violated: list[bool] = []
    records: list[QIRecord] = []
    for n in range(1, harness["n_qi"] + 1):
        try:
            s_true, _accel = step_true_state(s_true, n - 1, dyn, truth_rng)
            s_true = s_true.copy()
            s_true[POS] = clamp_to_region(s_true[POS], dyn.force)

            control = None
            if dyn.known_input:
                # The restoring force is undefined outside the disk; a
                # drifting estimate must not abort the episode.
                guess = belief.mean.copy()
                guess[POS] = clamp_to_region(guess[POS], dyn.force)
                control = control_input(guess, n - 1, dyn)
            prior = predict(belief, pm, control=control)

            reach_idx = fleet.reachable_indices(s_true[POS])
            reachable_sizes.append(len(reach_idx))
            prior_violated.append(violated_features(prior, req).size > 0)
            decision = _dispatch(
                policy, prior, fleet, reach_idx, req, budget, powers, policy_rng
            )

            if decision.scheduled:
                idx0 = [a - 1 for a in decision.scheduled]
                values = observe_many(fleet, idx0, s_true, meas_rng)
                so = stack(list(values), [fleet.agents[i] for i in idx0])
                belief = update(prior, so, regularize=regularize)
            else:
                belief = prior

            err = s_true - belief.mean
            records.append(
                QIRecord(
                    qi=n,
                    policy=policy.value,
                    run=run,
                    n_scheduled=len(decision.scheduled),
                    total_power_w=float(sum(decision.powers)),
                    violated=violated_features(belief, req).size > 0,
                    sq_error=float(err @ err),
                    objective=decision.objective_value(alpha),
                    agents=tuple(decision.scheduled),
                )
            )
        except Exception as exc:
            raise RuntimeError(
                f"episode failed at qi={n} policy={policy.value} run={run}: {exc}"
            ) from exc
    if aux is not None:
        aux["reachable"] = reachable_sizes
        aux["prior_violated"] = prior_violated
    return records


def _dispatch(
    policy: Policy,
    prior: Belief,
    fleet: Fleet,
    reach_idx: np.ndarray,
    req,
    budget: int,
    powers: np.ndarray,
    policy_rng: np.random.Generator,
) -> ScheduleDecision:
    if policy is Policy.VOI:
        return voi_schedule(prior, fleet, reach_idx, req, budget, powers)
    if policy is Policy.COST_BG:
        return cost_bg_schedule(prior, fleet, reach_idx, req, budget, powers)
    if policy is Policy.CONFIDENCE_BG:
        return confidence_bg_schedule(prior, fleet, reach_idx, req, budget, powers)
    if policy is Policy.RANDOM:
        return random_schedule(prior, fleet, reach_idx, req, budget, powers, policy_rng)
    if policy is Policy.BCS:
        return bcs_schedule(prior, fleet, reach_idx, req, budget, powers)
    raise ContractViolation(f"unknown policy {policy!r}")


def _run_one(cfg: SimConfig, policies: list[Policy], run: int):
    """All episodes for one run; returns per-policy records plus the
    fleet rows.  Pure function of (cfg, policies, run), which makes it
    the worker-pool work unit."""
    fleet = build_fleet_for_run(cfg, run)
    powers = agent_powers(fleet, cfg)
    by_policy = {
        p.value: run_episode(cfg, p, run, fleet=fleet, powers=powers)
        for p in policies
    }
    return fleet, powers, by_policy


def run_monte_carlo(
    cfg: SimConfig,
    policies: list[Policy] | None = None,
    runs: int | None = None,
    trace_path: str | Path | None = None,
    fleet_path: str | Path | None = None,
    jobs: int = 1,
) -> AggregateMetrics:
    """All (policy, run) episodes; optionally streams trace.csv and
    fleet.csv while aggregating.  ``jobs`` > 1 distributes runs over a
    joblib worker pool; the writer stays in this process, so artifacts
    are identical regardless of jobs."""
    policies = cfg.policies() if policies is None else policies
    runs = cfg["harness"]["runs"] if runs is None else runs
    if runs < 1:
        raise ContractViolation("runs must be >= 1")
    n_qi = cfg["harness"]["n_qi"]

    agg = AggregateMetrics(n_qi=n_qi, runs=runs, policies=[p.value for p in policies])
    sums = {
        p.value: {
            "n": np.zeros(n_qi),
            "pw": np.zeros(n_qi),
            "viol": np.zeros(n_qi),
            "sq": np.zeros(n_qi),
        }
        for p in policies
    }

    if jobs == 1:
        results = (_run_one(cfg, policies, run) for run in range(runs))
    else:
        from joblib import Parallel, delayed

        results = Parallel(n_jobs=jobs, return_as="generator")(
            delayed(_run_one)(cfg, policies, run) for run in range(runs)
        )

    trace_fh = open(trace_path, "w", newline="") if trace_path else None
    fleet_fh = open(fleet_path, "w", newline="") if fleet_path else None
    try:
        trace_writer = None
        if trace_fh:
            trace_writer = csv.writer(trace_fh)
            trace_writer.writerow(TRACE_HEADER)
        fleet_writer = None
        if fleet_fh:
            fleet_writer = csv.writer(fleet_fh)
            fleet_writer.writerow(FLEET_HEADER)

        for run, (fleet, powers, by_policy) in enumerate(results):
            if fleet_writer:
                _write_fleet_rows(fleet_writer, fleet, powers, run)
            for policy in policies:
                records = by_policy[policy.value]
                s = sums[policy.value]
                for r in records:
                    i = r.qi - 1
                    s["n"][i] += r.n_scheduled
                    s["pw"][i] += r.total_power_w
                    s["viol"][i] += 1.0 if r.violated else 0.0
                    s["sq"][i] += r.sq_error
                if trace_writer:
                    for r in records:
                        trace_writer.writerow(_trace_row(r))
    finally:
        if trace_fh:
            trace_fh.close()
        if fleet_fh:
            fleet_fh.close()

    for policy in policies:
        s = sums[policy.value]
        agg.mean_n_scheduled[policy.value] = s["n"] / runs
        agg.mean_total_power_w[policy.value] = s["pw"] / runs
        agg.violation_prob[policy.value] = s["viol"] / runs
        agg.rmse[policy.value] = np.sqrt(s["sq"] / runs)
    return agg


# -- CSV plumbing ----------------------------------------------------


def _trace_row(r: QIRecord) -> list[str]:
    return [
        str(r.qi),
        r.policy,
        str(r.run),
        str(r.n_scheduled),
        _fmt(r.total_power_w),
        "true" if r.violated else "false",
        _fmt(r.sq_error),
        _fmt(r.objective),
        ";".join(str(a) for a in r.agents),
    ]


def _write_fleet_rows(writer, fleet: Fleet, powers: np.ndarray, run: int) -> None:
    for agent, power in zip(fleet.agents, powers):
        writer.writerow(
            [
                str(run),
                str(agent.agent_id),
                "position" if agent.kind == KIND_POSITION else "velocity",
                _fmt(agent.location[0]),
                _fmt(agent.location[1]),
                _fmt(agent.meas_cov[0, 0]),
                _fmt(agent.dist_ap),
                _fmt(power),
            ]
        )


def emit_csv(records: list[QIRecord], path: str | Path) -> None:
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_HEADER)
            for r in records:
                writer.writerow(_trace_row(r))
    except OSError as exc:
        raise OSError(f"writing trace to {path}: {exc}") from exc


def emit_summary(agg: AggregateMetrics, path: str | Path) -> None:
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(SUMMARY_HEADER)
            for policy in agg.policies:
                for i in range(agg.n_qi):
                    writer.writerow(
                        [
                            policy,
                            str(i + 1),
                            _fmt(agg.mean_n_scheduled[policy][i]),
                            _fmt(agg.mean_total_power_w[policy][i]),
                            _fmt(agg.violation_prob[policy][i]),
                            _fmt(agg.rmse[policy][i]),
                        ]
                    )
    except OSError as exc:
        raise OSError(f"writing summary to {path}: {exc}") from exc


def read_trace(path: str | Path) -> list[QIRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != TRACE_HEADER:
            raise ContractViolation(f"unexpected trace header {header} in {path}")
        out = []
        for row in reader:
            out.append(
                QIRecord(
                    qi=int(row[0]),
                    policy=row[1],
                    run=int(row[2]),
                    n_scheduled=int(row[3]),
                    total_power_w=float(row[4]),
                    violated=row[5] == "true",
                    sq_error=float(row[6]),
                    objective=float(row[7]),
                    agents=tuple(int(a) for a in row[8].split(";") if a),
                )
            )
    return out


def read_summary(path: str | Path) -> AggregateMetrics:
    rows: dict[str, list[list[float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != SUMMARY_HEADER:
            raise ContractViolation(f"unexpected summary header {header} in {path}")
        for row in reader:
            rows.setdefault(row[0], []).append([float(x) for x in row[2:]])
    policies = list(rows)
    n_qi = len(rows[policies[0]]) if policies else 0
    agg = AggregateMetrics(n_qi=n_qi, runs=0, policies=policies)
    for policy, data in rows.items():
        arr = np.asarray(data)
        if arr.shape[0] != n_qi:
            raise ContractViolation(f"ragged summary for policy {policy} in {path}")
        agg.mean_n_scheduled[policy] = arr[:, 0]
        agg.mean_total_power_w[policy] = arr[:, 1]
        agg.violation_prob[policy] = arr[:, 2]
        agg.rmse[policy] = arr[:, 3]
    return agg


def read_fleet(path: str | Path) -> dict[int, list[dict]]:
    """fleet.csv rows grouped by run; values keep the column names."""
    out: dict[int, list[dict]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != FLEET_HEADER:
            raise ContractViolation(f"unexpected fleet header {header} in {path}")
        for row in reader:
            rec = {
                "run": int(row[0]),
                "agent_id": int(row[1]),
                "kind": row[2],
                "x_m": float(row[3]),
                "y_m": float(row[4]),
                "noise_var": float(row[5]),
                "dist_ap_m": float(row[6]),
                "power_w": float(row[7]),
            }
            out.setdefault(rec["run"], []).append(rec)
    return out


def emit_fleet_summary(rows: list[dict], path: str | Path) -> None:
    """Concatenated per-fleet-size aggregates (one row per size and
    policy): counts/power/violations over the steady-state window,
    MRMSE over all QIs."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(FLEET_SUMMARY_HEADER)
        for row in rows:
            writer.writerow(
                [
                    str(row["fleet_size"]),
                    row["policy"],
                    _fmt(row["mean_n_scheduled"]),
                    _fmt(row["mean_total_power_w"]),
                    _fmt(row["violation_prob"]),
                    _fmt(row["mrmse"]),
                ]
            )


def fleet_summary_rows(agg: AggregateMetrics, fleet_size: int) -> list[dict]:
    rows = []
    for policy in agg.policies:
        rows.append(
            {
                "fleet_size": fleet_size,
                "policy": policy,
                "mean_n_scheduled": agg.steady_state_mean(policy, "mean_n_scheduled"),
                "mean_total_power_w": agg.steady_state_mean(policy, "mean_total_power_w"),
                "violation_prob": agg.steady_state_mean(policy, "violation_prob"),
                "mrmse": agg.mrmse(policy),
            }
        )
    return rows


def read_fleet_summary(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != FLEET_SUMMARY_HEADER:
            raise ContractViolation(
                f"unexpected fleet summary header {header} in {path}"
            )
        out = []
        for row in reader:
            out.append(
                {
                    "fleet_size": int(row[0]),
                    "policy": row[1],
                    "mean_n_scheduled": float(row[2]),
                    "mean_total_power_w": float(row[3]),
                    "violation_prob": float(row[4]),
                    "mrmse": float(row[5]),
                }
            )
    return out
