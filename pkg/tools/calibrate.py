"""Grid search over two-tier fleet noise parameters.

Development tool, not shipped with the package.  Scores each candidate
against the statistics the release gate checks: scheduling/power ratios
vs Confidence-BG, MRMSE ratios vs every baseline, post-warm-up violation
ordering, and (optionally) the fleet-size sweep behaviour.

Usage:
    python3 tools/calibrate.py grid [--runs 120]
    python3 tools/calibrate.py fleet --cand IDX [--runs 100]
"""

from __future__ import annotations

import argparse
import itertools
import sys
import time

import numpy as np

from voisched.config import default_config
from voisched.experiment import WARMUP_QI, run_monte_carlo

POLS = ["voi", "cost_bg", "confidence_bg", "random", "bcs"]


def make_cfg(cand: dict, fleet_size: int = 60, runs: int | None = None):
    n_pos = (fleet_size + 1) // 2
    n_vel = fleet_size - n_pos
    overrides = [
        "fleet.noise_dist=twotier",
        f"fleet.n_position={n_pos}",
        f"fleet.n_velocity={n_vel}",
        f"fleet.pos_var_lo={cand['pos'][0]}",
        f"fleet.pos_var_hi={cand['pos'][1]}",
        f"fleet.vel_var_lo={cand['vel'][0]}",
        f"fleet.vel_var_hi={cand['vel'][1]}",
        f"fleet.elite_frac={cand['frac']}",
        f"fleet.bulk_scale={cand['scale']}",
    ]
    if runs:
        overrides.append(f"harness.runs={runs}")
    return default_config().with_overrides(overrides)


def scorecard(agg) -> dict:
    ss = agg.steady_state_mean
    out = {}
    out["count_ratio"] = ss("voi", "mean_n_scheduled") / ss(
        "confidence_bg", "mean_n_scheduled"
    )
    out["power_ratio"] = ss("voi", "mean_total_power_w") / ss(
        "confidence_bg", "mean_total_power_w"
    )
    m = {p: agg.mrmse(p) for p in POLS}
    out["mrmse_voi"] = m["voi"]
    out["rmse_vs_conf"] = m["voi"] / m["confidence_bg"]
    out["rmse_vs_cost"] = m["voi"] / m["cost_bg"]
    out["rmse_vs_rand"] = m["voi"] / m["random"]
    w = slice(WARMUP_QI - 1, None)
    viol = {p: agg.violation_prob[p][w] for p in POLS}
    out["viol_voi"] = float(viol["voi"].mean())
    out["viol_conf"] = float(viol["confidence_bg"].mean())
    out["viol_gap"] = abs(out["viol_voi"] - out["viol_conf"])
    others = np.maximum.reduce(
        [viol["voi"], viol["confidence_bg"], viol["cost_bg"], viol["random"]]
    )
    out["bcs_min_edge"] = float((viol["bcs"] - others).min())
    pair = np.maximum(viol["voi"], viol["confidence_bg"])
    out["rand_mean_edge"] = float(viol["random"].mean() - pair.mean())
    out["rand_min_edge"] = float((viol["random"] - pair).min())
    out["viol_rand"] = float(viol["random"].mean())
    out["viol_bcs"] = float(viol["bcs"].mean())
    return out


def verdict(s: dict) -> list[str]:
    bad = []
    if s["count_ratio"] > 0.5:
        bad.append("count")
    if s["power_ratio"] > 0.5:
        bad.append("power")
    if s["rmse_vs_conf"] > 1.05:
        bad.append("parity")
    if max(s["rmse_vs_cost"], s["rmse_vs_rand"]) > 0.97:
        bad.append("parity-others")
    if s["viol_gap"] > 0.03:
        bad.append("violgap")
    if s["bcs_min_edge"] <= 0.02:
        bad.append("bcs")
    if s["rand_mean_edge"] <= 0.05:
        bad.append("rand")
    return bad


GRID = {
    "frac": [0.11],
    "scale": [60.0, 120.0],
    "pos": [(0.008, 0.018), (0.009, 0.02), (0.01, 0.022)],
    "vel": [(0.003, 0.0065), (0.0035, 0.007), (0.004, 0.0075)],
}


def candidates() -> list[dict]:
    keys = list(GRID)
    return [dict(zip(keys, vals)) for vals in itertools.product(*GRID.values())]


def show(idx, cand, s, bad, secs):
    tag = "PASS" if not bad else "fail:" + ",".join(bad)
    print(
        f"[{idx:2d}] frac={cand['frac']:.4f} scale={cand['scale']:<5.0f} "
        f"pos={cand['pos']} vel={cand['vel']}  ({secs:.0f}s)\n"
        f"     count={s['count_ratio']:.3f} power={s['power_ratio']:.3f} "
        f"rmse/conf={s['rmse_vs_conf']:.3f} /cost={s['rmse_vs_cost']:.3f} "
        f"/rand={s['rmse_vs_rand']:.3f}\n"
        f"     viol voi={s['viol_voi']:.3f} conf={s['viol_conf']:.3f} "
        f"gap={s['viol_gap']:.3f} rand={s['viol_rand']:.3f} "
        f"bcs={s['viol_bcs']:.3f} bcs_edge={s['bcs_min_edge']:.3f} "
        f"rand_edge={s['rand_mean_edge']:.3f}/{s['rand_min_edge']:.3f}  {tag}",
        flush=True,
    )


def cmd_grid(args):
    for idx, cand in enumerate(candidates()):
        if args.only is not None and idx not in args.only:
            continue
        t0 = time.time()
        agg = run_monte_carlo(make_cfg(cand, runs=args.runs))
        show(idx, cand, s := scorecard(agg), verdict(s), time.time() - t0)


def cmd_fleet(args):
    cand = candidates()[args.cand]
    print(f"candidate {args.cand}: {cand}")
    rows = []
    for m in (20, 40, 60, 80):
        t0 = time.time()
        agg = run_monte_carlo(make_cfg(cand, fleet_size=m, runs=args.runs))
        s = scorecard(agg)
        best = min(agg.mrmse(p) for p in POLS if p != "voi")
        rows.append((m, s["count_ratio"], s["power_ratio"], s["mrmse_voi"] / best))
        show(m, cand, s, verdict(s), time.time() - t0)
    print("\nM   count_ratio power_ratio rmse/best")
    for m, c, p, r in rows:
        print(f"{m:<3d} {c:.4f}      {p:.4f}      {r:.4f}")
    counts = [r[1] for r in rows]
    powers = [r[2] for r in rows]
    mono = all(a >= b for a, b in zip(counts, counts[1:])) and all(
        a >= b for a, b in zip(powers, powers[1:])
    )
    parity = all(r[3] <= 1.05 for r in rows)
    print(f"monotone={mono} parity_all_M={parity}")


def main(argv=None):
    ap = argparse.ArgumentParser()
    sub = ap.add_subparsers(dest="cmd", required=True)
    g = sub.add_parser("grid")
    g.add_argument("--runs", type=int, default=120)
    g.add_argument("--only", type=int, nargs="*", default=None)
    g.set_defaults(fn=cmd_grid)
    f = sub.add_parser("fleet")
    f.add_argument("--cand", type=int, required=True)
    f.add_argument("--runs", type=int, default=100)
    f.set_defaults(fn=cmd_fleet)
    args = ap.parse_args(argv)
    args.fn(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
