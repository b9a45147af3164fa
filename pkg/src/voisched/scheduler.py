"""Scheduling policies.

The value-of-information (VoI) policy schedules agents greedily until
every per-feature confidence requirement is met (or the slot budget or
fleet runs out).  Four benchmarks always fill their slot allowance:
nearest-to-AP greedy, best-confidence greedy, uniform random, and the
single best-confidence sensor.  All policies price transmissions at the
closed-form outage-constrained power.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels, _kernels_py
from .estimator import Belief, Requirements
from .sensing import Fleet


class Policy(str, enum.Enum):
    VOI = "voi"
    COST_BG = "cost_bg"
    CONFIDENCE_BG = "confidence_bg"
    RANDOM = "random"
    BCS = "bcs"


POLICY_ORDER = tuple(Policy)


@dataclass
class ScheduleDecision:
    """One QI's scheduling outcome.

    scheduled:  agent ids (1-based) in pick order
    powers:     per-agent transmit power (W), aligned with scheduled
    objective_accuracy_term: sum over features of
                max(predicted_var/requirement - 1, 0)
    objective_power_term:    sum of powers (W)
    iterations_used:         greedy iterations (= picks) made
    """

    scheduled: list[int]
    powers: list[float]
    objective_accuracy_term: float
    objective_power_term: float
    iterations_used: int

    def objective_value(self, alpha: float) -> float:
        return (
            (1.0 - alpha) * self.objective_accuracy_term
            + alpha * self.objective_power_term
        )


def most_uncertain_feature(
    cov_diag: np.ndarray, req: Requirements, feature_available: np.ndarray
) -> int | None:
    """Available feature with the largest variance-to-requirement ratio
    (lowest index wins ties); None when no feature is measurable."""
    k = _kernels_py.most_uncertain_feature(
        np.asarray(cov_diag, float), req.xi_sq, np.asarray(feature_available, bool)
    )
    return None if k < 0 else k


def best_agent_for_feature(
    feature: int, fleet: Fleet, available: np.ndarray
) -> int | None:
    """Id of the available agent measuring ``feature`` with minimal
    per-feature variance (ties: smaller AP distance, then lower id)."""
    m = _kernels_py.best_agent_for_feature(
        feature,
        fleet.kind_codes,
        fleet.noise_diag,
        fleet.dist_ap,
        np.asarray(available, bool),
    )
    return None if m < 0 else m + 1


def _accuracy_term(cov_diag: np.ndarray, req: Requirements) -> float:
    return float(np.sum(np.maximum(cov_diag / req.xi_sq - 1.0, 0.0)))


def _decision(sel_idx, pred_diag, req, powers, iterations) -> ScheduleDecision:
    sel_powers = [float(powers[m]) for m in sel_idx]
    return ScheduleDecision(
        scheduled=[int(m) + 1 for m in sel_idx],
        powers=sel_powers,
        objective_accuracy_term=_accuracy_term(pred_diag, req),
        objective_power_term=float(sum(sel_powers)),
        iterations_used=int(iterations),
    )


def voi_schedule(
    prior: Belief,
    fleet: Fleet,
    reachable_idx: np.ndarray,
    req: Requirements,
    budget: int,
    powers: np.ndarray,
    backend=None,
) -> ScheduleDecision:
    """Greedy VoI selection; empty when the prior already satisfies all
    requirements (early exit: nothing transmits)."""
    diag = np.diag(prior.cov)
    if not np.any(diag > req.xi_sq):
        return _decision(np.empty(0, np.int64), diag, req, powers, 0)
    kernel = backend if backend is not None else _kernels.active_backend()
    available = np.zeros(len(fleet), dtype=np.uint8)
    available[np.asarray(reachable_idx, dtype=np.intp)] = 1
    sel, pred_cov, iters = kernel.greedy_voi_select(
        prior.cov,
        req.xi_sq,
        fleet.kind_codes,
        fleet.noise_diag,
        fleet.dist_ap,
        available,
        int(budget),
    )
    return _decision(sel, np.diag(pred_cov), req, powers, iters)


def _ranked_take(
    prior: Belief,
    fleet: Fleet,
    req: Requirements,
    powers: np.ndarray,
    order_idx: np.ndarray,
    take: int,
) -> ScheduleDecision:
    sel = np.asarray(order_idx[:take], dtype=np.int64)
    pred_cov = _kernels_py.selector_update(
        prior.cov, fleet.kind_codes[sel], fleet.noise_diag[sel]
    )
    return _decision(sel, np.diag(pred_cov), req, powers, len(sel))


def cost_bg_schedule(
    prior: Belief,
    fleet: Fleet,
    reachable_idx: np.ndarray,
    req: Requirements,
    budget: int,
    powers: np.ndarray,
) -> ScheduleDecision:
    """Nearest-to-AP greedy: min(C, |reachable|) agents by ascending AP
    distance (ties: lower id)."""
    idx = np.asarray(reachable_idx, dtype=np.int64)
    order = idx[np.lexsort((idx, fleet.dist_ap[idx]))]
    return _ranked_take(prior, fleet, req, powers, order, min(budget, idx.size))


def confidence_bg_schedule(
    prior: Belief,
    fleet: Fleet,
    reachable_idx: np.ndarray,
    req: Requirements,
    budget: int,
    powers: np.ndarray,
) -> ScheduleDecision:
    """Best-confidence greedy: min(C, |reachable|) agents by ascending
    measurement-covariance trace (ties: smaller AP distance, lower id)."""
    idx = np.asarray(reachable_idx, dtype=np.int64)
    order = idx[np.lexsort((idx, fleet.dist_ap[idx], fleet.trace_cov[idx]))]
    return _ranked_take(prior, fleet, req, powers, order, min(budget, idx.size))


def random_schedule(
    prior: Belief,
    fleet: Fleet,
    reachable_idx: np.ndarray,
    req: Requirements,
    budget: int,
    powers: np.ndarray,
    rng: np.random.Generator,
) -> ScheduleDecision:
    """Uniform random subset of min(C, |reachable|) agents, without
    replacement, in draw order."""
    idx = np.asarray(reachable_idx, dtype=np.int64)
    take = min(budget, idx.size)
    order = rng.permutation(idx)
    return _ranked_take(prior, fleet, req, powers, order, take)


def bcs_schedule(
    prior: Belief,
    fleet: Fleet,
    reachable_idx: np.ndarray,
    req: Requirements,
    budget: int,
    powers: np.ndarray,
) -> ScheduleDecision:
    """Best connected sensor: exactly the one highest-confidence
    reachable agent, or nothing when the reachable set is empty (or no
    uplink slot exists at all)."""
    idx = np.asarray(reachable_idx, dtype=np.int64)
    if idx.size == 0 or budget == 0:
        return _decision(
            np.empty(0, np.int64), np.diag(prior.cov), req, powers, 0
        )
    order = idx[np.lexsort((idx, fleet.dist_ap[idx], fleet.trace_cov[idx]))]
    return _ranked_take(prior, fleet, req, powers, order, 1)
