"""Gaussian belief over the 4-feature state: prediction, stacked
multi-sensor correction, and per-feature confidence checks.

The correction uses the standard gain K = C H^T S^-1 with the stacked
selector matrix H and block-diagonal measurement covariance, and the
posterior covariance (I - K H) C with C the prior covariance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import ProcessModel
from .errors import ContractViolation, SingularInnovation
from .sensing import SensingAgent

COND_LIMIT = 1e12
_REG_EPS = 1e-12


@dataclass
class Belief:
    """Gaussian state belief; covariance is re-symmetrized on build."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (self.mean.size, self.mean.size):
            raise ContractViolation("covariance shape does not match mean")
        self.cov = 0.5 * (cov + cov.T)

    def check_psd(self, floor: float = -1e-9) -> bool:
        return bool(np.linalg.eigvalsh(self.cov).min() >= floor)


@dataclass
class Requirements:
    """Per-feature confidence requirements: posterior variance of feature
    k must not exceed xi_sq[k]."""

    xi_sq: np.ndarray

    def __post_init__(self):
        self.xi_sq = np.asarray(self.xi_sq, dtype=float)
        if np.any(self.xi_sq <= 0):
            raise ContractViolation("requirements must be positive")


@dataclass
class StackedObservation:
    """Vertically stacked observations of several agents.

    h: (2q, K) stacked selector rows, cov: (2q, 2q) block diagonal,
    values: (2q,), agent_order: agent ids in stacking order.
    """

    h: np.ndarray
    cov: np.ndarray
    values: np.ndarray
    agent_order: list[int]


def predict(belief: Belief, pm: ProcessModel, control: np.ndarray | None = None) -> Belief:
    """One-step prior: mean' = P mean + noise_mean (+ control),
    cov' = P cov P^T + noise_cov."""
    mean = pm.transition @ belief.mean + pm.noise_mean
    if control is not None:
        mean = mean + control
    cov = pm.transition @ belief.cov @ pm.transition.T + pm.noise_cov
    return Belief(mean=mean, cov=cov)


def stack(
    observations: Sequence[np.ndarray], agents: Sequence[SensingAgent]
) -> StackedObservation:
    """Stack per-agent observations in the given agent order."""
    if len(agents) == 0:
        raise ContractViolation("stack requires at least one agent")
    if len(observations) != len(agents):
        raise ContractViolation("one observation per agent required")
    rows = []
    for obs, agent in zip(observations, agents):
        obs = np.asarray(obs, dtype=float)
        if obs.shape != (2,):
            raise ContractViolation(
                f"observation for agent {agent.agent_id} must have shape (2,)"
            )
        rows.append(obs)
    h = np.vstack([a.obs_matrix for a in agents])
    q = len(agents)
    cov = np.zeros((2 * q, 2 * q))
    for i, agent in enumerate(agents):
        cov[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = agent.meas_cov
    return StackedObservation(
        h=h,
        cov=cov,
        values=np.concatenate(rows),
        agent_order=[a.agent_id for a in agents],
    )


def kalman_gain(
    prior_cov: np.ndarray,
    h: np.ndarray,
    cov: np.ndarray,
    regularize: bool = False,
) -> np.ndarray:
    """Gain K = C H^T (H C H^T + R)^-1.

    Raises SingularInnovation when the innovation covariance has
    condition number above 1e12, unless regularize=True in which case
    1e-12 I is added instead.
    """
    s = h @ prior_cov @ h.T + cov
    s = 0.5 * (s + s.T)
    if np.linalg.cond(s) > COND_LIMIT:
        if not regularize:
            raise SingularInnovation(
                f"innovation covariance condition number exceeds {COND_LIMIT:g}"
            )
        s = s + _REG_EPS * np.eye(s.shape[0])
    return np.linalg.solve(s, h @ prior_cov).T


def update(
    prior: Belief,
    so: StackedObservation,
    gain: np.ndarray | None = None,
    regularize: bool = False,
) -> Belief:
    """Posterior from the stacked observation; the covariance contraction
    (I - K H) applies to the prior covariance."""
    if gain is None:
        gain = kalman_gain(prior.cov, so.h, so.cov, regularize=regularize)
    innovation = so.values - so.h @ prior.mean
    mean = prior.mean + gain @ innovation
    eye = np.eye(prior.cov.shape[0])
    cov = (eye - gain @ so.h) @ prior.cov
    return Belief(mean=mean, cov=cov)


def violated_features(belief: Belief, req: Requirements) -> np.ndarray:
    """Indices of features whose posterior variance exceeds the
    requirement (boundary equality is compliant)."""
    return np.flatnonzero(np.diag(belief.cov) > req.xi_sq)
