"""Pure-numpy scheduling kernel (reference implementation).

The compiled twin in _core.pyx exposes the same functions; the package
picks one at import time (see _kernels).  Tie-breaking is deliberately
written with strict comparisons in fixed iteration order so both
backends make identical choices.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

# kind code 0 measures features (0, 1); kind code 1 measures (2, 3).
_KIND_BASE = (0, 2)


def selector_update(
    prior_cov: np.ndarray,
    kind_codes: np.ndarray,
    noise_diag: np.ndarray,
) -> np.ndarray:
    """Covariance after a stacked update of ``prior_cov`` with the given
    agents: (I - K H) C with H the stacked 2x4 selectors and K the
    standard gain.  Observation values are irrelevant to the covariance.
    """
    q = len(kind_codes)
    if q == 0:
        return prior_cov.copy()
    rows = np.empty(2 * q, dtype=np.intp)
    for i, code in enumerate(kind_codes):
        base = _KIND_BASE[int(code)]
        rows[2 * i] = base
        rows[2 * i + 1] = base + 1
    # H C and H C H^T are row/column selections of C.
    hc = prior_cov[rows, :]
    s = hc[:, rows] + np.diag(np.asarray(noise_diag, dtype=float).reshape(-1))
    gain = np.linalg.solve(s, hc).T
    post = prior_cov - gain @ hc
    return 0.5 * (post + post.T)


def most_uncertain_feature(
    cov_diag: np.ndarray,
    xi_sq: np.ndarray,
    feature_available: np.ndarray,
) -> int:
    """Index of the available feature with the largest variance-to-
    requirement ratio; first index wins ties; -1 if none available."""
    best = -1
    best_ratio = -np.inf
    for k in range(cov_diag.shape[0]):
        if not feature_available[k]:
            continue
        ratio = cov_diag[k] / xi_sq[k]
        if ratio > best_ratio:
            best = k
            best_ratio = ratio
    return best


def best_agent_for_feature(
    feature: int,
    kind_codes: np.ndarray,
    noise_diag: np.ndarray,
    dist_ap: np.ndarray,
    available: np.ndarray,
) -> int:
    """Available agent measuring ``feature`` with minimal per-feature
    measurement variance; ties prefer smaller AP distance, then lower
    index.  Returns -1 if no such agent."""
    kind = 0 if feature < 2 else 1
    row = feature - _KIND_BASE[kind]
    best = -1
    best_var = np.inf
    best_dist = np.inf
    for m in range(kind_codes.shape[0]):
        if not available[m] or kind_codes[m] != kind:
            continue
        var = noise_diag[m, row]
        if var < best_var or (var == best_var and dist_ap[m] < best_dist):
            best = m
            best_var = var
            best_dist = dist_ap[m]
    return best


def greedy_voi_select(
    prior_cov: np.ndarray,
    xi_sq: np.ndarray,
    kind_codes: np.ndarray,
    noise_diag: np.ndarray,
    dist_ap: np.ndarray,
    available: np.ndarray,
    budget: int,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Greedy selection loop: repeatedly pick the worst
    variance-to-requirement feature among those still measurable, grab
    the best remaining agent for it, and recompute the predicted
    covariance from the prior with the enlarged set.

    Stops when the budget is reached, every feature is compliant, or no
    violated feature has an available agent left.  Returns (selected
    agent indices in pick order, predicted covariance, iterations).
    """
    avail = np.asarray(available, dtype=bool).copy()
    prior_cov = np.asarray(prior_cov, dtype=float)
    selected: list[int] = []
    sel_kinds: list[int] = []
    sel_vars: list[list[float]] = []
    cov = prior_cov.copy()
    feature_avail = np.empty(4, dtype=bool)
    while len(selected) < budget:
        diag = np.diag(cov)
        if not np.any(diag > xi_sq):
            break
        kinds_present = (
            np.any(avail & (kind_codes == 0)),
            np.any(avail & (kind_codes == 1)),
        )
        feature_avail[0] = feature_avail[1] = kinds_present[0]
        feature_avail[2] = feature_avail[3] = kinds_present[1]
        k = most_uncertain_feature(diag, xi_sq, feature_avail)
        if k < 0 or diag[k] <= xi_sq[k]:
            # No violated feature is measurable any more; adding agents
            # for already-compliant features cannot reduce the objective.
            break
        m = best_agent_for_feature(k, kind_codes, noise_diag, dist_ap, avail)
        if m < 0:
            break
        selected.append(m)
        sel_kinds.append(int(kind_codes[m]))
        sel_vars.append([noise_diag[m, 0], noise_diag[m, 1]])
        avail[m] = False
        cov = selector_update(
            prior_cov, np.array(sel_kinds, dtype=np.uint8), np.array(sel_vars)
        )
    return np.asarray(selected, dtype=np.int64), cov, len(selected)
