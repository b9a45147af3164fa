"""Sensing-agent fleet: placement, observation models, reachability.

Each sensing agent (SA) measures either the position pair or the
velocity pair of the 4-feature state through a fixed 2x4 selector
matrix, with additive zero-mean Gaussian noise.  Agents are static for
an episode; the access point (AP) sits at the region center and the
AP-to-agent distance is fixed per episode.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation

KIND_POSITION = "position"
KIND_VELOCITY = "velocity"
KINDS = (KIND_POSITION, KIND_VELOCITY)

H_POSITION = np.array([[1.0, 0, 0, 0], [0, 1.0, 0, 0]])
H_VELOCITY = np.array([[0, 0, 1.0, 0], [0, 0, 0, 1.0]])

# Feature indices covered by each kind, in observation-row order.
KIND_FEATURES = {KIND_POSITION: (0, 1), KIND_VELOCITY: (2, 3)}


@dataclass
class SensingAgent:
    agent_id: int  # dense, 1-based
    kind: str
    location: np.ndarray  # (2,) m
    meas_cov: np.ndarray  # (2, 2), positive definite
    dist_ap: float  # distance to the AP, fixed per episode

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractViolation(f"unknown agent kind {self.kind!r}")
        self.location = np.asarray(self.location, dtype=float)
        self.meas_cov = np.asarray(self.meas_cov, dtype=float)
        if self.meas_cov.shape != (2, 2):
            raise ContractViolation("meas_cov must be 2x2")
        if np.linalg.eigvalsh(self.meas_cov).min() <= 0:
            raise ContractViolation("meas_cov must be positive definite")

    @property
    def obs_matrix(self) -> np.ndarray:
        return H_POSITION if self.kind == KIND_POSITION else H_VELOCITY

    @property
    def features(self) -> tuple[int, int]:
        return KIND_FEATURES[self.kind]


@dataclass
class Fleet:
    """Agent list plus cached per-agent arrays for the hot path.

    Arrays are indexed by agent_id - 1 (ids are dense 1..M).
    """

    agents: list[SensingAgent]
    d_max: float
    locations: np.ndarray = field(init=False)  # (M, 2)
    kind_codes: np.ndarray = field(init=False)  # (M,) uint8, 0=pos 1=vel
    noise_diag: np.ndarray = field(init=False)  # (M, 2) meas_cov diagonals
    dist_ap: np.ndarray = field(init=False)  # (M,)
    trace_cov: np.ndarray = field(init=False)  # (M,)

    def __post_init__(self):
        ids = [a.agent_id for a in self.agents]
        if ids != list(range(1, len(self.agents) + 1)):
            raise ContractViolation("agent ids must be dense 1..M in order")
        self.locations = np.array(
            [a.location for a in self.agents], dtype=float
        ).reshape(-1, 2)
        self.kind_codes = np.array(
            [0 if a.kind == KIND_POSITION else 1 for a in self.agents], dtype=np.uint8
        )
        self.noise_diag = np.array(
            [np.diag(a.meas_cov) for a in self.agents], dtype=float
        ).reshape(-1, 2)
        self.dist_ap = np.array([a.dist_ap for a in self.agents], dtype=float)
        self.trace_cov = np.array(
            [np.trace(a.meas_cov) for a in self.agents], dtype=float
        )

    def __len__(self) -> int:
        return len(self.agents)

    def reachable_indices(self, pa_position: np.ndarray) -> np.ndarray:
        """0-based indices of agents within d_max of the PA position."""
        delta = self.locations - np.asarray(pa_position, dtype=float)
        dist_sq = np.einsum("ij,ij->i", delta, delta)
        return np.flatnonzero(dist_sq <= self.d_max * self.d_max)


def _loguniform(lo: float, hi: float, size: int, rng) -> np.ndarray:
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size))


def _draw_noise_var(
    lo: float,
    hi: float,
    dist: str,
    size: int,
    rng,
    elite_frac: float = 0.11,
    bulk_scale: float = 60.0,
) -> np.ndarray:
    """Per-agent measurement variances.

    ``twotier`` models a fleet with a few precision sensors and a bulk of
    low-grade ones: round(elite_frac * size) agents draw log-uniformly
    from [lo, hi], the rest from the same range scaled by bulk_scale.
    The precision draws land on the lowest ids of the kind.
    """
    if not (0 < lo <= hi):
        raise ContractViolation("noise variance range must satisfy 0 < lo <= hi")
    if dist == "uniform":
        return rng.uniform(lo, hi, size)
    if dist == "loguniform":
        return _loguniform(lo, hi, size, rng)
    if dist == "twotier":
        if not 0.0 <= elite_frac <= 1.0:
            raise ContractViolation("elite_frac must lie in [0, 1]")
        if bulk_scale < 1.0:
            raise ContractViolation("bulk_scale must be >= 1")
        n_elite = int(round(elite_frac * size)) if size else 0
        out = np.empty(size)
        out[:n_elite] = _loguniform(lo, hi, n_elite, rng)
        out[n_elite:] = _loguniform(
            lo * bulk_scale, hi * bulk_scale, size - n_elite, rng
        )
        return out
    raise ContractViolation(f"unknown noise_dist {dist!r}")


def place_fleet(
    n_position: int,
    n_velocity: int,
    region_radius: float,
    d_max: float,
    pos_var_range: tuple[float, float],
    vel_var_range: tuple[float, float],
    rng: np.random.Generator,
    noise_dist: str = "loguniform",
    ap_location: np.ndarray | None = None,
    elite_frac: float = 0.11,
    bulk_scale: float = 60.0,
) -> Fleet:
    """Draw a fleet uniformly at random in the disk of radius
    ``region_radius`` around the AP, with per-agent isotropic measurement
    noise drawn from the kind's variance range.

    Position agents get ids 1..n_position, velocity agents follow.
    """
    ap = np.zeros(2) if ap_location is None else np.asarray(ap_location, dtype=float)
    total = n_position + n_velocity
    radii = region_radius * np.sqrt(rng.uniform(0.0, 1.0, total))
    angles = rng.uniform(0.0, 2.0 * np.pi, total)
    locations = ap + np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    pos_vars = _draw_noise_var(
        *pos_var_range, noise_dist, n_position, rng,
        elite_frac=elite_frac, bulk_scale=bulk_scale,
    )
    vel_vars = _draw_noise_var(
        *vel_var_range, noise_dist, n_velocity, rng,
        elite_frac=elite_frac, bulk_scale=bulk_scale,
    )

    agents = []
    for i in range(total):
        kind = KIND_POSITION if i < n_position else KIND_VELOCITY
        var = pos_vars[i] if i < n_position else vel_vars[i - n_position]
        loc = locations[i]
        agents.append(
            SensingAgent(
                agent_id=i + 1,
                kind=kind,
                location=loc,
                meas_cov=np.diag([var, var]),
                dist_ap=float(np.hypot(*(loc - ap))),
            )
        )
    return Fleet(agents=agents, d_max=d_max)


def observe(agent: SensingAgent, s: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One noisy 2-vector observation H s + w, w ~ N(0, meas_cov)."""
    s = np.asarray(s, dtype=float)
    if s.shape != (4,):
        raise ContractViolation("state must have shape (4,)")
    cov = agent.meas_cov
    if cov[0, 1] == 0.0 and cov[1, 0] == 0.0:
        noise = rng.standard_normal(2) * np.sqrt(np.diag(cov))
    else:
        noise = rng.multivariate_normal(np.zeros(2), cov)
    return agent.obs_matrix @ s + noise


def observe_many(
    fleet: Fleet, indices: np.ndarray, s: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Stacked observations (q, 2) for the 0-based agent ``indices``.

    Noise is drawn in index order from one (q, 2) standard-normal block;
    assumes the diagonal meas_cov produced by place_fleet.
    """
    idx = np.asarray(indices, dtype=np.intp)
    q = idx.size
    if q == 0:
        return np.empty((0, 2))
    truth = np.where(fleet.kind_codes[idx, None] == 0, s[:2], s[2:4])
    return truth + rng.standard_normal((q, 2)) * np.sqrt(fleet.noise_diag[idx])


def reachable_set(fleet: Fleet, pa_position: np.ndarray) -> np.ndarray:
    """Sorted ids of agents within sensing range of the PA."""
    return fleet.reachable_indices(pa_position) + 1
