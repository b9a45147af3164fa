"""Platform-agent motion model.

State convention: a state vector is a float ndarray of shape (4,) ordered
[x, y, vx, vy] (positions in m, velocities in m/s).  The platform agent
(PA) moves inside a disk of radius ``region_radius`` around ``center``
under a sinusoidal driving force plus a velocity-scaled restoring force
that pushes it away from the boundary.  One discrete step covers
``step_s`` seconds and one quantization interval (QI).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometry

StateVector = np.ndarray  # shape (4,), [x, y, vx, vy]

POS = slice(0, 2)
VEL = slice(2, 4)
NUM_FEATURES = 4

# Below this distance from the center the restoring direction is
# undefined; the force is zero there instead.
_D_EPS = 1e-6


@dataclass
class ForceConfig:
    """Driving and restoring force parameters.

    amp_n:         per-axis driving amplitudes (N), shape (2,)
    freq_per_qi:   per-axis driving frequencies (1/QI), shape (2,)
    restore_gain_n: restoring gain (N); negative values push toward center
    region_radius_m: radius of the admissible disk (m)
    center_m:      disk center (m), shape (2,)
    mass_kg:       PA mass (kg)
    """

    amp_n: np.ndarray
    freq_per_qi: np.ndarray
    restore_gain_n: float
    region_radius_m: float
    center_m: np.ndarray
    mass_kg: float

    def __post_init__(self):
        self.amp_n = np.asarray(self.amp_n, dtype=float)
        self.freq_per_qi = np.asarray(self.freq_per_qi, dtype=float)
        self.center_m = np.asarray(self.center_m, dtype=float)
        if self.mass_kg <= 0:
            raise ValueError("mass_kg must be positive")
        if self.region_radius_m <= 0:
            raise ValueError("region_radius_m must be positive")


@dataclass
class DynamicsConfig:
    """Force parameters plus step length, process noise, and the initial
    belief used by the estimator."""

    force: ForceConfig
    step_s: float = 0.2
    sigma_sq_pos: float = 0.04
    sigma_sq_vel: float = 0.01
    init_mean: np.ndarray = field(default_factory=lambda: np.zeros(4))
    init_var_pos: float = 1.0
    init_var_vel: float = 0.1
    known_input: bool = False

    def __post_init__(self):
        self.init_mean = np.asarray(self.init_mean, dtype=float)
        if self.step_s <= 0:
            raise ValueError("step_s must be positive")
        if self.sigma_sq_pos < 0 or self.sigma_sq_vel < 0:
            raise ValueError("process noise variances must be nonnegative")

    def init_cov(self) -> np.ndarray:
        return np.diag(
            [self.init_var_pos, self.init_var_pos, self.init_var_vel, self.init_var_vel]
        )


@dataclass
class ProcessModel:
    """Linear process model used by the estimator: s' = P s + u with
    u ~ N(noise_mean, noise_cov)."""

    transition: np.ndarray  # (4, 4)
    noise_mean: np.ndarray  # (4,)
    noise_cov: np.ndarray  # (4, 4)
    step_s: float


def driving_force(n: int, cfg: ForceConfig) -> np.ndarray:
    """Deterministic sinusoidal driving force (N) at QI index n."""
    return cfg.amp_n * np.cos(2.0 * np.pi * cfg.freq_per_qi * n)


def restoring_force(pos: np.ndarray, vel: np.ndarray, cfg: ForceConfig) -> np.ndarray:
    """Velocity-scaled boundary force (N).

    Magnitude grows as the PA approaches the region boundary and is zero
    at the center (direction undefined below _D_EPS).  Raises
    DegenerateGeometry when the PA is on or outside the boundary.
    """
    offset = np.asarray(pos, dtype=float) - cfg.center_m
    d = float(np.hypot(offset[0], offset[1]))
    if d >= cfg.region_radius_m:
        raise DegenerateGeometry(
            f"PA at distance {d:.6g} m from center, region radius "
            f"{cfg.region_radius_m:.6g} m"
        )
    if d < _D_EPS:
        return np.zeros(2)
    speed = float(np.hypot(vel[0], vel[1]))
    return cfg.restore_gain_n * (offset / d) * (speed / (cfg.region_radius_m - d))


def step_true_state(
    s: StateVector, n: int, cfg: DynamicsConfig, rng: np.random.Generator
) -> tuple[StateVector, np.ndarray]:
    """Advance the true state from QI n to n+1.

    Returns (next state, acceleration used).  The acceleration combines
    the driving force at index n and the restoring force at the current
    state; DegenerateGeometry propagates if the state is outside the
    admissible disk (the harness clamps before this can happen).
    """
    s = np.asarray(s, dtype=float)
    force = driving_force(n, cfg.force) + restoring_force(s[POS], s[VEL], cfg.force)
    accel = force / cfg.force.mass_kg
    t = cfg.step_s
    nxt = np.empty(4)
    nxt[POS] = s[POS] + t * s[VEL] + 0.5 * t * t * accel
    nxt[VEL] = s[VEL] + t * accel
    if cfg.sigma_sq_pos > 0:
        nxt[POS] += rng.normal(0.0, np.sqrt(cfg.sigma_sq_pos), 2)
    if cfg.sigma_sq_vel > 0:
        nxt[VEL] += rng.normal(0.0, np.sqrt(cfg.sigma_sq_vel), 2)
    return nxt, accel


def clamp_to_region(pos: np.ndarray, cfg: ForceConfig) -> np.ndarray:
    """Pull a position strictly inside the disk (radius scaled by 0.999).

    Used by the simulator between steps so that restoring_force only ever
    signals DegenerateGeometry on genuinely misconfigured inputs.
    """
    offset = np.asarray(pos, dtype=float) - cfg.center_m
    d = float(np.hypot(offset[0], offset[1]))
    limit = 0.999 * cfg.region_radius_m
    if d <= limit:
        return np.asarray(pos, dtype=float)
    return cfg.center_m + offset * (limit / d)


def linearize(cfg: DynamicsConfig) -> ProcessModel:
    """Process model for the estimator.

    The transition is the constant-velocity matrix [[I, T I], [0, I]].
    When the deterministic forces are unknown to the estimator
    (known_input=False), the noise covariance is inflated by the
    mean-square acceleration of the driving force mapped through
    B = [T^2/2 I; T I]; with known_input=True the exact force is fed as a
    control term instead and no inflation is applied.
    """
    t = cfg.step_s
    eye2 = np.eye(2)
    transition = np.block([[eye2, t * eye2], [np.zeros((2, 2)), eye2]])
    noise_cov = np.diag(
        [cfg.sigma_sq_pos, cfg.sigma_sq_pos, cfg.sigma_sq_vel, cfg.sigma_sq_vel]
    ).astype(float)
    if not cfg.known_input:
        # E[a^2] of A cos(.)/m over time is (A/m)^2 / 2, per axis.
        sigma_sq_a = (np.max(np.abs(cfg.force.amp_n)) / cfg.force.mass_kg) ** 2 / 2.0
        b = np.vstack([0.5 * t * t * eye2, t * eye2])  # (4, 2)
        noise_cov = noise_cov + b @ (sigma_sq_a * eye2) @ b.T
    return ProcessModel(
        transition=transition,
        noise_mean=np.zeros(4),
        noise_cov=noise_cov,
        step_s=t,
    )


def control_input(
    mean: StateVector, n: int, cfg: DynamicsConfig
) -> np.ndarray:
    """Deterministic control term for known_input mode: the driving force
    at QI n plus the restoring force evaluated at the belief mean, mapped
    into the state through [T^2/2; T]."""
    force = driving_force(n, cfg.force) + restoring_force(
        mean[POS], mean[VEL], cfg.force
    )
    accel = force / cfg.force.mass_kg
    t = cfg.step_s
    u = np.empty(4)
    u[POS] = 0.5 * t * t * accel
    u[VEL] = t * accel
    return u
