"""Rician uplink model: outage-constrained rate and transmit power.

An agent at AP distance d sees mean channel gain mu0 * d^-alpha and
Rician small-scale fading with shape factor G (linear).  The scheduler
asks each scheduled agent to transmit at the closed-form power that
keeps the outage probability of a fixed rate R_th below eps.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import erfc, sqrt

import numpy as np
from scipy.special import ndtri

from .errors import InfeasibleLink


def q_func(x: float) -> float:
    """Gaussian tail probability Q(x)."""
    return 0.5 * erfc(x / sqrt(2.0))


def q_inv(p: float) -> float:
    """Inverse Gaussian tail function, relative error below 1e-10."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"q_inv requires 0 < p < 1, got {p}")
    return float(-ndtri(p))


@dataclass
class LinkParams:
    """Uplink parameters.

    bandwidth_hz:      channel bandwidth W
    noise_power_w:     total in-band noise power (already W * N0)
    rician_g:          Rician factor G, linear
    mu0:               mean channel gain at 1 m
    path_loss_exp:     path-loss exponent
    rate_threshold_bps: fixed transmission rate R_th
    outage_eps:        outage probability target
    """

    bandwidth_hz: float
    noise_power_w: float
    rician_g: float
    mu0: float
    path_loss_exp: float
    rate_threshold_bps: float
    outage_eps: float

    def __post_init__(self):
        if min(self.bandwidth_hz, self.noise_power_w, self.rician_g, self.mu0) <= 0:
            raise ValueError("bandwidth, noise power, G and mu0 must be positive")
        if not 0.0 < self.outage_eps < 0.5:
            raise ValueError("outage_eps must lie in (0, 0.5)")
        if sqrt(2.0 * self.rician_g) <= q_inv(self.outage_eps):
            raise InfeasibleLink(
                "outage target unreachable: sqrt(2G) must exceed Qinv(eps) "
                f"(sqrt(2G)={sqrt(2 * self.rician_g):.4f}, "
                f"Qinv={q_inv(self.outage_eps):.4f})"
            )


def y_q(params: LinkParams) -> float:
    """Fading back-off factor of the outage power bound.

    y = sqrt(2G) + ln(sqrt(2G) / (sqrt(2G) - Qinv(eps))) / (2 Qinv(eps))
        - Qinv(eps), natural log.
    """
    s = sqrt(2.0 * params.rician_g)
    qv = q_inv(params.outage_eps)
    return s + np.log(s / (s - qv)) / (2.0 * qv) - qv


def mean_gain(params: LinkParams, dist_ap: float) -> float:
    """Mean channel gain mu0 * d^-alpha; requires d >= 1 m (the near-field
    below the reference distance is out of model)."""
    if dist_ap < 1.0:
        raise ValueError(f"AP distance must be >= 1 m, got {dist_ap}")
    return params.mu0 * dist_ap ** (-params.path_loss_exp)


def required_tx_power(params: LinkParams, dist_ap: float) -> float:
    """Transmit power (W) keeping P[rate < R_th] <= eps at distance d.

    Closed form: 2 N (1+G) (2^(R_th/W) - 1) / (y_q^2 mu(d)) where N is
    the total in-band noise power.
    """
    rate_factor = 2.0 ** (params.rate_threshold_bps / params.bandwidth_hz) - 1.0
    y = y_q(params)
    return (
        2.0
        * params.noise_power_w
        * (1.0 + params.rician_g)
        * rate_factor
        / (y * y * mean_gain(params, dist_ap))
    )


def outage_probability_mc(
    params: LinkParams,
    tx_power: float,
    dist_ap: float,
    trials: int,
    rng: np.random.Generator,
    chunk: int = 1_000_000,
) -> float:
    """Monte Carlo outage estimate P[W log2(1 + snr) < R_th].

    The fading draw is g = sqrt(G/(G+1)) * 1 + sqrt(1/(G+1)) * gt with gt
    standard circularly-symmetric complex normal; snr = p mu(d) |g|^2 / N.
    """
    if tx_power <= 0 or trials <= 0:
        raise ValueError("tx_power and trials must be positive")
    g = params.rician_g
    los = sqrt(g / (g + 1.0))
    nlos_scale = sqrt(1.0 / (g + 1.0)) / sqrt(2.0)  # per real component
    snr_scale = tx_power * mean_gain(params, dist_ap) / params.noise_power_w
    rate_factor = 2.0 ** (params.rate_threshold_bps / params.bandwidth_hz) - 1.0
    # Outage iff snr < 2^(R_th/W) - 1, i.e. |g|^2 < threshold:
    threshold = rate_factor / snr_scale

    failures = 0
    left = int(trials)
    while left > 0:
        m = min(chunk, left)
        re = los + nlos_scale * rng.standard_normal(m)
        im = nlos_scale * rng.standard_normal(m)
        failures += int(np.count_nonzero(re * re + im * im < threshold))
        left -= m
    return failures / float(trials)
