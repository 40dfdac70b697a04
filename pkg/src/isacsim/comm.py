"""Downlink channel aging, CSI re-estimation and the effective user rate.

Channels follow a first-order Gauss-Markov aging model across time frames.
Between re-estimations the base station predicts the channel by decaying its
last estimate; a re-estimation spends uplink pilot slots and replaces the
estimate with a linear minimum mean square error combination of the pilots.

Contents
--------
CommChannelState    : true channel, channel estimate and error variance
evolve_true_channel : one frame of Gauss-Markov aging
kappa_mmse          : pilot combining coefficient
update_csi          : predict-or-reestimate recursion for (g_hat, varsigma)
effective_rate      : per-user rate after the pilot overhead discount
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import CommUserParams, SystemConfig


@dataclass
class CommChannelState:
    """Channel bookkeeping of one user at one time frame."""

    g_true: np.ndarray   # (l_tx,) true downlink channel
    g_hat: np.ndarray    # (l_tx,) channel estimate used for beamforming
    varsigma: float      # per-entry variance of g_true - g_hat

    def copy(self) -> "CommChannelState":
        return CommChannelState(self.g_true.copy(), self.g_hat.copy(),
                                self.varsigma)


def evolve_true_channel(g: np.ndarray, rho: float, beta_bar: float,
                        unit_noise: np.ndarray) -> np.ndarray:
    """Age the true channel by one frame: rho g + sqrt(1-rho^2) innovation.

    unit_noise holds standard circularly symmetric complex Gaussian entries;
    it is scaled by the large-scale gain so the channel stays stationary with
    per-entry power beta_bar.
    """
    return rho * np.asarray(g) + math.sqrt((1.0 - rho ** 2) * beta_bar) * np.asarray(unit_noise)


def kappa_mmse(params: CommUserParams, d_pilot: int) -> float:
    """Pilot combining coefficient: prior power over prior-plus-noise power."""
    num = d_pilot * params.beta_bar * params.p_ul
    return num / (num + params.delta_ul)


def update_csi(g_true: np.ndarray, g_hat: np.ndarray, varsigma: float,
               update: bool, params: CommUserParams, cfg: SystemConfig,
               unit_noise: np.ndarray) -> tuple[np.ndarray, float]:
    """Advance the channel estimate by one frame.

    Without an update the estimate decays by rho and the error variance
    contracts toward the stationary channel power beta_bar.  With an update
    the user sends d_pilot pilot slots; the combined observation g_true + n
    is shrunk by the combining coefficient, leaving error variance
    beta_bar (1 - kappa).  g_true must already be the new frame's channel.

    unit_noise holds standard complex Gaussian entries for the pilot noise;
    it is ignored when update is False so callers can draw it unconditionally.
    """
    if not update:
        g_next = params.rho * np.asarray(g_hat)
        varsigma_next = params.rho ** 2 * varsigma + (1.0 - params.rho ** 2) * params.beta_bar
        return g_next, varsigma_next
    kappa = kappa_mmse(params, cfg.d_pilot)
    noise_var = params.delta_ul / (cfg.d_pilot * params.p_ul)
    g_next = kappa * (np.asarray(g_true) + math.sqrt(noise_var) * np.asarray(unit_noise))
    varsigma_next = params.beta_bar * (1.0 - kappa)
    return g_next, varsigma_next


def effective_rate(g_hat: np.ndarray, varsigma: float, w_mat: np.ndarray,
                   k: int, m_slots: int, m1: int, sigma: float,
                   p_tx: float) -> float:
    """Achievable rate of user k in nats, discounted by the pilot overhead.

    The denominator counts multiuser interference under the channel estimate,
    the residual power of the estimation error and the receiver noise.  m1 is
    the number of slots spent on uplink pilots this frame.
    """
    if not 0 <= m1 <= m_slots:
        raise ValueError(f"m1 must lie in [0, {m_slots}], got {m1}")
    rec = np.asarray(g_hat).conj() @ np.asarray(w_mat)
    powers = np.abs(rec) ** 2
    signal = powers[k]
    interference = float(powers.sum() - signal)
    sinr = signal / (interference + varsigma * p_tx + sigma)
    return (m_slots - m1) / m_slots * math.log1p(sinr)
