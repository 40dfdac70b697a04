"""Target kinematics, tracking bounds and the extended Kalman radar filter.

State convention: x = (theta, d, v) with azimuth theta in radians, range d in
meters and speed v in m/s along a fixed heading theta_bar.  One transition
covers a whole time frame of duration m_slots * t_slot.

Contents
--------
gamma_transition, gamma_jacobian : deterministic kinematic map and gradient
evolve_true_state                : true state transition with process noise
CrbCoefficients, crb_coefficients: single-shot estimation error floor
steering_vector, sensing_gain    : transmit array response toward a target
synthesize_measurement           : measurement-level sensing abstraction
TrackState, predict_track, ekf_update, ekf_step : tracking filter
ErrorTerms, eigen_error_terms    : spectral form of the posterior error
radar_performance                : weighted tracking error / update cost
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig, RadarTargetParams

_COS_FLOOR = 1e-6      # below this the error floor diverges
_COND_LIMIT = 1e12     # conditioning guard for predicted covariances


def gamma_transition(x: np.ndarray, theta_bar: float, frame_duration: float) -> np.ndarray:
    """Advance (theta, d, v) by one frame of straight-line motion.

    Uses the small-displacement approximation: the angle rotates by the
    transverse displacement over range and the range changes by the radial
    displacement.  Raises ValueError if the new range is not positive.
    """
    theta, d, v = x
    if d <= 0:
        raise ValueError(f"range must be positive, got {d}")
    step = v * frame_duration
    aspect = theta - theta_bar
    theta_next = theta + step * math.sin(aspect) / d
    d_next = d - step * math.cos(aspect)
    if d_next <= 0:
        raise ValueError(f"transition collapsed the range to {d_next}")
    return np.array([theta_next, d_next, v])


def gamma_jacobian(x: np.ndarray, theta_bar: float, frame_duration: float) -> np.ndarray:
    """Jacobian of gamma_transition with respect to (theta, d, v)."""
    theta, d, v = x
    if d <= 0:
        raise ValueError(f"range must be positive, got {d}")
    mt = frame_duration
    s = math.sin(theta - theta_bar)
    c = math.cos(theta - theta_bar)
    return np.array([
        [1.0 + v * mt * c / d, -v * mt * s / d ** 2, mt * s / d],
        [v * mt * s,            1.0,                -mt * c],
        [0.0,                   0.0,                 1.0],
    ])


def evolve_true_state(x: np.ndarray, params: RadarTargetParams,
                      cfg: SystemConfig, unit_noise: np.ndarray) -> np.ndarray:
    """True state transition: kinematic map plus white process noise.

    unit_noise holds three standard normal draws; they are scaled by the
    per-component process standard deviations.
    """
    x_next = gamma_transition(x, params.theta_bar, cfg.frame_duration)
    return x_next + np.sqrt(np.asarray(params.sigma_eps)) * np.asarray(unit_noise)


@dataclass
class CrbCoefficients:
    """Error floor of a single-frame (angle, range, speed) estimate per unit
    illumination power.  Dividing by the realized gain gives the variances."""

    a_theta: float
    a_d: float
    a_v: float

    def as_array(self) -> np.ndarray:
        return np.array([self.a_theta, self.a_d, self.a_v])


def crb_coefficients(x_pred: np.ndarray, theta_bar: float, sigma_rcs: float,
                     cfg: SystemConfig, m2: int) -> CrbCoefficients:
    """Estimation error floor coefficients at a predicted state.

    m2 is the number of slots left for downlink sensing in the frame.  The
    coefficients scale with the fourth power of range through the two-way
    channel gain and diverge near grazing geometry, where the angle or the
    radial speed becomes unobservable.
    """
    theta, d, _ = x_pred
    if d <= 0:
        raise ValueError(f"range must be positive, got {d}")
    if m2 < 2:
        raise ValueError(f"need at least 2 sensing slots, got {m2}")
    cos_theta = math.cos(theta)
    cos_aspect = math.cos(theta - theta_bar)
    if abs(cos_theta) < _COS_FLOOR or abs(cos_aspect) < _COS_FLOOR:
        raise ValueError("grazing geometry: error floor diverges")

    sigma = cfg.sigma_radar
    alpha_sq = cfg.c0 ** 2 * sigma_rcs / ((4 * math.pi) ** 3 * cfg.fc ** 2 * d ** 4)
    xi = alpha_sq * math.pi ** 2 * cfg.n_subcarriers * m2 * cfg.l_rx * cfg.l_tx

    a_theta = 6 * sigma / (xi * cos_theta ** 2 * (cfg.l_rx ** 2 - 1))
    a_d = 3 * cfg.c0 ** 2 * sigma / (8 * xi * cfg.delta_f ** 2 *
                                     (cfg.n_subcarriers ** 2 - 1))
    a_v = 3 * cfg.c0 ** 2 * sigma / (8 * xi * (cfg.t_slot * cfg.fc * cos_aspect) ** 2 *
                                     (m2 ** 2 - 1))
    return CrbCoefficients(a_theta, a_d, a_v)


def steering_vector(theta: float, l_tx: int) -> np.ndarray:
    """Unit-norm transmit array response of a half-wavelength ULA."""
    phase = -1j * math.pi * math.sin(theta) * np.arange(l_tx)
    return np.exp(phase) / math.sqrt(l_tx)


def sensing_gain(w_mat: np.ndarray, theta: float, l_tx: int) -> float:
    """Total beam power projected onto the array response at angle theta."""
    v = steering_vector(theta, l_tx)
    return float(np.sum(np.abs(v.conj() @ w_mat) ** 2))


def synthesize_measurement(x_true: np.ndarray, coeff: CrbCoefficients,
                           gain: float, unit_noise: np.ndarray) -> np.ndarray:
    """Draw an efficient-estimator measurement of the true state.

    The measurement error is zero-mean Gaussian with per-component variance
    equal to the error floor divided by the realized illumination gain.
    """
    if gain <= 0:
        raise ValueError(f"illumination gain must be positive, got {gain}")
    std = np.sqrt(coeff.as_array() / gain)
    return np.asarray(x_true) + std * np.asarray(unit_noise)


@dataclass
class TrackState:
    """Posterior state estimate and error covariance of one target."""

    x_hat: np.ndarray   # (3,) state estimate
    m: np.ndarray       # (3, 3) error covariance

    def copy(self) -> "TrackState":
        return TrackState(self.x_hat.copy(), self.m.copy())


def _symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def predict_track(track: TrackState, params: RadarTargetParams,
                  cfg: SystemConfig) -> tuple[np.ndarray, np.ndarray]:
    """One-frame prediction of the estimate and its error covariance."""
    x_pred = gamma_transition(track.x_hat, params.theta_bar, cfg.frame_duration)
    jac = gamma_jacobian(track.x_hat, params.theta_bar, cfg.frame_duration)
    m_pred = _symmetrize(np.diag(np.asarray(params.sigma_eps)) + jac @ track.m @ jac.T)
    if np.linalg.cond(m_pred) > _COND_LIMIT:
        raise ValueError("predicted covariance is numerically singular")
    return x_pred, m_pred


def ekf_update(x_pred: np.ndarray, m_pred: np.ndarray, x_meas: np.ndarray,
               coeff: CrbCoefficients, gain: float) -> TrackState:
    """Measurement update with the identity observation model.

    The measurement covariance is the error floor over the illumination gain;
    the posterior covariance uses the information form and is symmetrized.
    """
    if gain <= 0:
        raise ValueError(f"illumination gain must be positive, got {gain}")
    sigma_delta = np.diag(coeff.as_array() / gain)
    k_gain = m_pred @ np.linalg.inv(sigma_delta + m_pred)
    x_post = x_pred + k_gain @ (np.asarray(x_meas) - x_pred)
    m_post = np.linalg.inv(np.linalg.inv(m_pred) + gain * np.diag(1.0 / coeff.as_array()))
    return TrackState(x_post, _symmetrize(m_post))


def ekf_step(track: TrackState, update: bool, x_meas, coeff, gain,
             params: RadarTargetParams, cfg: SystemConfig) -> TrackState:
    """Full tracking step: predict, then measurement-update when requested.

    With update=False the measurement arguments are ignored and the predicted
    pair is returned as the new posterior.
    """
    x_pred, m_pred = predict_track(track, params, cfg)
    if not update:
        return TrackState(x_pred, m_pred)
    return ekf_update(x_pred, m_pred, x_meas, coeff, gain)


@dataclass
class ErrorTerms:
    """Spectral decomposition of the posterior tracking error.

    With B = S M_pred^-1 S (S the diagonal square root of the error floor),
    eigendecomposed as U diag(lam) U^T and C = S U, the posterior error
    covariance after an update with gain g is C diag(1/(lam+g)) C^T.  psi
    are the component-weighted squared rows of C; psi_tilde is the weighted
    trace of the predicted covariance (the no-update error).
    """

    lam: np.ndarray        # (3,) nonnegative eigenvalues
    psi: np.ndarray        # (3,) weighted column energies of C
    psi_tilde: float       # weighted trace of the predicted covariance
    c_mat: np.ndarray      # (3, 3) scaled eigenvector matrix


def eigen_error_terms(m_pred: np.ndarray, coeff: CrbCoefficients,
                      omega) -> ErrorTerms:
    """Diagonalize the update-gain dependence of the posterior error."""
    omega = np.asarray(omega, dtype=float)
    s_root = np.sqrt(coeff.as_array())
    b_mat = _symmetrize(s_root[:, None] * np.linalg.inv(m_pred) * s_root[None, :])
    lam, u_mat = np.linalg.eigh(b_mat)
    if np.any(lam < -1e-8 * max(lam.max(), 1.0)):
        raise ValueError(f"predicted covariance is not positive definite: {lam}")
    lam = np.clip(lam, 0.0, None)
    c_mat = s_root[:, None] * u_mat
    psi = (omega[:, None] * c_mat ** 2).sum(axis=0)
    psi_tilde = float(omega @ np.diag(m_pred))
    return ErrorTerms(lam, psi, psi_tilde, c_mat)


def radar_performance(update: bool, terms: ErrorTerms, gain: float,
                      cfg: SystemConfig) -> float:
    """Weighted tracking error plus, for updates, the echo processing cost.

    Without an update the metric is the weighted predicted error.  With an
    update the error shrinks with the illumination gain while the successive
    cancellation cost grows with it through the log of the echo-to-residual
    power ratio.
    """
    if not update:
        return cfg.omega_bar * terms.psi_tilde
    if gain <= 0:
        raise ValueError(f"illumination gain must be positive, got {gain}")
    err = float(np.sum(terms.psi / (gain + terms.lam)))
    cost = cfg.xi_a - cfg.xi_b * math.log10(gain / (cfg.xi_c * cfg.p_tx + cfg.sigma_radar))
    return cfg.omega_bar * err + (1.0 - cfg.omega_bar) * cost
