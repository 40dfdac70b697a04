"""Frame-level simulation state shared by the learned and baseline policies.

A World owns the true channels and target states, the receiver-side
estimates, and the named random streams.  Each frame proceeds in two steps:

* make_context precomputes everything a decision needs that does not depend
  on the decision itself: predicted channels and tracks, the error terms of
  both update branches, and steering directions.  Candidate decisions are
  evaluated against this context without touching the world.
* advance draws the frame's noise, moves the true states, and commits the
  chosen decision's estimate updates.  Noise is drawn unconditionally in a
  fixed order, so worlds running different policies from the same seed see
  identical realizations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import comm as comm_mod
from . import radar as radar_mod
from .beamforming import CommEval, RadarEval
from .config import (CommUserParams, RadarTargetParams, RngStreams,
                     SystemConfig, complex_normal, initial_gain)


@dataclass
class World:
    cfg: SystemConfig
    users: list
    targets: list
    comm: list           # CommChannelState per user
    g_true: list         # true channel per user
    tracks: list         # TrackState per target
    x_true: list         # true kinematic state per target
    frame: int
    rngs: RngStreams


@dataclass
class FrameRecord:
    """What one policy did and earned in one frame.

    k_c/k_r are the candidate counts the policy evaluated and i_c/i_r the
    1-based indices it selected (both 1 for single-candidate policies).
    loss is the training loss, NaN for policies that do not train.
    """

    frame: int
    u_genie: float
    u_practical: float
    comm_sum: float
    radar_sum: float
    a_c: np.ndarray
    a_r: np.ndarray
    k_c: int
    k_r: int
    i_c: int
    i_r: int
    loss: float
    m1: int
    solver_iters: int
    wall_time: float


def init_world(cfg: SystemConfig, users, targets, seed) -> World:
    """Draw the frame-0 state: Rayleigh channels with a noisy half-power
    estimate, and tracks seeded at the true state plus an error matched to
    the single-shot error floor at uniform illumination."""
    rngs = seed if isinstance(seed, RngStreams) else RngStreams(seed)
    q = len(targets)

    g_true, comm = [], []
    for u in users:
        g0 = complex_normal(rngs.channel_evolution, u.beta_bar, cfg.l_tx)
        err = complex_normal(rngs.estimation_noise, u.varsigma0, cfg.l_tx)
        g_true.append(g0)
        comm.append(comm_mod.CommChannelState(g0, g0 + err, u.varsigma0))

    x_true, tracks = [], []
    gain0 = initial_gain(cfg, q)
    for p in targets:
        x0 = np.asarray(p.x0, dtype=float)
        if p.m0 is not None:
            m0 = np.asarray(p.m0, dtype=float)
        else:
            coeff = radar_mod.crb_coefficients(x0, p.theta_bar, p.sigma_rcs,
                                               cfg, cfg.m_slots)
            m0 = np.diag(coeff.as_array() / gain0)
        x_hat = x0 + np.sqrt(np.diag(m0)) * rngs.measurement_noise.standard_normal(3)
        x_true.append(x0)
        tracks.append(radar_mod.TrackState(x_hat, m0))
    return World(cfg, list(users), list(targets), comm, g_true, tracks,
                 x_true, 0, rngs)


@dataclass
class FrameContext:
    """Decision-independent quantities of one frame.

    Error terms and measurement coefficients depend on the pilot slot count
    of the communication half of a decision, so they are cached per
    (target, m1) pair as candidates ask for them.
    """

    cfg: SystemConfig
    users: list
    targets: list
    g_eval: list          # predicted channel per user, the no-update branch
    g_est: list           # synthesized pilot return per user, the update branch
    varsigma_pred: np.ndarray
    varsigma_est: np.ndarray
    x_pred: list
    m_pred: list
    theta_pred: np.ndarray
    _terms: dict = field(default_factory=dict)

    def m1_of(self, bits_c) -> int:
        return int(self.cfg.d_pilot * int(np.sum(bits_c)))

    def terms(self, q: int, m1: int):
        """(coefficients, error terms) of target q at pilot count m1."""
        key = (q, m1)
        if key not in self._terms:
            p = self.targets[q]
            coeff = radar_mod.crb_coefficients(
                self.x_pred[q], p.theta_bar, p.sigma_rcs, self.cfg,
                self.cfg.m_slots - m1)
            terms = radar_mod.eigen_error_terms(self.m_pred[q], coeff,
                                                self.cfg.omega)
            self._terms[key] = (coeff, terms)
        return self._terms[key]

    def comm_evals(self, bits_c):
        out = []
        for k, u in enumerate(self.users):
            if bits_c[k]:
                g, vs = self.g_est[k], self.varsigma_est[k]
            else:
                g, vs = self.g_eval[k], self.varsigma_pred[k]
            out.append(CommEval(g, float(vs), u.sigma, self.cfg.w_comm))
        return out

    def radar_evals(self, bits_c, bits_r):
        m1 = self.m1_of(bits_c)
        out = []
        for q in range(len(self.targets)):
            _, terms = self.terms(q, m1)
            out.append(RadarEval(bool(bits_r[q]), float(self.theta_pred[q]),
                                 terms, self.cfg.w_radar))
        return out

    def candidate(self, bits_c, bits_r):
        """(comm_evals, radar_evals, m1) triple for the batch builder."""
        m1 = self.m1_of(bits_c)
        if m1 > self.cfg.m_slots:
            raise ValueError("pilot slots exceed the frame")
        return self.comm_evals(bits_c), self.radar_evals(bits_c, bits_r), m1


def make_context(world: World) -> FrameContext:
    """Build the decision-stage view of the coming frame.

    The no-update branch decays the committed estimate; the update branch
    holds the actual pilot return on the current true channel, since pilots
    for every explored user go out before the downlink beams are designed.
    Pilot noise is drawn unconditionally so the stream position never
    depends on the policy.  advance() commits the chosen branch verbatim.
    """
    cfg = world.cfg
    g_eval, g_est, vs_pred, vs_est = [], [], [], []
    for k, u in enumerate(world.users):
        st = world.comm[k]
        unit = complex_normal(world.rngs.estimation_noise, 1.0, cfg.l_tx)
        g_p, v_p = comm_mod.update_csi(world.g_true[k], st.g_hat, st.varsigma,
                                       False, u, cfg, unit)
        g_e, v_e = comm_mod.update_csi(world.g_true[k], st.g_hat, st.varsigma,
                                       True, u, cfg, unit)
        g_eval.append(g_p)
        g_est.append(g_e)
        vs_pred.append(v_p)
        vs_est.append(v_e)

    x_pred, m_pred, theta_pred = [], [], []
    for q, p in enumerate(world.targets):
        xp, mp = radar_mod.predict_track(world.tracks[q], p, cfg)
        x_pred.append(xp)
        m_pred.append(mp)
        theta_pred.append(xp[0])
    return FrameContext(cfg, world.users, world.targets, g_eval, g_est,
                        np.asarray(vs_pred), np.asarray(vs_est),
                        x_pred, m_pred, np.asarray(theta_pred))


def advance(world: World, ctx: FrameContext, bits_c, bits_r,
            w_mat: np.ndarray) -> None:
    """Apply one frame transition under the chosen decision.

    Commits the context branch the decision selects, then draws channel,
    process and measurement noise in a fixed order regardless of the
    decision, stages every new state, and commits only when all of them
    computed cleanly.
    """
    cfg = world.cfg
    k_users = len(world.users)
    q_targets = len(world.targets)

    unit_ch = [complex_normal(world.rngs.channel_evolution, 1.0, cfg.l_tx)
               for _ in range(k_users)]
    unit_state = world.rngs.state_evolution.standard_normal((q_targets, 3))
    unit_meas = world.rngs.measurement_noise.standard_normal((q_targets, 3))

    m1 = ctx.m1_of(bits_c)
    new_g, new_comm = [], []
    for k, u in enumerate(world.users):
        if bits_c[k]:
            g_hat, vs = ctx.g_est[k], float(ctx.varsigma_est[k])
        else:
            g_hat, vs = ctx.g_eval[k], float(ctx.varsigma_pred[k])
        g_next = comm_mod.evolve_true_channel(world.g_true[k], u.rho,
                                              u.beta_bar, unit_ch[k])
        new_g.append(g_next)
        new_comm.append(comm_mod.CommChannelState(
            g_next, np.asarray(g_hat).copy(), vs))

    new_x, new_tracks = [], []
    for q, p in enumerate(world.targets):
        x_next = radar_mod.evolve_true_state(world.x_true[q], p, cfg,
                                             unit_state[q])
        if bits_r[q]:
            coeff, _ = ctx.terms(q, m1)
            gain = radar_mod.sensing_gain(w_mat, ctx.theta_pred[q], cfg.l_tx)
            x_meas = radar_mod.synthesize_measurement(x_next, coeff, gain,
                                                      unit_meas[q])
            track = radar_mod.ekf_update(ctx.x_pred[q], ctx.m_pred[q],
                                         x_meas, coeff, gain)
        else:
            track = radar_mod.TrackState(ctx.x_pred[q].copy(),
                                         ctx.m_pred[q].copy())
        new_x.append(x_next)
        new_tracks.append(track)

    world.g_true = new_g
    world.comm = new_comm
    world.x_true = new_x
    world.tracks = new_tracks
    world.frame += 1


def snapshot(world: World) -> dict:
    """Deep copy of everything needed to restore or clone the world."""
    return {
        "frame": world.frame,
        "g_true": [g.copy() for g in world.g_true],
        "comm": [s.copy() for s in world.comm],
        "x_true": [x.copy() for x in world.x_true],
        "tracks": [t.copy() for t in world.tracks],
        "rng_state": world.rngs.state(),
    }


def restore(world: World, snap: dict) -> None:
    world.frame = snap["frame"]
    world.g_true = [g.copy() for g in snap["g_true"]]
    world.comm = [s.copy() for s in snap["comm"]]
    world.x_true = [x.copy() for x in snap["x_true"]]
    world.tracks = [t.copy() for t in snap["tracks"]]
    world.rngs.set_state(snap["rng_state"])


def copy_estimates(dst: World, src: World) -> None:
    """Overwrite dst's receiver-side estimates with src's.

    Used to re-align a reference policy with the learned one mid-run; the
    true states and stream positions already agree when both worlds were
    stepped in lockstep from the same seed.
    """
    if dst.frame != src.frame:
        raise ValueError("worlds are at different frames")
    dst.comm = [s.copy() for s in src.comm]
    dst.tracks = [t.copy() for t in src.tracks]
    dst.g_true = [g.copy() for g in src.g_true]
    dst.x_true = [x.copy() for x in src.x_true]
