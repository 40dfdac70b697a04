"""Weighted rate-minus-tracking-error transmit beamforming.

Solves, per candidate update decision, the power-constrained problem

    max_W  sum_k w_kn ln(1 + SINR_k(W))  -  sum_(updated q) w_q R_q(gain_q(W))

by a fractional programming reformulation of the rate term (auxiliary
variables alpha, beta), an epigraph variable mu per illuminated target with a
concave minorant of the beam gain, and dual ascent on the gain constraint
multipliers eta.  Each block update is an exact coordinate maximizer of the
inner objective, so the objective is nondecreasing across blocks within an
iteration.

Every routine carries a leading lane axis so that many candidate decisions
are solved in one vectorized pass; a single instance is the one-lane case.

Contents
--------
CommEval, RadarEval, build_batch : branch-advanced problem data
SolverOptions, P2Result          : solver knobs and outputs
mrt_beamformer                   : matched equal-power initialization
update_beta, update_alpha        : fractional programming auxiliaries
update_mu                        : epigraph block via a scalar root
update_w_lagrangian              : exact W block through a dual eigen solve
update_w_proxlinear              : extrapolated proximal W block
sca_lower_bound, update_eta      : gain minorant and dual ascent
evaluate_utility                 : reference metric evaluation
solve_p2, solve_p2_batch         : full alternating solver
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import SystemConfig
from .radar import steering_vector

LN10 = math.log(10.0)
_POWER_SLACK = 1e-9     # tolerated overshoot of the transmit power budget
_ETA_FLOOR = 1e-12      # below this a gain multiplier counts as inactive


@dataclass
class CommEval:
    """One user's channel state as seen by the beamformer for one candidate."""

    g_hat: np.ndarray    # (l_tx,) channel the beams are designed against
    varsigma: float      # CSI error variance of the evaluated branch
    sigma: float         # receiver noise power
    w_rate: float        # rate weight of this user


@dataclass
class RadarEval:
    """One target's predicted-state error terms for one candidate."""

    update: bool         # whether this candidate re-estimates the target
    theta: float         # predicted azimuth to illuminate
    terms: object        # radar.ErrorTerms at the candidate's slot split
    w_track: float       # tracking weight of this target


@dataclass
class SolverOptions:
    """Knobs of the alternating solver."""

    w_update_mode: str = "lagrangian"   # "lagrangian" or "prox-linear"
    max_iters: int = 100
    tol: float = 1e-5                   # relative change of the outer objective
    eta0: float = 1e-2                  # initial gain multipliers
    trace_blocks: bool = False          # record the inner objective per block


@dataclass
class P2Batch:
    """C candidate beamforming instances over shared antenna dimensions.

    Radar arrays are padded to all frame targets; sel marks which targets a
    lane actually updates.  const collects the decision's metric terms that
    do not depend on W: predicted errors of unupdated targets and the fixed
    part of the update cost.
    """

    g_hat: np.ndarray     # (c, l, k) evaluation channels
    sigma_eff: np.ndarray # (c, k) noise plus CSI error power
    w_kn: np.ndarray      # (c, k) rate weights discounted by the slot split
    v_steer: np.ndarray   # (l, q) steering vectors at the predicted angles
    sel: np.ndarray       # (c, q) update masks
    psi: np.ndarray       # (c, q, 3) weighted error energies
    lam: np.ndarray       # (c, q, 3) error eigenvalues
    w_radar: np.ndarray   # (q,) tracking weights
    const: np.ndarray     # (c,) W-independent part of the tracking metric

    @property
    def shape(self):
        return self.g_hat.shape


@dataclass
class P2Result:
    w: np.ndarray            # (c, l, k) best beamformers found
    utility: np.ndarray      # (c,) their exact candidate utilities
    comm_sum: np.ndarray     # (c,) weighted rate part at w
    radar_sum: np.ndarray    # (c,) weighted tracking part at w
    iters: int = 0
    block_trace: list = field(default_factory=list)


def build_batch(candidates, cfg: SystemConfig) -> P2Batch:
    """Stack per-candidate (comm_evals, radar_evals, m1) triples into arrays.

    Every candidate must describe the same users and targets, and the
    steering direction of each target must agree across candidates.  m1 is
    the candidate's pilot slot count; it discounts the rate weights.
    """
    if not candidates:
        raise ValueError("need at least one candidate")
    c = len(candidates)
    comm0, radar0, _ = candidates[0]
    l_tx = comm0[0].g_hat.shape[0]
    k = len(comm0)
    q = len(radar0)

    g_hat = np.empty((c, l_tx, k), dtype=complex)
    sigma_eff = np.empty((c, k))
    w_kn = np.empty((c, k))
    sel = np.zeros((c, q), dtype=bool)
    psi = np.ones((c, q, 3))
    lam = np.ones((c, q, 3))
    const = np.zeros(c)
    w_radar = np.array([r.w_track for r in radar0])
    v_steer = (np.stack([steering_vector(r.theta, l_tx) for r in radar0],
                        axis=1) if q else np.zeros((l_tx, 0), dtype=complex))

    cost_const = (1.0 - cfg.omega_bar) * (
        cfg.xi_a + cfg.xi_b * math.log10(cfg.xi_c * cfg.p_tx + cfg.sigma_radar))
    for i, (comm, radar, m1) in enumerate(candidates):
        if not 0 <= m1 <= cfg.m_slots:
            raise ValueError(f"m1 must lie in [0, {cfg.m_slots}], got {m1}")
        overhead = (cfg.m_slots - m1) / cfg.m_slots
        for kk, e in enumerate(comm):
            g_hat[i, :, kk] = e.g_hat
            sigma_eff[i, kk] = e.varsigma * cfg.p_tx + e.sigma
            w_kn[i, kk] = e.w_rate * overhead
        for qq, r in enumerate(radar):
            if abs(r.theta - radar0[qq].theta) > 1e-12:
                raise ValueError("candidates disagree on target directions")
            psi[i, qq] = r.terms.psi
            lam[i, qq] = r.terms.lam
            if r.update:
                sel[i, qq] = True
                const[i] += r.w_track * cost_const
            else:
                const[i] += r.w_track * cfg.omega_bar * r.terms.psi_tilde
    return P2Batch(g_hat, sigma_eff, w_kn, v_steer, sel, psi, lam, w_radar,
                   const)


def mrt_beamformer(g_hat: np.ndarray, p_tx: float) -> np.ndarray:
    """Equal-power matched beams: each column aligned with its own channel."""
    g_hat = np.asarray(g_hat)
    k = g_hat.shape[-1]
    norms = np.maximum(np.linalg.norm(g_hat, axis=-2, keepdims=True), 1e-300)
    return math.sqrt(p_tx / k) * g_hat / norms


def _cross_gains(g_hat: np.ndarray, w: np.ndarray) -> np.ndarray:
    """z[..., k, i] = g_k^H w_i."""
    return np.einsum("...lk,...li->...ki", g_hat.conj(), w)


def _signal_terms(z: np.ndarray, sigma_eff: np.ndarray):
    """Per-user direct gain a_k and total received power b_k."""
    a = np.einsum("...kk->...k", z)
    b = (np.abs(z) ** 2).sum(axis=-1) + sigma_eff
    return a, b


def _steer_gains(v_steer: np.ndarray, w: np.ndarray) -> np.ndarray:
    """cq[..., q, k] = v_q^H w_k."""
    return np.einsum("lq,...lk->...qk", v_steer.conj(), w)


def update_beta(a: np.ndarray, b: np.ndarray, w_kn: np.ndarray,
                alpha: np.ndarray) -> np.ndarray:
    """Exact maximizer of the quadratic-transform objective in beta."""
    return np.sqrt(w_kn * (1.0 + alpha)) * a / b


def update_alpha(a: np.ndarray, beta: np.ndarray,
                 w_kn: np.ndarray) -> np.ndarray:
    """Exact maximizer in the rate auxiliary alpha given beta."""
    lam = (beta.conj() * a).real / np.sqrt(w_kn)
    return 0.5 * (lam ** 2 + lam * np.sqrt(lam ** 2 + 4.0))


def mu_bound(cfg: SystemConfig) -> float:
    """Hard ceiling of the gain epigraph variable.

    Any realizable beam gain is at most the transmit power, far below this
    ceiling, so the cap keeps the block bounded without binding at a
    solution.
    """
    return 10.0 * (cfg.xi_c * cfg.p_tx + cfg.sigma_radar)


def _mu_root(psi: np.ndarray, lam: np.ndarray, eta_eff: np.ndarray,
             cfg: SystemConfig, warm=None, iters: int = 40) -> np.ndarray:
    """Stationary point of the mu block by guarded Newton.

    Solves omega_bar sum_l psi_l/(mu+lam_l)^2 + c/mu = eta_eff for mu > 0
    with c = (1-omega_bar) xi_b / ln 10.  The left side is convex and
    strictly decreasing, so Newton iterates started at or left of the root
    increase monotonically to it; the start point is the tightest closed-form
    lower bound, or the warm start when that is still left of the root.
    """
    psi_w = cfg.omega_bar * psi
    c_lin = (1.0 - cfg.omega_bar) * cfg.xi_b / LN10
    cap = mu_bound(cfg)
    eta_pos = np.maximum(eta_eff, 1e-300)

    start = np.sqrt(psi_w.sum(axis=-1) / eta_pos) - lam.max(axis=-1)
    if c_lin > 0:
        start = np.maximum(start, c_lin / eta_pos)
    start = np.clip(start, 1e-12, cap)

    if warm is not None:
        r_warm = ((psi_w / (warm[..., None] + lam) ** 2).sum(-1)
                  + c_lin / warm - eta_eff)
        start = np.where(r_warm >= 0, np.maximum(start, warm), start)

    mu = start
    for _ in range(iters):
        denom = mu[..., None] + lam
        r = (psi_w / denom ** 2).sum(-1) + c_lin / mu - eta_eff
        rp = -2.0 * (psi_w / denom ** 3).sum(-1) - c_lin / mu ** 2
        mu_next = np.clip(mu - r / rp, 1e-12, None)
        done = np.all(np.abs(mu_next - mu) <= 1e-14 * np.maximum(mu, 1.0))
        mu = mu_next
        if done:
            break
    return np.minimum(mu, cap)


def update_mu(psi: np.ndarray, lam: np.ndarray, eta: float, w_track: float,
              cfg: SystemConfig, warm: float | None = None) -> float:
    """Exact maximizer of the inner objective in one target's mu.

    The multiplier enters scaled by the target weight because the error term
    it trades against carries that weight.  Multipliers below the active
    floor leave the block increasing everywhere, so the ceiling is returned.
    """
    if eta < _ETA_FLOOR:
        return mu_bound(cfg)
    warm_arr = None if warm is None else np.asarray([warm])
    out = _mu_root(np.asarray(psi)[None, :], np.asarray(lam)[None, :],
                   np.asarray([eta / w_track]), cfg, warm_arr)
    return float(out[0])


def sca_lower_bound(c_new: np.ndarray, c_anchor: np.ndarray) -> np.ndarray:
    """Affine minorant of the beam gain around the anchor, summed over beams."""
    return (2.0 * (c_anchor.conj() * c_new).real
            - np.abs(c_anchor) ** 2).sum(-1)


def update_eta(eta: np.ndarray, slack: np.ndarray, delta_s: float,
               t: int) -> np.ndarray:
    """Projected subgradient step on the gain constraint multipliers."""
    return np.maximum(eta - delta_s / math.sqrt(t) * slack, 0.0)


def _w_rhs(batch: P2Batch, s_coeff: np.ndarray, beta: np.ndarray,
           eta_m: np.ndarray, c_anchor: np.ndarray) -> np.ndarray:
    """Linear term h of the W block: rate pull plus illumination pull."""
    h = batch.g_hat * (s_coeff * beta)[:, None, :]
    if batch.sel.shape[1]:
        h = h + np.einsum("lq,cq,cqk->clk", batch.v_steer, eta_m, c_anchor)
    return h


def w_block_value(batch: P2Batch, beta: np.ndarray, s_coeff: np.ndarray,
                  eta_m: np.ndarray, c_anchor: np.ndarray,
                  w: np.ndarray) -> np.ndarray:
    """W-dependent part of the inner objective at frozen auxiliaries."""
    z = _cross_gains(batch.g_hat, w)
    a, b = _signal_terms(z, batch.sigma_eff)
    val = (-np.abs(beta) ** 2 * b
           + 2.0 * s_coeff * (beta.conj() * a).real).sum(-1)
    if batch.sel.shape[1]:
        cq = _steer_gains(batch.v_steer, w)
        val = val + (eta_m * sca_lower_bound(cq, c_anchor)).sum(-1)
    return val


def w_block_gradient(batch: P2Batch, beta: np.ndarray, s_coeff: np.ndarray,
                     eta_m: np.ndarray, c_anchor: np.ndarray,
                     w: np.ndarray) -> np.ndarray:
    """Gradient of w_block_value with respect to the real and imaginary
    parts of W, packed as one complex array: real parts in the real
    component, imaginary parts in the imaginary component."""
    h = _w_rhs(batch, s_coeff, beta, eta_m, c_anchor)
    z = _cross_gains(batch.g_hat, w)
    gw = np.einsum("clk,ck,cki->cli", batch.g_hat, np.abs(beta) ** 2, z)
    return 2.0 * (h - gw)


def update_w_lagrangian(batch: P2Batch, beta: np.ndarray, s_coeff: np.ndarray,
                        eta_m: np.ndarray, c_anchor: np.ndarray, p_tx: float):
    """Exact W block: solve (lam I + G) w_k = h_k at the dual point where
    the power budget is met.

    G is the beta-weighted channel outer product.  Diagonalizing G makes the
    transmit power a rational function of the dual variable whose root is
    found by Newton from the left; the curve is convex and decreasing, so
    those iterates cannot overshoot.  Lanes whose unconstrained solution is
    already feasible take it, with rounding-level null modes of G truncated
    (least-norm solution).  Returns (w, lam_dual, degenerate) where
    degenerate marks all-zero systems the caller should leave unchanged.
    """
    c, l_tx, k = batch.g_hat.shape
    beta2 = np.abs(beta) ** 2
    h = _w_rhs(batch, s_coeff, beta, eta_m, c_anchor)
    h_norm2 = (np.abs(h) ** 2).sum((-2, -1))
    degenerate = h_norm2 < 1e-280

    g_big = np.einsum("clk,ck,cmk->clm", batch.g_hat, beta2,
                      batch.g_hat.conj())
    d_eig, v_eig = np.linalg.eigh(
        0.5 * (g_big + g_big.conj().transpose(0, 2, 1)))
    d_eig = np.clip(d_eig, 0.0, None)
    h_rot = np.einsum("cml,cmk->clk", v_eig.conj(), h)
    v2 = (np.abs(h_rot) ** 2).sum(-1)          # (c, l), beams collapsed

    # Rounding-level eigenvalues of G must not decide feasibility: a mode is
    # junk when both its eigenvalue and its signal energy are negligible.
    # Junk modes are truncated everywhere (least-norm semantics); their
    # floored denominators would otherwise wreck the dual power curve.
    d_floor = 1e-10 * d_eig.max(-1, keepdims=True) + 1e-200
    junk = (d_eig < d_floor) & (v2 <= 1e-20 * np.maximum(h_norm2, 1e-300)[:, None])
    live_null = (d_eig < d_floor) & ~junk
    v2c = np.where(junk, 0.0, v2)

    p0 = (v2c / np.maximum(np.where(junk, 1.0, d_eig), 1e-150) ** 2).sum(-1)
    active = (p0 > p_tx) | live_null.any(-1) | degenerate

    def solve_dual(active_mask):
        # Each start term is a closed-form point left of the dual root:
        # power(lam) >= null_e/(d_live+lam)^2 over the live null modes and
        # power(lam) >= h_norm2/(d_max+lam)^2 overall.  Starting left keeps
        # every denominator at live-signal scale, so nothing overflows.
        null_e = np.where(live_null, v2c, 0.0).sum(-1)
        d_live = np.where(live_null, d_eig, 0.0).max(-1)
        start = np.maximum(np.sqrt(h_norm2 / p_tx) - d_eig.max(-1),
                           np.sqrt(null_e / p_tx) - d_live)
        lam = np.where(active_mask, np.maximum(start, 0.0), 0.0)
        for _ in range(60):
            denom = np.maximum(d_eig + lam[:, None], 1e-150)
            quot = v2c / denom ** 2
            power = quot.sum(-1)
            grad = -2.0 * (quot / denom).sum(-1)
            # only lanes still above budget step; from-left Newton on the
            # convex decreasing curve never overshoots, so lam never falls
            step = np.where(active_mask & (grad < 0) & (power > p_tx),
                            (power - p_tx) / grad, 0.0)
            lam_new = lam - step
            done = np.all(np.abs(lam_new - lam)
                          <= 1e-15 * np.maximum(lam_new, 1.0))
            lam = lam_new
            if done:
                break
        return lam

    def reconstruct(lam):
        denom = np.maximum(d_eig + lam[:, None], 1e-150)
        ratio = h_rot / denom[..., None]
        return np.where(junk[..., None], 0.0, ratio)

    lam_dual = solve_dual(active)
    ratio = reconstruct(lam_dual)
    power = (np.abs(ratio) ** 2).sum((-2, -1))

    # A floored mode with real signal can make a lane that classified as
    # interior overshoot the budget; reclassify those and resolve once.
    overshoot = ~active & (power > p_tx * (1.0 + 1e-12))
    if overshoot.any():
        active = active | overshoot
        lam_dual = solve_dual(active)
        ratio = reconstruct(lam_dual)

    w = np.einsum("clm,cmk->clk", v_eig, ratio)
    return w, lam_dual, degenerate


def update_w_proxlinear(batch: P2Batch, beta: np.ndarray, s_coeff: np.ndarray,
                        eta_m: np.ndarray, c_anchor: np.ndarray,
                        w_old: np.ndarray, w_prev: np.ndarray,
                        extrapolation, f_tilde: np.ndarray,
                        p_tx: float) -> np.ndarray:
    """Majorized W block: one proximal gradient step from an extrapolated
    point, projected in closed form onto the power ball.

    f_tilde must upper-bound the curvature of the quadratic term (twice the
    spectral norm of G).  The unconstrained step is kept when feasible;
    otherwise the dual shift of the projection has an explicit root.
    """
    beta2 = np.abs(beta) ** 2
    h = _w_rhs(batch, s_coeff, beta, eta_m, c_anchor)
    h_norm2 = (np.abs(h) ** 2).sum((-2, -1))
    w_tilde = w_old + np.asarray(extrapolation)[..., None, None] * (w_old - w_prev)
    zt = _cross_gains(batch.g_hat, w_tilde)
    g_wt = np.einsum("clk,ck,cki->cli", batch.g_hat, beta2, zt)
    f_lin = 2.0 * (g_wt - h)

    f_col = f_tilde[..., None, None]
    w_free = w_tilde - f_lin / np.maximum(f_col, 1e-150)
    free_ok = ((np.abs(w_free) ** 2).sum((-2, -1)) <= p_tx) & (f_tilde > 0)

    top = f_col * w_tilde - f_lin
    scale = np.sqrt((np.abs(top) ** 2).sum((-2, -1)) / p_tx)
    w_proj = top / np.maximum(scale, 1e-300)[..., None, None]

    w_new = np.where(free_ok[..., None, None], w_free, w_proj)
    degenerate = (f_tilde < 1e-280) & (h_norm2 < 1e-280)
    return np.where(degenerate[..., None, None], w_old, w_new)


def _spectral_curvature(gram: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Twice the largest eigenvalue of G, computed on the beam-sized Gram."""
    ab = np.abs(beta)
    small = ab[..., :, None] * gram * ab[..., None, :]
    eig = np.linalg.eigvalsh(small)
    return 2.0 * np.clip(eig[..., -1], 0.0, None)


def _f_comm(a, b, w_kn, alpha, beta, s_coeff):
    omega = np.log1p(alpha) - alpha
    return (w_kn * omega - np.abs(beta) ** 2 * b
            + 2.0 * s_coeff * (beta.conj() * a).real).sum(-1)


def _f_radar(batch: P2Batch, mu: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    err = (batch.psi / (mu[..., None] + batch.lam)).sum(-1)
    cost = (1.0 - cfg.omega_bar) * cfg.xi_b * np.log10(np.maximum(mu, 1e-300))
    per_target = batch.w_radar * (cfg.omega_bar * err - cost)
    return np.where(batch.sel, per_target, 0.0).sum(-1)


def _f_radar_at(batch: P2Batch, gain: np.ndarray, cfg: SystemConfig):
    with np.errstate(divide="ignore"):
        err = (batch.psi / (gain[..., None] + batch.lam)).sum(-1)
        cost = (1.0 - cfg.omega_bar) * cfg.xi_b * np.log10(gain)
    per_target = batch.w_radar * (cfg.omega_bar * err - cost)
    return np.where(batch.sel, per_target, 0.0).sum(-1)


def _utility(batch: P2Batch, a, b, cq, cfg: SystemConfig):
    """Exact candidate utility and its two halves from precomputed gains."""
    sig = np.abs(a) ** 2
    rates = (batch.w_kn * np.log1p(sig / (b - sig))).sum(-1)
    gain = (np.abs(cq) ** 2).sum(-1)
    radar = batch.const + _f_radar_at(batch, gain, cfg)
    return rates - radar, rates, radar


def evaluate_batch(batch: P2Batch, w: np.ndarray, cfg: SystemConfig):
    """Exact (utility, comm part, radar part) of given beams on every lane.

    w may be a single (l, k) matrix shared by all lanes or one per lane.
    """
    z = _cross_gains(batch.g_hat, w)
    a, b = _signal_terms(z, batch.sigma_eff)
    cq = _steer_gains(batch.v_steer, w)
    return _utility(batch, a, b, cq, cfg)


def evaluate_utility(comm_evals, radar_evals, w_mat: np.ndarray, m1: int,
                     cfg: SystemConfig) -> float:
    """Reference utility of one candidate, entity by entity from the base
    formulas: weighted overhead-discounted rates minus the weighted tracking
    metric."""
    from .comm import effective_rate
    from .radar import radar_performance, sensing_gain

    total = 0.0
    for k, e in enumerate(comm_evals):
        total += e.w_rate * effective_rate(
            e.g_hat, e.varsigma, w_mat, k, cfg.m_slots, m1, e.sigma, cfg.p_tx)
    for r in radar_evals:
        gain = sensing_gain(w_mat, r.theta, w_mat.shape[0]) if r.update else 0.0
        total -= r.w_track * radar_performance(r.update, r.terms, gain, cfg)
    return float(total)


def solve_p2_batch(batch: P2Batch, cfg: SystemConfig,
                   opts: SolverOptions | None = None) -> P2Result:
    """Alternating maximization over all lanes of a candidate batch.

    Starts from matched beamforming, iterates beta, alpha, mu, W and the
    gain multipliers until the outer objective of every lane settles, and
    returns per lane the best beamformer seen measured by the exact
    candidate utility.  The matched initializer is iterate zero, so the
    result never falls below it.
    """
    opts = opts or SolverOptions()
    if opts.w_update_mode not in ("lagrangian", "prox-linear"):
        raise ValueError(f"unknown w_update_mode {opts.w_update_mode!r}")
    c, l_tx, k = batch.g_hat.shape
    p_tx = cfg.p_tx
    has_radar = bool(batch.sel.shape[1]) and bool(batch.sel.any())

    w = np.broadcast_to(mrt_beamformer(batch.g_hat, p_tx),
                        batch.g_hat.shape).copy()
    z = _cross_gains(batch.g_hat, w)
    a, b = _signal_terms(z, batch.sigma_eff)
    sig = np.abs(a) ** 2
    alpha = sig / (b - sig)
    beta = update_beta(a, b, batch.w_kn, alpha)
    cq = _steer_gains(batch.v_steer, w)
    mu = np.where(batch.sel, (np.abs(cq) ** 2).sum(-1), 1.0)
    eta = np.where(batch.sel, opts.eta0, 0.0)
    c_anchor = cq

    utility, comm_sum, radar_sum = _utility(batch, a, b, cq, cfg)
    best = P2Result(w.copy(), utility.copy(), comm_sum.copy(),
                    radar_sum.copy())
    obj_prev = np.full(c, np.nan)   # NaN compares False: never stop at t=1
    prox_state = None   # (w_prev, f_tilde_prev, d_dot_prev)
    gram = (np.einsum("clk,clm->ckm", batch.g_hat.conj(), batch.g_hat)
            if opts.w_update_mode == "prox-linear" else None)

    def block_value(a_, b_, alpha_, beta_, mu_, cq_):
        s_ = np.sqrt(batch.w_kn * (1.0 + alpha_))
        val = _f_comm(a_, b_, batch.w_kn, alpha_, beta_, s_) - _f_radar(
            batch, mu_, cfg)
        if batch.sel.shape[1]:
            slack_ = sca_lower_bound(cq_, c_anchor) - mu_
            val = val + np.where(batch.sel, eta * slack_, 0.0).sum(-1)
        return val

    for t in range(1, opts.max_iters + 1):
        trace = ([block_value(a, b, alpha, beta, mu, cq)]
                 if opts.trace_blocks else None)

        beta = update_beta(a, b, batch.w_kn, alpha)
        if opts.trace_blocks:
            trace.append(block_value(a, b, alpha, beta, mu, cq))
        alpha = update_alpha(a, beta, batch.w_kn)
        s_coeff = np.sqrt(batch.w_kn * (1.0 + alpha))
        if opts.trace_blocks:
            trace.append(block_value(a, b, alpha, beta, mu, cq))

        if has_radar:
            eta_eff = np.where(batch.sel & (eta >= _ETA_FLOOR),
                               eta / batch.w_radar, 1e6)
            mu_new = _mu_root(batch.psi, batch.lam, eta_eff, cfg, warm=mu)
            mu_new = np.where(eta < _ETA_FLOOR, mu_bound(cfg), mu_new)
            mu = np.where(batch.sel, mu_new, 1.0)
        if opts.trace_blocks:
            trace.append(block_value(a, b, alpha, beta, mu, cq))

        eta_m = np.where(batch.sel, eta, 0.0)
        if opts.w_update_mode == "lagrangian":
            w_new, _, degenerate = update_w_lagrangian(
                batch, beta, s_coeff, eta_m, c_anchor, p_tx)
            if degenerate.any():
                w_new = np.where(degenerate[:, None, None], w, w_new)
        else:
            f_tilde = _spectral_curvature(gram, beta)
            if prox_state is None:
                extra = np.zeros(c)
                d_dot = np.ones(c)
                w_prev = w
            else:
                w_prev, f_prev, d_prev = prox_state
                d_dot = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * d_prev ** 2))
                with np.errstate(divide="ignore", invalid="ignore"):
                    ratio = np.where(f_tilde > 0,
                                     np.sqrt(f_prev / np.maximum(f_tilde, 1e-300)),
                                     0.0)
                extra = np.clip(np.minimum((d_dot - 1.0) / d_prev,
                                           0.9999 * ratio), 0.0, None)
            w_new = update_w_proxlinear(batch, beta, s_coeff, eta_m, c_anchor,
                                        w, w_prev, extra, f_tilde, p_tx)
            prox_state = (w, f_tilde, d_dot)

        power = (np.abs(w_new) ** 2).sum((-2, -1))
        if np.any(power > p_tx + _POWER_SLACK):
            raise RuntimeError(
                f"power constraint violated: {power.max()} > {p_tx}")

        z = _cross_gains(batch.g_hat, w_new)
        a, b = _signal_terms(z, batch.sigma_eff)
        cq = _steer_gains(batch.v_steer, w_new)
        if opts.trace_blocks:
            trace.append(block_value(a, b, alpha, beta, mu, cq))
            best.block_trace.append(np.stack(trace))

        if has_radar:
            slack = sca_lower_bound(cq, c_anchor) - mu
            eta = np.where(batch.sel, update_eta(eta, slack, cfg.delta_s, t),
                           0.0)
        c_anchor = cq
        w = w_new

        utility, comm_sum, radar_sum = _utility(batch, a, b, cq, cfg)
        better = utility > best.utility
        if better.any():
            best.w[better] = w[better]
            best.utility[better] = utility[better]
            best.comm_sum[better] = comm_sum[better]
            best.radar_sum[better] = radar_sum[better]

        obj = (_f_comm(a, b, batch.w_kn, alpha, beta, s_coeff)
               - _f_radar(batch, mu, cfg))
        best.iters = t
        if np.all(np.abs(obj - obj_prev)
                  <= opts.tol * np.maximum(1.0, np.abs(obj_prev))):
            break
        obj_prev = obj
    return best


def solve_p2(comm_evals, radar_evals, m1: int, cfg: SystemConfig,
             opts: SolverOptions | None = None):
    """Solve a single candidate instance; returns (w, utility, result)."""
    batch = build_batch([(comm_evals, radar_evals, m1)], cfg)
    res = solve_p2_batch(batch, cfg, opts)
    return res.w[0], float(res.utility[0]), res
