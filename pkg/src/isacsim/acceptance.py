"""Acceptance suite: the numbered properties and scaled experiment trends
this package commits to.

Each criterion is a callable returning (passed, detail).  The static suite
checks identities, gradients, solver behavior, and tracking consistency;
the learning suite runs the full desk-scale experiment bundle and checks
the qualitative trends.  Run from the CLI (`isacsim accept --suite all`)
or through the test suite.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import radar as radar_mod
from .baselines import exhaustive_decision
from .beamforming import (SolverOptions, _f_comm, _mu_root, build_batch,
                          evaluate_batch, mrt_beamformer, mu_bound, solve_p2,
                          solve_p2_batch, update_alpha, update_beta,
                          w_block_gradient, w_block_value, _cross_gains,
                          _signal_terms, _steer_gains)
from .comm import update_csi
from .config import (CommUserParams, RadarTargetParams, SystemConfig,
                     build_scenario, initial_gain, make_config)
from .drol import (DrolLearner, DrolOptions, order_preserving_quantize,
                   run_frame)
from .harness import RunOptions, moving_average, run_experiment
from .mlp import Mlp, bce_loss_and_grad
from .world import advance, init_world, make_context, restore, snapshot


@dataclass
class CriterionResult:
    cid: int
    name: str
    passed: bool
    detail: str
    seconds: float


# ---------------------------------------------------------------- helpers

def _desk_instances(n, seed, force_radar_updates=True):
    """n single-candidate problem instances drawn from an evolving desk
    world driven by random decisions."""
    cfg = make_config("desk")
    users, targets = build_scenario(cfg, "desk")
    world = init_world(cfg, users, targets, seed)
    rng = np.random.default_rng(seed + 1)
    out = []
    for i in range(n):
        ctx = make_context(world)
        bits_c = rng.integers(0, 2, len(users))
        bits_r = rng.integers(0, 2, len(targets))
        if force_radar_updates and i % 2 == 0 and bits_r.sum() == 0:
            bits_r[rng.integers(len(targets))] = 1
        out.append((cfg, ctx, bits_c, bits_r))
        w = mrt_beamformer(np.stack(ctx.g_eval, axis=-1), cfg.p_tx)
        advance(world, ctx, bits_c, bits_r, w)
    return out


def _quantize_levels(lvl, lvl_t, dist_rank):
    """Vectorized twin of order_preserving_quantize on integer grid levels.

    lvl is (rows, d), lvl_t its transposed copy; candidates come back in
    the transposed (d, rows) layout.  dist_rank maps a level to the rank of
    its float distance from one half, so the stable argsort reproduces the
    implementation's pivot order exactly; level comparisons reproduce the
    float comparisons because the grid is strictly increasing.  The pivot
    rule collapses to one comparison: (lvl > p) or (lvl == p and p <= half)
    is lvl >= p for p <= half and lvl >= p + 1 above.
    """
    d = lvl.shape[1]
    half = np.int8(10)
    cands = [lvl_t >= half]
    order = np.argsort(dist_rank[lvl], axis=1, kind="stable")
    by_dist = np.take_along_axis(lvl, order, axis=1)
    for i in range(1, d + 1):
        pivot = by_dist[:, i - 1]
        cands.append(lvl_t >= pivot + (pivot > half))
    return cands


# ---------------------------------------------------------------- criteria

def _c1_variance_fixed_point():
    cfg = make_config("desk")
    cases = [(0.99, 1e-12, 5e-13), (0.9, 2.0, 3.0), (0.8, 1.0, 0.2),
             (0.5, 4.0, 4.0)]
    g = np.zeros(4, dtype=complex)
    for rho, beta_bar, vs0 in cases:
        u = CommUserParams(rho=rho, beta_bar=beta_bar, p_ul=1.0, sigma=1.0,
                           delta_ul=1.0, varsigma0=vs0)
        vs = vs0
        g_hat = g.copy()
        slack = 1e-13 * max(beta_bar, abs(vs0))
        for n in range(1, 301):
            g_hat, vs = update_csi(g, g_hat, vs, False, u, cfg, g)
            bound = rho ** (2 * n) * abs(vs0 - beta_bar)
            if abs(vs - beta_bar) > bound * (1 + 1e-12) + slack:
                return False, (f"variance left the contraction envelope at "
                               f"step {n} (rho={rho})")
    return True, (f"geometric contraction to the stationary power holds over "
                  f"{len(cases)} cases x 300 steps")


def _c2_finite_differences():
    cfg = make_config("desk")
    rng = np.random.default_rng(42)
    mt = cfg.frame_duration

    worst_j = 0.0
    for _ in range(1000):
        x = np.array([rng.uniform(-1.2, 1.2), rng.uniform(50, 500),
                      rng.uniform(-50, 50)])
        tb = rng.uniform(-math.pi, math.pi)
        jac = radar_mod.gamma_jacobian(x, tb, mt)
        fd = np.empty((3, 3))
        for i in range(3):
            e = np.zeros(3)
            e[i] = 1e-6 * max(1.0, abs(x[i]))
            fd[:, i] = (radar_mod.gamma_transition(x + e, tb, mt)
                        - radar_mod.gamma_transition(x - e, tb, mt)) / (2 * e[i])
        worst_j = max(worst_j,
                      np.linalg.norm(fd - jac) / np.linalg.norm(jac))
    if worst_j >= 1e-5:
        return False, f"state-transition jacobian off by {worst_j:.2e}"

    worst_m = 0.0
    net_rng = np.random.default_rng(43)
    for _ in range(1000):
        net = Mlp((4, 5, 3, 2), net_rng)
        x = net_rng.standard_normal((3, 4))
        y = (net_rng.random((3, 2)) < 0.5).astype(float)
        _, grads = bce_loss_and_grad(net, x, y)
        num, den = 0.0, 0.0
        for li, (w, b) in enumerate(net.layers):
            for arr, g_arr in ((w, grads[li][0]), (b, grads[li][1])):
                flat = arr.ravel()
                g_flat = g_arr.ravel()
                fd = np.empty_like(g_flat)
                for i in range(flat.size):
                    orig = flat[i]
                    flat[i] = orig + 1e-6
                    lp = bce_loss_and_grad(net, x, y)[0]
                    flat[i] = orig - 1e-6
                    lm = bce_loss_and_grad(net, x, y)[0]
                    flat[i] = orig
                    fd[i] = (lp - lm) / 2e-6
                num += float(((fd - g_flat) ** 2).sum())
                den += float((g_flat ** 2).sum())
        worst_m = max(worst_m, math.sqrt(num / max(den, 1e-300)))
    if worst_m >= 1e-4:
        return False, f"network gradient off by {worst_m:.2e}"

    (cfg, ctx, _, _), = _desk_instances(1, 7)
    rng = np.random.default_rng(44)
    lanes = []
    for _ in range(1000):
        bits_c = rng.integers(0, 2, 3)
        bits_r = rng.integers(0, 2, 2)
        lanes.append(ctx.candidate(bits_c, bits_r))
    batch = build_batch(lanes, cfg)
    c, l_tx, k = batch.g_hat.shape
    w = mrt_beamformer(batch.g_hat, cfg.p_tx)
    w = w * (0.8 + 0.4 * rng.random((c, 1, 1)))
    z = _cross_gains(batch.g_hat, w)
    a, b = _signal_terms(z, batch.sigma_eff)
    sig = np.abs(a) ** 2
    alpha = sig / (b - sig)
    beta = update_beta(a, b, batch.w_kn, alpha)
    s_coeff = np.sqrt(batch.w_kn * (1.0 + alpha))
    eta_m = np.where(batch.sel, rng.uniform(0, 0.02, batch.sel.shape), 0.0)
    anchor = _steer_gains(batch.v_steer, w * (1 + 0.05 * rng.standard_normal()))
    grad = w_block_gradient(batch, beta, s_coeff, eta_m, anchor, w)
    fd = np.zeros_like(grad)
    eps = 1e-6
    for li in range(l_tx):
        for ki in range(k):
            for part in (1.0, 1.0j):
                dw = np.zeros_like(w)
                dw[:, li, ki] = eps * part
                vp = w_block_value(batch, beta, s_coeff, eta_m, anchor, w + dw)
                vm = w_block_value(batch, beta, s_coeff, eta_m, anchor, w - dw)
                comp = (vp - vm) / (2 * eps)
                fd[:, li, ki] += part * comp
    rel = (np.linalg.norm((fd - grad).reshape(c, -1), axis=1)
           / np.linalg.norm(grad.reshape(c, -1), axis=1))
    worst_w = float(rel.max())
    if worst_w >= 1e-5:
        return False, f"beam-block gradient off by {worst_w:.2e}"
    return True, (f"worst rel err: jacobian {worst_j:.1e}, "
                  f"network {worst_m:.1e}, beam block {worst_w:.1e}")


def _c3_eigen_identity():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(1000):
        a_mat = rng.standard_normal((3, 3))
        m_pred = a_mat @ a_mat.T + 0.1 * np.eye(3)
        coeff = radar_mod.CrbCoefficients(*np.exp(rng.normal(0, 1, 3)))
        gain = float(np.exp(rng.normal(0, 2)))
        terms = radar_mod.eigen_error_terms(m_pred, coeff, (1.0, 1.0, 1.0))
        lhs = (terms.c_mat * (1.0 / (terms.lam + gain))) @ terms.c_mat.T
        rhs = np.linalg.inv(np.linalg.inv(m_pred)
                            + gain * np.diag(1.0 / coeff.as_array()))
        worst = max(worst, np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs))
    passed = worst < 1e-10
    return passed, f"worst relative Frobenius gap {worst:.2e} over 1000"


def _c4_quantizer_grid():
    grid = np.round(np.arange(21) * 0.05, 10)
    dist = np.abs(grid - 0.5)
    # equal float distances must share a rank so the stable argsort breaks
    # the tie by position, exactly like sorting the float distances
    dist_rank = np.searchsorted(np.unique(dist), dist).astype(np.int8)
    rng = np.random.default_rng(11)
    total = 0
    for d in range(1, 7):
        n = 21 ** d
        chunk = 2_000_000
        for lo in range(0, n, chunk):
            m = min(lo + chunk, n) - lo
            rem = np.arange(lo, lo + m, dtype=np.int32)
            lvl_t = np.empty((d, m), dtype=np.int8)
            for col in range(d):
                rem, r = np.divmod(rem, 21)
                lvl_t[col] = r
            lvl = np.ascontiguousarray(lvl_t.T)
            cands = _quantize_levels(lvl, lvl_t, dist_rank)
            if not np.array_equal(cands[0], lvl_t >= 10):
                return False, f"first candidate not the half threshold (d={d})"
            low = lvl_t - np.int8(32)
            for bits in cands:
                # on-entries shifted 32 below any off-entry: some off-level
                # >= some on-level exactly when max - min >= 32
                arr = np.where(bits, low, lvl_t)
                if (arr.max(axis=0) - arr.min(axis=0) >= 32).any():
                    return False, f"order violation at d={d}"
            # tie the level twin to the real implementation
            if d <= 3:
                rows = np.arange(m)
            else:
                rows = rng.choice(m, min(200, m), replace=False)
            want = np.stack([c[:, rows].T for c in cands], axis=1)
            for j, row in enumerate(rows):
                got = order_preserving_quantize(grid[lvl[row]], d + 1)
                if not np.array_equal(got.astype(bool), want[j]):
                    return False, f"level twin diverges at d={d}"
            total += m
    return True, f"{total} grid vectors, all candidates order-preserving"


def _c5_block_ascent():
    instances = _desk_instances(100, 21)
    opts = SolverOptions(trace_blocks=True, max_iters=60)
    worst_drop = 0.0
    worst_qt = 0.0
    rng = np.random.default_rng(22)
    for cfg, ctx, bits_c, bits_r in instances:
        batch = build_batch([ctx.candidate(bits_c, bits_r)], cfg)
        res = solve_p2_batch(batch, cfg, opts)
        trace = np.stack(res.block_trace)        # (iters, 5, 1)
        diffs = np.diff(trace, axis=1)
        floor = -1e-9 * np.maximum(1.0, np.abs(trace[:, :-1]))
        if (diffs < floor).any():
            worst_drop = min(worst_drop, float(diffs.min()))
        # quadratic-transform recovery at a random feasible beam matrix
        w = mrt_beamformer(batch.g_hat, cfg.p_tx) * rng.uniform(0.5, 1.0)
        z = _cross_gains(batch.g_hat, w)
        a, b = _signal_terms(z, batch.sigma_eff)
        sig = np.abs(a) ** 2
        sinr = sig / (b - sig)
        alpha = sinr
        beta = update_beta(a, b, batch.w_kn, alpha)
        s_coeff = np.sqrt(batch.w_kn * (1.0 + alpha))
        f_tilde = float(_f_comm(a, b, batch.w_kn, alpha, beta, s_coeff)[0])
        f_direct = float((batch.w_kn * np.log1p(sinr)).sum())
        worst_qt = max(worst_qt,
                       abs(f_tilde - f_direct) / max(1.0, abs(f_direct)))
    if worst_drop < 0.0:
        return False, f"a block update decreased the objective by {-worst_drop:.2e}"
    if worst_qt >= 1e-8:
        return False, f"quadratic transform off by {worst_qt:.2e}"
    return True, (f"no block decrease beyond tolerance in 100 instances; "
                  f"transform gap {worst_qt:.1e}")


def _c6_mu_root():
    cfg = make_config("desk")
    rng = np.random.default_rng(33)
    psi = np.exp(rng.normal(0, 1, (1000, 3)))
    lam = np.exp(rng.normal(0, 1, (1000, 3)))
    eta_eff = np.exp(rng.uniform(math.log(0.5), math.log(20.0), 1000))
    mu = _mu_root(psi, lam, eta_eff, cfg)
    cap = mu_bound(cfg)
    if (mu > 0.99 * cap).any():
        return False, "an instance landed on the domain cap"

    c_lin = (1.0 - cfg.omega_bar) * cfg.xi_b / math.log(10.0)

    def residual(m):
        return ((cfg.omega_bar * psi / (m[:, None] + lam) ** 2).sum(1)
                + c_lin / m - eta_eff)

    res = np.abs(residual(mu))
    worst_res = float(res.max())
    lo = np.full(1000, 1e-12)
    hi = np.full(1000, 100.0)
    if (residual(hi) > 0).any():
        return False, "bisection bracket failed"
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        pos = residual(mid) > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    mu_bis = 0.5 * (lo + hi)
    worst_gap = float((np.abs(mu - mu_bis) / mu_bis).max())
    passed = worst_res < 1e-8 and worst_gap < 1e-6
    return passed, (f"max residual {worst_res:.2e}, "
                    f"max gap to bisection {worst_gap:.2e}")


def _c7_power_feasibility():
    instances = _desk_instances(40, 55)
    worst = -np.inf
    for mode in ("lagrangian", "prox-linear"):
        opts = SolverOptions(w_update_mode=mode)
        for cfg, ctx, bits_c, bits_r in instances[:20]:
            ce, re_, m1 = ctx.candidate(bits_c, bits_r)
            w, _, _ = solve_p2(ce, re_, m1, cfg, opts)
            worst = max(worst, float((np.abs(w) ** 2).sum()) - cfg.p_tx)
    passed = worst <= 1e-9
    return passed, (f"max budget overshoot {worst:.2e} across both beam "
                    "block modes (also asserted inside every iteration)")


def _c8_solver_vs_mrt():
    instances = _desk_instances(100, 77)
    gains = []
    for cfg, ctx, bits_c, bits_r in instances:
        batch = build_batch([ctx.candidate(bits_c, bits_r)], cfg)
        res = solve_p2_batch(batch, cfg)
        w_mrt = mrt_beamformer(batch.g_hat, cfg.p_tx)
        u_mrt = float(evaluate_batch(batch, w_mrt, cfg)[0][0])
        u_opt = float(res.utility[0])
        if u_opt < u_mrt - 1e-12 * max(1.0, abs(u_mrt)):
            return False, f"solver fell below matched beams: {u_opt} < {u_mrt}"
        gains.append(u_opt - u_mrt)
    return True, (f"solver never below matched beams; mean gain "
                  f"{np.mean(gains):.3g}, max {np.max(gains):.3g}")


def _c9_tiny_instance_optimality():
    cfg = make_config("desk")
    users, targets = build_scenario(cfg, "desk")
    users = users[:2]
    world = init_world(cfg, users, targets, 123)
    opts = DrolOptions(forced_exhaustive=True, practical=False)
    learner = DrolLearner(cfg, len(users), len(targets), world.rngs, opts)
    mismatches = 0
    for _ in range(200):
        # both policies must see the same synthesized pilot returns
        snap = snapshot(world)
        ctx = make_context(world)
        choice = exhaustive_decision(ctx, cfg, opts.solver)
        restore(world, snap)
        rec = run_frame(world, learner)
        if (not np.array_equal(rec.a_c, choice.a_c)
                or not np.array_equal(rec.a_r, choice.a_r)
                or abs(rec.u_genie - choice.utility) > 0):
            mismatches += 1
    passed = mismatches == 0
    return passed, f"{200 - mismatches}/200 frames matched the exhaustive pick"


_BUNDLE_SEEDS = (11, 17, 23)


@lru_cache(maxsize=1)
def _learning_bundle():
    """Shared desk-scale runs: learned policy against the exhaustive one,
    three seeds, re-aligned every 1000 frames."""
    runs = {}
    for seed in _BUNDLE_SEEDS:
        opts = RunOptions(preset="desk", seed=seed, n_frames=3000,
                          policies=("drol", "exhaustive"),
                          resync_interval=1000, output_dir=None)
        runs[seed] = run_experiment(opts)
    return runs


def _c10_utility_ratio():
    runs = _learning_bundle()
    mins = []
    for seed in _BUNDLE_SEEDS:
        u_d = np.array([r.u_genie for r in runs[seed]["drol"]])
        u_e = np.array([r.u_genie for r in runs[seed]["exhaustive"]])
        # each curve is smoothed before comparing, the way the utility
        # figures are drawn; a pointwise ratio blows up whenever a single
        # frame's reference utility crosses zero
        ratio = moving_average(u_d, 300) / moving_average(u_e, 300)
        mins.append(float(ratio[1999:].min()))
    med = float(np.median(mins))
    passed = med >= 0.85
    return passed, (f"median post-2000 worst ratio {med:.3f} "
                    f"(per seed: {[f'{m:.3f}' for m in mins]})")


def _c11_comm_frequency_trend():
    runs = _learning_bundle()
    freqs = []
    for seed in _BUNDLE_SEEDS:
        bits = np.stack([r.a_c for r in runs[seed]["drol"]])
        freqs.append(bits[-1000:].mean(axis=0))
    med = np.median(np.stack(freqs), axis=0)
    passed = bool(med[2] > med[1] > med[0])
    return passed, ("median last-1000 estimation frequency by falling "
                    f"correlation: {med.round(3).tolist()}")


def _c12_radar_frequency_trend():
    runs = _learning_bundle()
    freqs = []
    for seed in _BUNDLE_SEEDS:
        bits = np.stack([r.a_r for r in runs[seed]["drol"]])
        freqs.append(bits[-1000:].mean(axis=0))
    med = np.median(np.stack(freqs), axis=0)
    passed = bool(med[1] > med[0])
    return passed, ("median last-1000 radar estimation frequency "
                    f"(low, high process noise): {med.round(3).tolist()}")


def _c13_tracking_consistency():
    cfg = make_config("desk")
    mt = cfg.frame_duration
    rho_t = 1.0
    eps_v = 0.5 * rho_t * mt
    sigma_eps = (1e-4 * rho_t * mt, 0.5 * rho_t * eps_v, eps_v)
    x0 = np.array([math.pi / 4, 150.0, 30.0])
    theta_bar = x0[0] - math.pi
    params = RadarTargetParams(x0=tuple(x0), theta_bar=theta_bar,
                               sigma_eps=sigma_eps)
    gain = initial_gain(cfg, 1)
    coeff0 = radar_mod.crb_coefficients(x0, theta_bar, 1.0, cfg, cfg.m_slots)
    m0 = np.diag(coeff0.as_array() / gain)
    n_frames, n_tracks = 50, 2000

    # reference bound along the noise-free nominal trajectory
    x_bar = x0.copy()
    p_mat = m0.copy()
    for _ in range(n_frames):
        jac = radar_mod.gamma_jacobian(x_bar, theta_bar, mt)
        p_pred = np.diag(sigma_eps) + jac @ p_mat @ jac.T
        x_bar = radar_mod.gamma_transition(x_bar, theta_bar, mt)
        coeff = radar_mod.crb_coefficients(x_bar, theta_bar, 1.0, cfg,
                                           cfg.m_slots)
        p_mat = np.linalg.inv(np.linalg.inv(p_pred)
                              + gain * np.diag(1.0 / coeff.as_array()))
    bound = np.diag(p_mat)

    rng = np.random.default_rng(99)
    sq_err = np.zeros(3)
    for _ in range(n_tracks):
        x_true = x0.copy()
        x_hat = x0 + np.sqrt(np.diag(m0)) * rng.standard_normal(3)
        track = radar_mod.TrackState(x_hat, m0.copy())
        for _ in range(n_frames):
            x_true = radar_mod.evolve_true_state(x_true, params, cfg,
                                                 rng.standard_normal(3))
            x_pred, m_pred = radar_mod.predict_track(track, params, cfg)
            coeff = radar_mod.crb_coefficients(x_pred, theta_bar, 1.0, cfg,
                                               cfg.m_slots)
            meas = radar_mod.synthesize_measurement(x_true, coeff, gain,
                                                    rng.standard_normal(3))
            track = radar_mod.ekf_update(x_pred, m_pred, meas, coeff, gain)
        sq_err += (track.x_hat - x_true) ** 2
    mse = sq_err / n_tracks
    ratio = mse / bound
    passed = bool(np.all(ratio >= 0.8) and np.all(ratio <= 5.0))
    return passed, f"MSE/bound per component {ratio.round(3).tolist()}"


def _c14_w_mode_agreement():
    instances = _desk_instances(50, 88)
    pairs = []
    for cfg, ctx, bits_c, bits_r in instances:
        ce, re_, m1 = ctx.candidate(bits_c, bits_r)
        u = {}
        for mode in ("lagrangian", "prox-linear"):
            opts = SolverOptions(w_update_mode=mode, max_iters=200, tol=1e-7)
            _, u[mode], _ = solve_p2(ce, re_, m1, cfg, opts)
        pairs.append((u["lagrangian"], u["prox-linear"]))
    # an objective near zero makes its own ratio meaningless, so gaps are
    # measured against the typical objective magnitude of the batch
    scale = float(np.median([abs(ul) for ul, _ in pairs]))
    worst = max(abs(ul - up) / max(abs(ul), scale) for ul, up in pairs)
    passed = worst <= 0.01
    return passed, f"max relative objective gap {worst:.4f} over 50"


CRITERIA = (
    (1, "csi error variance fixed point", "static", _c1_variance_fixed_point),
    (2, "finite-difference gradient checks", "static", _c2_finite_differences),
    (3, "posterior covariance eigen identity", "static", _c3_eigen_identity),
    (4, "quantizer order preservation on the grid", "static",
     _c4_quantizer_grid),
    (5, "solver block ascent and transform recovery", "static",
     _c5_block_ascent),
    (6, "gain epigraph root accuracy", "static", _c6_mu_root),
    (7, "transmit power feasibility", "static", _c7_power_feasibility),
    (8, "solver dominates matched beams", "static", _c8_solver_vs_mrt),
    (9, "tiny-instance critic optimality", "static",
     _c9_tiny_instance_optimality),
    (10, "learned utility tracks the exhaustive policy", "learning",
     _c10_utility_ratio),
    (11, "estimation frequency rises as correlation falls", "learning",
     _c11_comm_frequency_trend),
    (12, "radar estimation frequency rises with process noise", "learning",
     _c12_radar_frequency_trend),
    (13, "tracking error matches the posterior bound", "static",
     _c13_tracking_consistency),
    (14, "beam block modes agree", "static", _c14_w_mode_agreement),
)


def run_criterion(cid: int) -> CriterionResult:
    for num, name, _suite, fn in CRITERIA:
        if num == cid:
            t0 = time.perf_counter()
            passed, detail = fn()
            return CriterionResult(cid, name, passed, detail,
                                   time.perf_counter() - t0)
    raise ValueError(f"no criterion {cid}")


def run_suite(suite: str = "all"):
    if suite not in ("static", "learning", "all"):
        raise ValueError(f"unknown suite {suite!r}")
    out = []
    for num, _name, kind, _fn in CRITERIA:
        if suite == "all" or kind == suite:
            out.append(run_criterion(num))
    return out
