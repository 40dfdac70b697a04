"""Batch construction, block maximizers and the alternating solver."""

import math

import numpy as np
import pytest

from isacsim import (CommEval, RadarEval, SolverOptions, build_batch,
                     evaluate_batch, evaluate_utility, make_config,
                     mrt_beamformer, solve_p2, solve_p2_batch)
from isacsim.beamforming import (_cross_gains, _f_comm, _mu_root,
                                 _signal_terms, mu_bound, sca_lower_bound,
                                 update_alpha, update_beta, update_eta,
                                 update_mu, w_block_gradient, w_block_value)
from isacsim.config import complex_normal
from isacsim.world import make_context

from conftest import small_world

_BITS = (((0, 0), (0,)), ((1, 0), (0,)), ((1, 1), (1,)), ((0, 1), (1,)))


def _context_batch(seed=0, bits=_BITS):
    cfg, world = small_world(seed, k=2, q=1)
    ctx = make_context(world)
    triples = [ctx.candidate(np.array(bc), np.array(br)) for bc, br in bits]
    return cfg, ctx, triples, build_batch(triples, cfg)


def test_mrt_beamformer_splits_power_evenly():
    rng = np.random.default_rng(0)
    g = complex_normal(rng, 1.0, (8, 3))
    w = mrt_beamformer(g, 2.4)
    powers = (np.abs(w) ** 2).sum(axis=0)
    assert np.allclose(powers, 0.8, rtol=1e-12)
    # each beam is aligned with its own channel
    for k in range(3):
        gain = abs(g[:, k].conj() @ w[:, k])
        assert math.isclose(gain, math.sqrt(0.8) * np.linalg.norm(g[:, k]),
                            rel_tol=1e-12)


def test_build_batch_fields():
    cfg, ctx, triples, batch = _context_batch()
    c = len(triples)
    assert batch.shape == (c, cfg.l_tx, 2)
    for i, (comm, radar, m1) in enumerate(triples):
        overhead = (cfg.m_slots - m1) / cfg.m_slots
        for k, e in enumerate(comm):
            assert np.allclose(batch.g_hat[i, :, k], e.g_hat)
            assert math.isclose(batch.sigma_eff[i, k],
                                e.varsigma * cfg.p_tx + e.sigma)
            assert math.isclose(batch.w_kn[i, k], e.w_rate * overhead)
        r = radar[0]
        assert batch.sel[i, 0] == r.update
        if r.update:
            cost = (1.0 - cfg.omega_bar) * (
                cfg.xi_a + cfg.xi_b
                * math.log10(cfg.xi_c * cfg.p_tx + cfg.sigma_radar))
            assert math.isclose(batch.const[i], r.w_track * cost)
        else:
            assert math.isclose(batch.const[i],
                                r.w_track * cfg.omega_bar
                                * r.terms.psi_tilde)
    assert np.allclose(np.linalg.norm(batch.v_steer, axis=0), 1.0)


def test_build_batch_rejects_bad_candidates():
    cfg, ctx, triples, _ = _context_batch()
    with pytest.raises(ValueError):
        build_batch([], cfg)
    comm, radar, _ = triples[1]
    with pytest.raises(ValueError):
        build_batch([(comm, radar, -1)], cfg)
    skewed = [RadarEval(r.update, r.theta + 0.1, r.terms, r.w_track)
              for r in radar]
    with pytest.raises(ValueError):
        build_batch([triples[1], (comm, skewed, 0)], cfg)


def test_signal_terms():
    g = np.array([[1.0 + 0j, 0.0], [0.0, 2.0 + 0j]])
    w = np.array([[3.0 + 0j, 1.0], [0.0, 1.0 + 1j]])
    z = _cross_gains(g, w)
    assert np.allclose(z, [[3.0, 1.0], [0.0, 2.0 + 2j]])
    a, b = _signal_terms(z, np.array([0.5, 0.25]))
    assert np.allclose(a, [3.0, 2.0 + 2j])
    assert np.allclose(b, [9.0 + 1.0 + 0.5, 8.0 + 0.25])


def _random_fp_point(rng, n=6):
    a = (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    b = np.abs(a) ** 2 + np.exp(rng.normal(0, 1, n))
    w_kn = np.exp(rng.normal(-1, 0.5, n))
    return a, b, w_kn


def test_update_beta_is_the_block_maximizer():
    rng = np.random.default_rng(1)
    for _ in range(50):
        a, b, w_kn = _random_fp_point(rng)
        alpha = np.exp(rng.normal(0, 1, a.size))
        s_coeff = np.sqrt(w_kn * (1.0 + alpha))
        beta = update_beta(a, b, w_kn, alpha)
        assert np.allclose(beta, s_coeff * a / b)
        base = _f_comm(a[None], b[None], w_kn[None], alpha[None],
                       beta[None], s_coeff[None])
        for _ in range(10):
            delta = 0.1 * (rng.standard_normal(a.size)
                           + 1j * rng.standard_normal(a.size))
            moved = _f_comm(a[None], b[None], w_kn[None], alpha[None],
                            (beta + delta)[None], s_coeff[None])
            assert moved <= base + 1e-12


def test_update_alpha_is_the_block_maximizer():
    rng = np.random.default_rng(2)

    def f_of_alpha(a, b, w_kn, beta, alpha):
        s = np.sqrt(w_kn * (1.0 + alpha))
        return _f_comm(a[None], b[None], w_kn[None], alpha[None],
                       beta[None], s[None])

    for _ in range(50):
        a, b, w_kn = _random_fp_point(rng)
        beta = update_beta(a, b, w_kn, np.exp(rng.normal(0, 1, a.size)))
        alpha = update_alpha(a, beta, w_kn)
        assert np.all(alpha >= 0)
        base = f_of_alpha(a, b, w_kn, beta, alpha)
        for step in (1e-3, 1e-1, 1.0):
            up = f_of_alpha(a, b, w_kn, beta, alpha + step)
            down = f_of_alpha(a, b, w_kn, beta,
                              np.maximum(alpha - step, 0.0))
            assert up <= base + 1e-10
            assert down <= base + 1e-10


def test_aligned_transform_recovers_weighted_rates():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a, b, w_kn = _random_fp_point(rng)
        sinr = np.abs(a) ** 2 / (b - np.abs(a) ** 2)
        beta = update_beta(a, b, w_kn, sinr)
        s_coeff = np.sqrt(w_kn * (1.0 + sinr))
        f_tilde = _f_comm(a[None], b[None], w_kn[None], sinr[None],
                          beta[None], s_coeff[None])[0]
        want = float((w_kn * np.log1p(sinr)).sum())
        assert math.isclose(f_tilde, want, rel_tol=1e-10)


def test_mu_root_and_update_mu():
    cfg = make_config("desk")
    rng = np.random.default_rng(4)
    psi = np.exp(rng.normal(0, 1, (200, 3)))
    lam = np.exp(rng.normal(0, 1, (200, 3)))
    eta_eff = np.exp(rng.uniform(math.log(0.5), math.log(20.0), 200))
    mu = _mu_root(psi, lam, eta_eff, cfg)
    c_lin = (1.0 - cfg.omega_bar) * cfg.xi_b / math.log(10.0)
    res = ((cfg.omega_bar * psi / (mu[:, None] + lam) ** 2).sum(1)
           + c_lin / mu - eta_eff)
    assert np.max(np.abs(res)) < 1e-8
    # a warm start on the wrong side must not change the root
    mu_warm = _mu_root(psi, lam, eta_eff, cfg, warm=10.0 * mu)
    assert np.allclose(mu, mu_warm, rtol=1e-10)
    # stiffer multipliers pull the root down
    mu_hi = _mu_root(psi, lam, 2.0 * eta_eff, cfg)
    assert np.all(mu_hi < mu)
    # the scalar wrapper folds in the target weight
    one = update_mu(psi[0], lam[0], eta_eff[0] * 2.0, 2.0, cfg)
    assert math.isclose(one, mu[0], rel_tol=1e-10)
    assert update_mu(psi[0], lam[0], 1e-15, 2.0, cfg) == mu_bound(cfg)


def test_mu_bound_value():
    cfg = make_config("desk")
    assert math.isclose(mu_bound(cfg),
                        10.0 * (cfg.xi_c * cfg.p_tx + cfg.sigma_radar))


def test_update_eta():
    eta = np.array([0.1, 0.1, 1e-4])
    slack = np.array([1.0, -1.0, 1.0])
    got = update_eta(eta, slack, 0.005, 4)
    assert np.allclose(got, [0.1 - 0.0025, 0.1 + 0.0025, 0.0])


def test_sca_lower_bound_is_a_tight_minorant():
    rng = np.random.default_rng(5)
    for _ in range(100):
        c_new = complex_normal(rng, 1.0, 4)
        c_anchor = complex_normal(rng, 1.0, 4)
        bound = sca_lower_bound(c_new, c_anchor)
        true = (np.abs(c_new) ** 2).sum()
        assert bound <= true + 1e-12
        tight = sca_lower_bound(c_anchor, c_anchor)
        assert math.isclose(tight, (np.abs(c_anchor) ** 2).sum(),
                            rel_tol=1e-12)


def test_w_block_gradient_matches_directional_derivatives():
    cfg, ctx, triples, batch = _context_batch(seed=6)
    rng = np.random.default_rng(6)
    c, l, k = batch.shape
    q = batch.sel.shape[1]
    w = mrt_beamformer(batch.g_hat, cfg.p_tx) * rng.uniform(0.6, 1.0, (c, 1, 1))
    beta = (rng.standard_normal((c, k)) + 1j * rng.standard_normal((c, k)))
    s_coeff = np.sqrt(batch.w_kn * 1.7)
    eta_m = rng.uniform(0.0, 0.02, (c, q)) * batch.sel
    c_anchor = rng.standard_normal((c, q, k)) + 1j * rng.standard_normal((c, q, k))
    grad = w_block_gradient(batch, beta, s_coeff, eta_m, c_anchor, w)
    for _ in range(20):
        d = (rng.standard_normal(w.shape) + 1j * rng.standard_normal(w.shape))
        eps = 1e-6
        hi = w_block_value(batch, beta, s_coeff, eta_m, c_anchor, w + eps * d)
        lo = w_block_value(batch, beta, s_coeff, eta_m, c_anchor, w - eps * d)
        fd = (hi - lo) / (2 * eps)
        want = (grad.real * d.real + grad.imag * d.imag).sum((-2, -1))
        assert np.allclose(fd, want, rtol=1e-5, atol=1e-9)


def test_solver_respects_power_and_dominates_matched_beams():
    cfg, ctx, triples, batch = _context_batch(seed=7)
    res = solve_p2_batch(batch, cfg, SolverOptions(max_iters=60))
    power = (np.abs(res.w) ** 2).sum((-2, -1))
    assert np.all(power <= cfg.p_tx + 1e-9)
    w_mrt = mrt_beamformer(batch.g_hat, cfg.p_tx)
    u_mrt, _, _ = evaluate_batch(batch, w_mrt, cfg)
    assert np.all(res.utility >= u_mrt - 1e-9)
    assert np.allclose(res.utility, res.comm_sum - res.radar_sum, rtol=1e-9,
                       atol=1e-12)
    # reported utilities are exact at the reported beams
    u_re, _, _ = evaluate_batch(batch, res.w, cfg)
    assert np.allclose(u_re, res.utility, rtol=1e-9, atol=1e-12)


def test_solver_trace_is_nondecreasing_within_iterations():
    cfg, ctx, triples, batch = _context_batch(seed=8)
    res = solve_p2_batch(batch, cfg,
                         SolverOptions(max_iters=40, trace_blocks=True))
    trace = np.stack(res.block_trace)      # (iters, 5, lanes)
    diffs = np.diff(trace, axis=1)
    floor = -1e-9 * np.maximum(1.0, np.abs(trace[:, :-1]))
    assert np.all(diffs >= floor)


def test_more_iterations_never_hurt():
    cfg, ctx, triples, batch = _context_batch(seed=9)
    short = solve_p2_batch(batch, cfg, SolverOptions(max_iters=3))
    long = solve_p2_batch(batch, cfg, SolverOptions(max_iters=60))
    assert np.all(long.utility >= short.utility - 1e-9)


def test_w_update_modes_agree():
    for seed in (10, 11, 12):
        cfg, ctx, triples, batch = _context_batch(seed=seed)
        lag = solve_p2_batch(batch, cfg, SolverOptions(
            w_update_mode="lagrangian", max_iters=150, tol=1e-7))
        prox = solve_p2_batch(batch, cfg, SolverOptions(
            w_update_mode="prox-linear", max_iters=150, tol=1e-7))
        scale = np.maximum(np.abs(lag.utility), 1.0)
        assert np.all(np.abs(lag.utility - prox.utility) / scale < 0.05)


def test_solver_rejects_unknown_w_mode():
    cfg, ctx, triples, batch = _context_batch(seed=13)
    with pytest.raises(ValueError):
        solve_p2_batch(batch, cfg, SolverOptions(w_update_mode="cvx"))


def test_evaluate_batch_matches_entitywise_reference():
    cfg, ctx, triples, batch = _context_batch(seed=14)
    rng = np.random.default_rng(14)
    w = mrt_beamformer(batch.g_hat[0], cfg.p_tx) * rng.uniform(0.5, 1.0)
    util, comm, radar = evaluate_batch(batch, w, cfg)
    for i, (ce, re_, m1) in enumerate(triples):
        want = evaluate_utility(ce, re_, w, m1, cfg)
        assert math.isclose(util[i], want, rel_tol=1e-9), i


def test_solve_p2_single_candidate_wrapper():
    cfg, ctx, triples, batch = _context_batch(seed=15)
    ce, re_, m1 = triples[2]
    w, utility, res = solve_p2(ce, re_, m1, cfg, SolverOptions(max_iters=40))
    assert w.shape == (cfg.l_tx, 2)
    assert math.isclose(utility, float(res.utility[0]))
    assert (np.abs(w) ** 2).sum() <= cfg.p_tx + 1e-9
