"""Reference update policies: exhaustive search, random, always-update.

Each policy runs the same frame loop as the learned one — build the frame
context, pick a decision, design beams, advance — so its records are
directly comparable.  Beams come either from the full solver or from
matched transmission, selected by mode.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .beamforming import (SolverOptions, build_batch, evaluate_batch,
                          mrt_beamformer, solve_p2_batch)
from .config import SystemConfig
from .world import FrameRecord, World, advance, make_context

BEAM_MODES = ("fp-sca", "mrt")


def enumerate_binary_vectors(n: int) -> np.ndarray:
    """All binary vectors of length n in canonical order: row i holds the
    bits of i, least significant bit first."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    idx = np.arange(2 ** n)
    return (idx[:, None] >> np.arange(n)[None, :]) & 1


@dataclass
class ExhaustiveChoice:
    a_c: np.ndarray
    a_r: np.ndarray
    w: np.ndarray
    utility: float
    comm_sum: float
    radar_sum: float
    i_c: int              # 1-based index among feasible comm patterns
    i_r: int              # 1-based index among radar patterns
    n_c: int
    n_r: int
    iters: int
    trace: object = None


def exhaustive_decision(ctx, cfg: SystemConfig,
                        opts: SolverOptions | None = None,
                        beam_mode: str = "fp-sca") -> ExhaustiveChoice:
    """Best decision pair over every feasible binary combination.

    Pilot-infeasible comm patterns are excluded; ties break to the lowest
    comm pattern index, then radar.
    """
    k = len(ctx.users)
    q = len(ctx.targets)
    cands_c = enumerate_binary_vectors(k)
    feasible = cands_c.sum(axis=1) * cfg.d_pilot <= cfg.m_slots
    cands_c = cands_c[feasible]
    cands_r = enumerate_binary_vectors(q)
    n_c, n_r = len(cands_c), len(cands_r)

    triples = [ctx.candidate(cands_c[i], cands_r[j])
               for i in range(n_c) for j in range(n_r)]
    batch = build_batch(triples, cfg)
    trace = None
    if beam_mode == "fp-sca":
        res = solve_p2_batch(batch, cfg, opts)
        utility, comm_sum, radar_sum = res.utility, res.comm_sum, res.radar_sum
        w_all, iters = res.w, res.iters
        if res.block_trace:
            trace = np.stack(res.block_trace)
    elif beam_mode == "mrt":
        w_all = mrt_beamformer(batch.g_hat, cfg.p_tx)
        utility, comm_sum, radar_sum = evaluate_batch(batch, w_all, cfg)
        iters = 0
    else:
        raise ValueError(f"unknown beam mode {beam_mode!r}")

    best = int(np.argmax(utility))
    i, j = divmod(best, n_r)
    return ExhaustiveChoice(cands_c[i], cands_r[j], np.array(w_all[best]),
                            float(utility[best]), float(comm_sum[best]),
                            float(radar_sum[best]), i + 1, j + 1, n_c, n_r,
                            iters, trace)


def random_decision(k: int, q: int, cfg: SystemConfig,
                    rng: np.random.Generator):
    """Fair coin per entity, redrawn until the pilot slots fit the frame."""
    while True:
        a_c = rng.integers(0, 2, size=k)
        a_r = rng.integers(0, 2, size=q)
        if a_c.sum() * cfg.d_pilot <= cfg.m_slots:
            return a_c, a_r


def all_update_decision(k: int, q: int, cfg: SystemConfig):
    """Re-estimate everything every frame."""
    if k * cfg.d_pilot > cfg.m_slots:
        raise ValueError("pilot slots for all users exceed the frame")
    return np.ones(k, dtype=np.int64), np.ones(q, dtype=np.int64)


def run_baseline_frame(world: World, policy: str, beam_mode: str = "fp-sca",
                       opts: SolverOptions | None = None,
                       trace_sink: list | None = None) -> FrameRecord:
    """One frame under a fixed policy; same record schema as the learner.

    Baselines pay the pilot overhead of exactly the decision they execute,
    so the practical utility equals the genie one.
    """
    if beam_mode not in BEAM_MODES:
        raise ValueError(f"unknown beam mode {beam_mode!r}")
    t0 = time.perf_counter()
    cfg = world.cfg
    k = len(world.users)
    q = len(world.targets)
    ctx = make_context(world)

    if policy == "exhaustive":
        choice = exhaustive_decision(ctx, cfg, opts, beam_mode)
        a_c, a_r, w = choice.a_c, choice.a_r, choice.w
        utility, comm_sum, radar_sum = (choice.utility, choice.comm_sum,
                                        choice.radar_sum)
        k_c, k_r, i_c, i_r = choice.n_c, choice.n_r, choice.i_c, choice.i_r
        iters = choice.iters
        if trace_sink is not None and choice.trace is not None:
            trace_sink.append((world.frame + 1, choice.trace))
    elif policy in ("random", "all"):
        if policy == "random":
            a_c, a_r = random_decision(k, q, cfg, world.rngs.random_baseline)
        else:
            a_c, a_r = all_update_decision(k, q, cfg)
        batch = build_batch([ctx.candidate(a_c, a_r)], cfg)
        if beam_mode == "fp-sca":
            res = solve_p2_batch(batch, cfg, opts)
            w = res.w[0]
            utility, comm_sum, radar_sum = (float(res.utility[0]),
                                            float(res.comm_sum[0]),
                                            float(res.radar_sum[0]))
            iters = res.iters
            if trace_sink is not None and res.block_trace:
                trace_sink.append((world.frame + 1,
                                   np.stack(res.block_trace)))
        else:
            w = mrt_beamformer(batch.g_hat[0], cfg.p_tx)
            u, cs, rs = evaluate_batch(batch, w, cfg)
            utility, comm_sum, radar_sum = float(u[0]), float(cs[0]), float(rs[0])
            iters = 0
        k_c = k_r = i_c = i_r = 1
    else:
        raise ValueError(f"unknown policy {policy!r}")

    advance(world, ctx, a_c, a_r, w)
    return FrameRecord(
        frame=world.frame, u_genie=utility, u_practical=utility,
        comm_sum=comm_sum, radar_sum=radar_sum, a_c=a_c, a_r=a_r,
        k_c=k_c, k_r=k_r, i_c=i_c, i_r=i_r, loss=float("nan"),
        m1=ctx.m1_of(a_c), solver_iters=iters,
        wall_time=time.perf_counter() - t0)
