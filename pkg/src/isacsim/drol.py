"""Online learning of the per-frame update decision.

A small fully connected network maps the receiver-side state (channel
estimates and error variances, track estimates and covariances) to relaxed
per-entity update scores.  The scores of each half are quantized into a few
binary candidates, every (comm, radar) candidate pair is valued by solving
the beamforming problem, and the winning pair both drives the system and
labels the state in the replay memory.  Candidate counts and exploration
probabilities anneal themselves from the indices the critic keeps picking.
"""

from __future__ import annotations

import math
import pickle
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .beamforming import SolverOptions, build_batch, solve_p2, solve_p2_batch
from .config import RngStreams, SystemConfig
from .mlp import AdamState, Mlp, adam_step, bce_loss_and_grad, _sigmoid
from .world import FrameRecord, World, advance, make_context, snapshot, restore

_LOSS_NONE = float("nan")   # reported while the memory is warming up


@dataclass
class DrolOptions:
    """Learner hyperparameters; defaults are the desk-scale settings."""

    hidden: tuple = (128, 64)
    learning_rate: float = 1e-3
    batch_size: int = 100
    memory_capacity: int = 500
    alpha_c: float = 1.9          # exploration constant, comm half
    alpha_r: float = 1.0          # exploration constant, radar half
    delta_refresh: int = 4        # frames between candidate-count refreshes
    refine_mod_basis: str = "dimension"   # or "candidate-count"
    train: bool = True
    practical: bool = True        # score the union decision each frame
    forced_exhaustive: bool = False   # replace candidates by full enumeration
    solver: SolverOptions = field(default_factory=SolverOptions)


class FeatureScaler:
    """Running per-dimension standardization (Welford accumulators)."""

    def __init__(self, dim: int):
        self.count = 0
        self.mean = np.zeros(dim)
        self.m2 = np.zeros(dim)

    def observe(self, x: np.ndarray) -> None:
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)

    def transform(self, x: np.ndarray) -> np.ndarray:
        if self.count < 2:
            return x - self.mean
        std = np.sqrt(self.m2 / self.count)
        return (x - self.mean) / np.maximum(std, 1e-8)

    def state_dict(self):
        return {"count": self.count, "mean": self.mean.copy(),
                "m2": self.m2.copy()}

    @classmethod
    def from_state_dict(cls, state):
        out = cls(state["mean"].size)
        out.count = state["count"]
        out.mean = state["mean"].copy()
        out.m2 = state["m2"].copy()
        return out


def featurize(comm_states, track_states) -> np.ndarray:
    """Flatten the receiver-side frame state in a fixed order: per user the
    channel estimate split into real and imaginary parts plus its error
    variance, then per target the state estimate and flattened covariance."""
    parts = []
    for st in comm_states:
        parts.append(st.g_hat.real)
        parts.append(st.g_hat.imag)
        parts.append([st.varsigma])
    for tr in track_states:
        parts.append(tr.x_hat)
        parts.append(tr.m.ravel())
    out = np.concatenate([np.asarray(p, dtype=float) for p in parts]) if parts \
        else np.zeros(0)
    if not np.all(np.isfinite(out)):
        raise ValueError("non-finite entries in the frame state")
    return out


def order_preserving_quantize(a_tilde: np.ndarray, count: int) -> np.ndarray:
    """Binary candidates around the relaxed vector.

    The first candidate thresholds at one half; candidate i thresholds at
    the i-th entry closest to one half, keeping every candidate ordered the
    same way as the relaxed scores (a larger score never maps to a smaller
    bit).
    """
    a = np.asarray(a_tilde, dtype=float)
    d = a.size
    if not 1 <= count <= d + 1:
        raise ValueError(f"count must lie in [1, {d + 1}], got {count}")
    out = np.empty((count, d), dtype=np.int64)
    out[0] = a >= 0.5
    order = np.argsort(np.abs(a - 0.5), kind="stable")
    for i in range(1, count):
        pivot = a[order[i - 1]]
        out[i] = (a > pivot) | ((a == pivot) & (pivot <= 0.5))
    return out


def generate_candidates(a_tilde: np.ndarray, k_tilde: int, p_explore: float,
                        rng: np.random.Generator) -> np.ndarray:
    """Quantized candidates, doubled with a noisy-score batch with
    probability p_explore (noise pushed back through the logistic)."""
    cands = order_preserving_quantize(a_tilde, k_tilde)
    if a_tilde.size and rng.random() < p_explore:
        noisy = _sigmoid(np.asarray(a_tilde)
                         + rng.standard_normal(a_tilde.size))
        cands = np.vstack([cands, order_preserving_quantize(noisy, k_tilde)])
    return cands


@dataclass
class ActorParams:
    """Exploration state of one decision half."""

    dim: int              # entities in this half
    alpha: float          # exploration constant, at most the candidate floor
    delta: int            # refresh interval in frames
    k_tilde: int
    p_explore: float
    history: list = field(default_factory=list)   # (1-based index, count)

    @classmethod
    def fresh(cls, dim: int, alpha: float, delta: int) -> "ActorParams":
        k = _clamp_count(dim + 1, dim, alpha)
        return cls(dim, alpha, delta, k, _explore_prob(alpha, k))

    def state_dict(self):
        return {"dim": self.dim, "alpha": self.alpha, "delta": self.delta,
                "k_tilde": self.k_tilde, "p_explore": self.p_explore,
                "history": list(self.history)}

    @classmethod
    def from_state_dict(cls, state):
        return cls(state["dim"], state["alpha"], state["delta"],
                   state["k_tilde"], state["p_explore"],
                   list(state["history"]))


def _clamp_count(k: int, dim: int, alpha: float) -> int:
    hi = dim + 1
    lo = min(max(1, math.ceil(alpha)), hi)
    return min(max(k, lo), hi)


def _explore_prob(alpha: float, k_tilde: int) -> float:
    return float(np.clip(1.0 - alpha / k_tilde, 0.0, 1.0))


def refine_exploration_params(params: ActorParams, frame_n: int,
                              mod_basis: str = "dimension") -> None:
    """Anneal the candidate count toward the indices the critic selects.

    Every delta frames the count becomes one more than the floored window
    mean of the folded selected indices; the exploration probability tracks
    the count every frame.  Folding is modulo the half's dimension, or
    modulo the realized candidate count when mod_basis is candidate-count.
    """
    if mod_basis not in ("dimension", "candidate-count"):
        raise ValueError(f"unknown mod_basis {mod_basis!r}")
    window_full = len(params.history) >= params.delta
    if params.dim and window_full and frame_n % params.delta == 0:
        window = params.history[-params.delta:]
        if mod_basis == "dimension":
            vals = [idx % params.dim for idx, _ in window]
        else:
            vals = [idx % cnt for idx, cnt in window]
        k_new = int(sum(vals) // params.delta) + 1
        params.k_tilde = _clamp_count(k_new, params.dim, params.alpha)
    params.p_explore = _explore_prob(params.alpha, params.k_tilde)


class ReplayMemory:
    """Fixed-capacity FIFO buffer of (feature vector, genie decision)."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._feats = []
        self._labels = []
        self._pos = 0

    def __len__(self):
        return len(self._feats)

    def push(self, feats: np.ndarray, label: np.ndarray) -> None:
        feats = np.asarray(feats, dtype=float).copy()
        label = np.asarray(label, dtype=float).copy()
        if len(self._feats) < self.capacity:
            self._feats.append(feats)
            self._labels.append(label)
        else:
            self._feats[self._pos] = feats
            self._labels[self._pos] = label
        self._pos = (self._pos + 1) % self.capacity

    def sample(self, batch_size: int, rng: np.random.Generator):
        n = len(self._feats)
        if n == 0:
            raise ValueError("memory is empty")
        if n < batch_size:
            idx = rng.integers(0, n, size=batch_size)
        else:
            idx = rng.choice(n, size=batch_size, replace=False)
        x = np.stack([self._feats[i] for i in idx])
        y = np.stack([self._labels[i] for i in idx])
        return x, y

    def state_dict(self):
        return {"capacity": self.capacity, "pos": self._pos,
                "feats": [f.copy() for f in self._feats],
                "labels": [l.copy() for l in self._labels]}

    @classmethod
    def from_state_dict(cls, state):
        out = cls(state["capacity"])
        out._pos = state["pos"]
        out._feats = [f.copy() for f in state["feats"]]
        out._labels = [l.copy() for l in state["labels"]]
        return out


@dataclass
class CriticSelection:
    i: int                 # 0-based winning comm candidate
    j: int                 # 0-based winning radar candidate
    w: np.ndarray
    utility: float
    comm_sum: float
    radar_sum: float
    iters: int
    trace: object = None   # stacked per-block objective values, if traced


def critic_select(ctx, candidates_c, candidates_r, cfg: SystemConfig,
                  opts: SolverOptions | None = None) -> CriticSelection:
    """Value every candidate pair by its beamforming optimum and return the
    first-best pair (ties break to the lowest comm index, then radar).

    Pairs are normally solved in one batched pass; if that raises, each pair
    is retried alone and failures are skipped with a warning.  All pairs
    failing is an error.
    """
    n_c, n_r = len(candidates_c), len(candidates_r)
    if n_c == 0 or n_r == 0:
        raise ValueError("need at least one candidate per half")
    triples = [ctx.candidate(candidates_c[i], candidates_r[j])
               for i in range(n_c) for j in range(n_r)]
    try:
        batch = build_batch(triples, cfg)
        res = solve_p2_batch(batch, cfg, opts)
        utility = res.utility
        best = int(np.argmax(utility))
        i, j = divmod(best, n_r)
        trace = np.stack(res.block_trace) if res.block_trace else None
        return CriticSelection(i, j, res.w[best], float(utility[best]),
                               float(res.comm_sum[best]),
                               float(res.radar_sum[best]), res.iters, trace)
    except (RuntimeError, np.linalg.LinAlgError) as exc:
        warnings.warn(f"batched candidate solve failed ({exc}); "
                      "retrying pairs one by one")
    utility = np.full(len(triples), -np.inf)
    results = [None] * len(triples)
    iters = 0
    for idx, (ce, re_, m1) in enumerate(triples):
        try:
            w, u, res = solve_p2(ce, re_, m1, cfg, opts)
        except (RuntimeError, np.linalg.LinAlgError) as exc:
            warnings.warn(f"candidate pair {divmod(idx, n_r)} failed: {exc}")
            continue
        utility[idx] = u
        results[idx] = (w, res)
        iters = max(iters, res.iters)
    if not np.isfinite(utility).any():
        raise RuntimeError("every candidate pair failed to solve")
    best = int(np.argmax(utility))
    i, j = divmod(best, n_r)
    w, res = results[best]
    return CriticSelection(i, j, w, float(utility[best]),
                           float(res.comm_sum[0]), float(res.radar_sum[0]),
                           iters)


def practical_decision(candidates_c: np.ndarray, d_pilot: int):
    """Union of the explored comm candidates and its pilot slot count.

    Deployed, every explored channel has to be sounded before the critic can
    compare candidates, so the realizable decision is the componentwise OR.
    """
    cands = np.asarray(candidates_c)
    if cands.ndim != 2 or cands.shape[0] == 0:
        raise ValueError("need a nonempty candidate matrix")
    a_c = cands.max(axis=0)
    return a_c, int(d_pilot * a_c.sum())


class DrolLearner:
    """Network, optimizer, memory, scaler, and exploration state."""

    def __init__(self, cfg: SystemConfig, k_users: int, q_targets: int,
                 rngs: RngStreams, opts: DrolOptions | None = None):
        if cfg.d_pilot * k_users > cfg.m_slots:
            raise ValueError("scenario cannot sound every user in one frame")
        self.cfg = cfg
        self.opts = opts or DrolOptions()
        self.k_users = k_users
        self.q_targets = q_targets
        self.feature_dim = k_users * (2 * cfg.l_tx + 1) + 12 * q_targets
        sizes = (self.feature_dim, *self.opts.hidden, k_users + q_targets)
        self.net = Mlp(sizes, rngs.dnn_init)
        self.adam = AdamState.for_net(self.net)
        self.memory = ReplayMemory(self.opts.memory_capacity)
        self.scaler = FeatureScaler(self.feature_dim)
        self.actor_c = ActorParams.fresh(k_users, self.opts.alpha_c,
                                         self.opts.delta_refresh)
        self.actor_r = ActorParams.fresh(q_targets, self.opts.alpha_r,
                                         self.opts.delta_refresh)


def train_step(learner: DrolLearner, rng: np.random.Generator) -> float:
    """One optimizer step on a replay batch; a no-op before warmup."""
    mem = learner.memory
    warmup = min(50, max(1, mem.capacity // 10))
    if len(mem) < warmup:
        return _LOSS_NONE
    x, y = mem.sample(learner.opts.batch_size, rng)
    loss, grads = bce_loss_and_grad(learner.net, x, y)
    adam_step(learner.net, grads, learner.adam,
              lr=learner.opts.learning_rate)
    return loss


def run_frame(world: World, learner: DrolLearner,
              trace_sink: list | None = None) -> FrameRecord:
    """One full frame of the learned policy.

    Featurize the previous frame's state, generate and value candidate
    decisions, refine the exploration parameters, store the winner as the
    training label, train, optionally score the union decision, and commit
    the winner to the world.
    """
    t0 = time.perf_counter()
    cfg = world.cfg
    opts = learner.opts
    n = world.frame + 1

    raw = featurize(world.comm, world.tracks)
    learner.scaler.observe(raw)
    feats = learner.scaler.transform(raw)
    a_tilde = learner.net.forward(feats)
    a_t_c = a_tilde[:learner.k_users]
    a_t_r = a_tilde[learner.k_users:]

    if opts.forced_exhaustive:
        from .baselines import enumerate_binary_vectors
        cands_c = enumerate_binary_vectors(learner.k_users)
        cands_r = enumerate_binary_vectors(learner.q_targets)
    else:
        cands_c = generate_candidates(a_t_c, learner.actor_c.k_tilde,
                                      learner.actor_c.p_explore,
                                      world.rngs.exploration_noise)
        cands_r = generate_candidates(a_t_r, learner.actor_r.k_tilde,
                                      learner.actor_r.p_explore,
                                      world.rngs.exploration_noise)

    ctx = make_context(world)
    sel = critic_select(ctx, cands_c, cands_r, cfg, opts.solver)
    if trace_sink is not None and sel.trace is not None:
        trace_sink.append((n, sel.trace))
    a_c = cands_c[sel.i]
    a_r = cands_r[sel.j]

    learner.actor_c.history.append((sel.i + 1, len(cands_c)))
    learner.actor_r.history.append((sel.j + 1, len(cands_r)))
    if not opts.forced_exhaustive:
        refine_exploration_params(learner.actor_c, n, opts.refine_mod_basis)
        refine_exploration_params(learner.actor_r, n, opts.refine_mod_basis)

    learner.memory.push(feats, np.concatenate([a_c, a_r]).astype(float))
    loss = (train_step(learner, world.rngs.replay_sampling)
            if opts.train else _LOSS_NONE)

    if opts.practical:
        a_prac, m1_prac = practical_decision(cands_c, cfg.d_pilot)
        if np.array_equal(a_prac, a_c):
            u_practical = sel.utility
        else:
            ce, re_, m1 = ctx.candidate(a_prac, a_r)
            _, u_practical, _ = solve_p2(ce, re_, m1, cfg, opts.solver)
    else:
        u_practical = _LOSS_NONE

    advance(world, ctx, a_c, a_r, sel.w)
    return FrameRecord(
        frame=world.frame, u_genie=sel.utility, u_practical=u_practical,
        comm_sum=sel.comm_sum, radar_sum=sel.radar_sum, a_c=a_c, a_r=a_r,
        k_c=len(cands_c), k_r=len(cands_r), i_c=sel.i + 1, i_r=sel.j + 1,
        loss=loss, m1=ctx.m1_of(a_c), solver_iters=sel.iters,
        wall_time=time.perf_counter() - t0)


CHECKPOINT_VERSION = 1


def save_checkpoint(path, learner: DrolLearner, world: World) -> None:
    """Everything needed to resume a run bit-exactly: network, optimizer,
    memory, scaler, exploration state, and the world with its stream
    positions.  The file is a pickle; load only files you wrote."""
    payload = {
        "version": CHECKPOINT_VERSION,
        "net": learner.net.state_dict(),
        "adam": learner.adam.state_dict(),
        "memory": learner.memory.state_dict(),
        "scaler": learner.scaler.state_dict(),
        "actor_c": learner.actor_c.state_dict(),
        "actor_r": learner.actor_r.state_dict(),
        "world": snapshot(world),
    }
    with open(path, "wb") as f:
        pickle.dump(payload, f)


def load_checkpoint(path, learner: DrolLearner, world: World) -> None:
    with open(path, "rb") as f:
        payload = pickle.load(f)
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version "
                         f"{payload.get('version')!r}")
    learner.net = Mlp.from_state_dict(payload["net"])
    learner.adam = AdamState.from_state_dict(payload["adam"])
    learner.memory = ReplayMemory.from_state_dict(payload["memory"])
    learner.scaler = FeatureScaler.from_state_dict(payload["scaler"])
    learner.actor_c = ActorParams.from_state_dict(payload["actor_c"])
    learner.actor_r = ActorParams.from_state_dict(payload["actor_r"])
    restore(world, payload["world"])
