"""Experiment orchestration and run artifacts.

Runs one or more policies frame-synchronously from a shared seed, optionally
re-aligning the baselines' estimate state to the learned policy at fixed
intervals, and writes one CSV per policy plus a manifest that pins down the
whole run.  Also provides the derived series used by the result figures:
trailing moving averages, windowed estimation frequencies, and the utility
ratio against a reference policy.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import baselines as baselines_mod
from . import drol as drol_mod
from .beamforming import SolverOptions
from .config import (SystemConfig, build_scenario, config_to_dict,
                     load_scenario, make_config)
from .world import FrameRecord, copy_estimates, init_world

CSV_COLUMNS = ("frame", "u_genie", "u_practical", "comm_sum", "radar_sum",
               "a_c", "a_r", "k_c", "k_r", "i_c", "i_r", "loss", "m1",
               "solver_iters", "wall_time")

_INT_COLUMNS = {"frame", "k_c", "k_r", "i_c", "i_r", "m1", "solver_iters"}
_BIT_COLUMNS = {"a_c", "a_r"}


def _fmt_float(x) -> str:
    return format(float(x), ".9g")


def _bits_str(bits) -> str:
    return "".join(str(int(b)) for b in np.asarray(bits).ravel())


def write_records_csv(path, records) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow([
                str(r.frame), _fmt_float(r.u_genie), _fmt_float(r.u_practical),
                _fmt_float(r.comm_sum), _fmt_float(r.radar_sum),
                _bits_str(r.a_c), _bits_str(r.a_r), str(r.k_c), str(r.k_r),
                str(r.i_c), str(r.i_r), _fmt_float(r.loss), str(r.m1),
                str(r.solver_iters), _fmt_float(r.wall_time)])


def read_records_csv(path) -> dict:
    """Columns as arrays; bit strings come back as (n, width) int arrays."""
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header in {path}")
        rows = list(reader)
    out = {}
    for col, name in enumerate(CSV_COLUMNS):
        values = [row[col] for row in rows]
        if name in _BIT_COLUMNS:
            width = len(values[0]) if values else 0
            out[name] = np.array([[int(ch) for ch in v] for v in values],
                                 dtype=np.int64).reshape(len(values), width)
        elif name in _INT_COLUMNS:
            out[name] = np.array([int(v) for v in values], dtype=np.int64)
        else:
            out[name] = np.array([float(v) for v in values])
    return out


def moving_average(series, window: int) -> np.ndarray:
    """Trailing mean; the first window-1 entries average what is available."""
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        raise ValueError("empty series")
    if window < 1:
        raise ValueError("window must be at least 1")
    n = series.shape[0]
    if window == 1:
        return series.copy()
    cs = np.cumsum(series, axis=0)
    out = np.empty_like(series, dtype=float)
    head = min(window - 1, n)
    counts = np.arange(1, head + 1)
    counts = counts.reshape((head,) + (1,) * (series.ndim - 1))
    out[:head] = cs[:head] / counts
    if n >= window:
        upper = cs[window - 1:]
        lower = np.concatenate([np.zeros_like(cs[:1]), cs[:n - window]],
                               axis=0)
        out[window - 1:] = (upper - lower) / window
    return out


def estimation_frequency(bits_series, window: int = 50) -> np.ndarray:
    """Windowed mean of each entity's binary decision series."""
    bits = np.asarray(bits_series, dtype=float)
    return moving_average(bits, window)


def relative_utility_ratio(records, reference, window: int = 150,
                           column: str = "u_genie") -> np.ndarray:
    """Ratio of the moving-averaged utilities against a reference run.

    Both arguments are column dicts as returned by read_records_csv; frame
    indices must match exactly.  Each series is smoothed before dividing so
    single frames where the reference crosses zero cannot blow up the ratio.
    """
    if not np.array_equal(records["frame"], reference["frame"]):
        raise ValueError("frame indices are misaligned")
    return (moving_average(records[column], window)
            / moving_average(reference[column], window))


@dataclass
class RunOptions:
    preset: str = "desk"
    config_path: str | None = None
    seed: int = 0
    n_frames: int | None = None
    policies: tuple = ("drol",)
    beam_mode: str = "fp-sca"
    w_update_mode: str = "lagrangian"
    resync_interval: int = 1000     # 0 disables re-alignment
    practical: bool = True
    solver_trace: bool = False
    output_dir: str | None = None   # None keeps everything in memory
    drol: object = None             # DrolOptions override


def _parse_policy(token: str, default_mode: str):
    name, _, mode = token.partition(":")
    return name, (mode or default_mode)


def _safe_name(token: str) -> str:
    return token.replace(":", "-")


def run_experiment(opts: RunOptions) -> dict:
    """Run every requested policy over the same frames and emit artifacts.

    Returns {policy token: list of FrameRecord}.  With an output directory,
    writes <token>.csv per policy, manifest.json, and <token>_trace.npz when
    solver tracing is on; a run aborted by an error leaves <token>.partial
    markers beside whatever rows were already collected.
    """
    if opts.config_path:
        cfg, users, targets = load_scenario(opts.config_path)
    else:
        cfg = make_config(opts.preset)
        users, targets = build_scenario(cfg, opts.preset)
    n_frames = opts.n_frames if opts.n_frames is not None else cfg.n_frames

    solver = SolverOptions(w_update_mode=opts.w_update_mode,
                           trace_blocks=opts.solver_trace)
    worlds, learners, modes = {}, {}, {}
    order = []
    for token in opts.policies:
        name, mode = _parse_policy(token, opts.beam_mode)
        if name not in ("drol", "exhaustive", "random", "all"):
            raise ValueError(f"unknown policy {name!r}")
        worlds[token] = init_world(cfg, users, targets, opts.seed)
        modes[token] = (name, mode)
        if name == "drol":
            drol_opts = opts.drol or drol_mod.DrolOptions(
                practical=opts.practical, solver=solver)
            learners[token] = drol_mod.DrolLearner(
                cfg, len(users), len(targets), worlds[token].rngs, drol_opts)
        order.append(token)
    # learned policies run first so the re-alignment source is fresh
    order.sort(key=lambda t: modes[t][0] != "drol")
    drol_tokens = [t for t in order if modes[t][0] == "drol"]

    records = {t: [] for t in order}
    traces = {t: [] for t in order}
    out_dir = opts.output_dir
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)

    try:
        for frame in range(1, n_frames + 1):
            for token in order:
                name, mode = modes[token]
                sink = traces[token] if opts.solver_trace else None
                if name == "drol":
                    rec = drol_mod.run_frame(worlds[token], learners[token],
                                             trace_sink=sink)
                else:
                    rec = baselines_mod.run_baseline_frame(
                        worlds[token], name, mode, solver, trace_sink=sink)
                records[token].append(rec)
            if (opts.resync_interval > 0 and drol_tokens
                    and frame % opts.resync_interval == 0):
                src = worlds[drol_tokens[0]]
                for token in order:
                    if token not in drol_tokens:
                        copy_estimates(worlds[token], src)
    except Exception as exc:
        if out_dir:
            for token in order:
                write_records_csv(
                    os.path.join(out_dir, f"{_safe_name(token)}.csv"),
                    records[token])
                marker = os.path.join(out_dir, f"{_safe_name(token)}.partial")
                with open(marker, "w", encoding="utf-8") as f:
                    f.write(f"aborted at frame {len(records[token])}: {exc}\n")
        raise

    if out_dir:
        for token in order:
            write_records_csv(os.path.join(out_dir,
                                           f"{_safe_name(token)}.csv"),
                              records[token])
            if opts.solver_trace and traces[token]:
                arrays = {f"frame{fr:06d}": arr for fr, arr in traces[token]}
                np.savez(os.path.join(out_dir,
                                      f"{_safe_name(token)}_trace.npz"),
                         **arrays)
        with open(os.path.join(out_dir, "manifest.json"), "w",
                  encoding="utf-8") as f:
            json.dump(build_manifest(opts, cfg, users, targets, n_frames), f,
                      indent=2, sort_keys=True)
            f.write("\n")
    return records


def build_manifest(opts: RunOptions, cfg: SystemConfig, users, targets,
                   n_frames: int) -> dict:
    from . import __version__
    return {
        "code_version": __version__,
        "preset": opts.preset if not opts.config_path else None,
        "config_path": opts.config_path,
        "seed": opts.seed,
        "frames": n_frames,
        "policies": list(opts.policies),
        "beam_mode": opts.beam_mode,
        "w_update_mode": opts.w_update_mode,
        "resync_interval": opts.resync_interval,
        "practical": opts.practical,
        "scenario": config_to_dict(cfg, users, targets),
    }
