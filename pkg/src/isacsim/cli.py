"""Command line front end: run experiments, run acceptance suites, derive
analysis series from run CSVs."""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isacsim",
        description="Intermittent CSI updating and beamforming simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment")
    run_p.add_argument("--config", default=None,
                       help="JSON scenario file (overrides --preset)")
    run_p.add_argument("--preset", default="desk", choices=("desk", "full"))
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--frames", type=int, default=None)
    run_p.add_argument("--policies", default="drol",
                       help="comma list of drol|exhaustive|random|all, "
                            "each optionally suffixed :fp-sca or :mrt")
    run_p.add_argument("--output-dir", default=None,
                       help="default: $ISACSIM_OUTPUT_DIR or the cwd")
    run_p.add_argument("--beam-mode", default="fp-sca",
                       choices=("fp-sca", "mrt"))
    run_p.add_argument("--w-update-mode", default="lagrangian",
                       choices=("lagrangian", "prox-linear"))
    run_p.add_argument("--resync-interval", type=int, default=1000)
    run_p.add_argument("--solver-trace", action="store_true")
    run_p.add_argument("--no-practical", action="store_true")

    accept_p = sub.add_parser("accept", help="run an acceptance suite")
    accept_p.add_argument("--suite", default="all",
                          choices=("static", "learning", "all"))

    an_p = sub.add_parser("analyze", help="derive series from a run CSV")
    an_p.add_argument("--input", required=True)
    an_p.add_argument("--baseline", default=None,
                      help="reference CSV for the utility ratio")
    an_p.add_argument("--window", type=int, default=50)
    an_p.add_argument("--output", default=None)
    return parser


def _cmd_run(args) -> int:
    from .harness import RunOptions, run_experiment

    out_dir = (args.output_dir or os.environ.get("ISACSIM_OUTPUT_DIR")
               or os.getcwd())
    opts = RunOptions(
        preset=args.preset, config_path=args.config, seed=args.seed,
        n_frames=args.frames,
        policies=tuple(p.strip() for p in args.policies.split(",") if p.strip()),
        beam_mode=args.beam_mode, w_update_mode=args.w_update_mode,
        resync_interval=args.resync_interval, practical=not args.no_practical,
        solver_trace=args.solver_trace, output_dir=out_dir)
    records = run_experiment(opts)
    for token, recs in records.items():
        mean_u = float(np.mean([r.u_genie for r in recs])) if recs else float("nan")
        print(f"{token}: {len(recs)} frames, mean utility {mean_u:.6g}")
    print(f"outputs in {out_dir}")
    return 0


def _cmd_accept(args) -> int:
    from .acceptance import run_suite

    results = run_suite(args.suite)
    failed = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"[{res.cid:2d}] {status} {res.name} "
              f"({res.seconds:.1f}s): {res.detail}")
        failed += not res.passed
    print(f"{len(results) - failed}/{len(results)} criteria passed")
    return 1 if failed else 0


def _cmd_analyze(args) -> int:
    from .harness import (estimation_frequency, moving_average,
                          read_records_csv, relative_utility_ratio)

    data = read_records_csv(args.input)
    columns = {"frame": data["frame"]}
    for name in ("u_genie", "u_practical", "comm_sum", "radar_sum"):
        columns[f"{name}_ma"] = moving_average(data[name], args.window)
    freq_c = estimation_frequency(data["a_c"], args.window)
    for k in range(freq_c.shape[1]):
        columns[f"est_freq_c{k}"] = freq_c[:, k]
    freq_r = estimation_frequency(data["a_r"], args.window)
    for q in range(freq_r.shape[1]):
        columns[f"est_freq_r{q}"] = freq_r[:, q]
    if args.baseline:
        reference = read_records_csv(args.baseline)
        columns["u_ratio"] = relative_utility_ratio(data, reference,
                                                    args.window)

    out_path = args.output or (os.path.splitext(args.input)[0]
                               + "_derived.csv")
    names = list(columns)
    with open(out_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(names)
        for i in range(len(data["frame"])):
            row = []
            for name in names:
                v = columns[name][i]
                row.append(str(int(v)) if name == "frame"
                           else format(float(v), ".9g"))
            writer.writerow(row)
    print(f"wrote {out_path}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "accept":
        return _cmd_accept(args)
    return _cmd_analyze(args)


if __name__ == "__main__":
    sys.exit(main())
