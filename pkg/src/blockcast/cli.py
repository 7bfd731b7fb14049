"""Simulate mmWave blockage traces and train early-warning classifiers.

Exit codes: 0 success, 2 usage, 3 infeasible configuration, 4 I/O or
malformed input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import replace

from .dataset import DatasetFormatError, load_dataset, save_dataset
from .experiments import SWEEP_PARAMS, ExperimentConfig, make_dataset, run_cv, sweep
from .propagation import ArrayConfig, synth_trace
from .scenario import GeneratorConfig, InfeasibleConfigError, Scenario, crossing_scenario, gen_scenario

EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4


def _experiment_args(p: argparse.ArgumentParser, n_default=10_000):
    d = ExperimentConfig()
    p.add_argument("--seed", type=int, default=d.master_seed, help="master seed")
    p.add_argument("--n", type=int, default=n_default, help="dataset size (even)")
    p.add_argument("--fs", type=float, default=d.fs_hz, help="sampling rate (Hz)")
    p.add_argument("--w-ms", type=float, default=d.w_ms, help="observation window")
    p.add_argument("--t1-ms", type=float, default=d.t1_ms, help="prediction range")
    p.add_argument("--p-ms", type=float, default=d.p_ms, help="prediction window")
    p.add_argument("--fk-hz", type=float, default=d.fk_hz, help="carrier frequency")
    p.add_argument("--bs-elems", type=int, default=d.bs_elems)
    p.add_argument("--ue-elems", type=int, default=d.ue_elems)
    p.add_argument("--qmax", type=int, default=d.q_max, help="reflector count drawn from 0..qmax")
    p.add_argument("--mode", choices=("mimo", "omni"), default=d.mode)
    p.add_argument("--features", choices=("minirocket", "rocket12"), default=d.features)
    p.add_argument("--k", type=int, default=d.k, help="cross-validation folds")


def _config(args) -> ExperimentConfig:
    return ExperimentConfig(
        n=args.n,
        fs_hz=args.fs,
        w_ms=args.w_ms,
        t1_ms=args.t1_ms,
        p_ms=args.p_ms,
        fk_hz=args.fk_hz,
        bs_elems=args.bs_elems,
        ue_elems=args.ue_elems,
        q_max=args.qmax,
        master_seed=args.seed,
        mode=args.mode,
        features=args.features,
        k=args.k,
    )


def _write(text: str, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([r[h] if not isinstance(r[h], float) else repr(r[h]) for h in header])
    return buf.getvalue()


def _summary(ds) -> None:
    n0, n1 = ds.counts()
    print(f"dataset: N={len(ds)} label0={n0} label1={n1} attempts={ds.config.get('attempts', '?')}", file=sys.stderr)


# --- commands -------------------------------------------------------------


def cmd_scenario(args) -> int:
    gen = GeneratorConfig(master_seed=args.seed, q_max=args.qmax)
    _write(gen_scenario(args.index, gen).to_json() + "\n", args.out)
    return 0


def cmd_trace(args) -> int:
    if args.crossing:
        sc = crossing_scenario()
    elif args.scenario:
        with open(args.scenario, encoding="utf-8") as f:
            sc = Scenario.from_json(f.read())
    else:
        sc = gen_scenario(args.index, GeneratorConfig(master_seed=args.seed, q_max=args.qmax))
    arrays = ArrayConfig.omni(args.fk_hz) if args.mode == "omni" else ArrayConfig(args.bs_elems, args.ue_elems, args.fk_hz)
    tr = synth_trace(sc, arrays, args.fs)
    _write(tr.to_csv(), args.out)
    if args.figure:
        from .dataset import detect_tau
        from .plotting import plot_trace

        plot_trace(tr, args.figure, tau_ms=detect_tau(tr), title=f"scenario {sc.id}, Q={sc.q}" if sc.id >= 0 else "perpendicular crossing")
    return 0


def cmd_gen(args) -> int:
    ds = make_dataset(_config(args))
    save_dataset(ds, args.out)
    _summary(ds)
    return 0


def cmd_cv(args) -> int:
    cfg = _config(args)
    if args.data:
        ds = load_dataset(args.data)
    else:
        ds = make_dataset(cfg)
    _summary(ds)
    m = run_cv(ds, cfg)
    rows = [{"param": "fold", "value": i + 1, "accuracy": f.accuracy, "f1": f.f1, "auc": f.auc} for i, f in enumerate(m.folds)]
    rows.append({"param": "mean", "value": cfg.k, "accuracy": m.accuracy, "f1": m.f1, "auc": m.auc})
    _write(_csv(rows, ["param", "value", "accuracy", "f1", "auc"]), args.out)
    return 0


def cmd_sweep(args) -> int:
    values = [v for v in (args.values or "").split(",") if v.strip()]
    if not values:
        raise _UsageError("--values must list at least one value")
    base = _config(args)
    if args.param == "speeds":
        base = replace(base, q_min=2)

    def progress(row):
        print(f"{row['param']}={row['value']}: accuracy={row['accuracy']:.4f}", file=sys.stderr)

    rows = sweep(args.param, values, base, test_n=args.test_n, progress=progress)
    header = ["param", "value", "accuracy", "f1", "auc", "config_hash"]
    _write(_csv(rows, header), args.out)
    if args.figure:
        from .plotting import plot_sweep

        plot_sweep(rows, args.param, args.figure)
    return 0


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="blockcast", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("scenario", help="print one generated scenario as JSON")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--index", type=int, default=0)
    s.add_argument("--qmax", type=int, default=10)
    s.add_argument("--out")
    s.set_defaults(func=cmd_scenario)

    t = sub.add_parser("trace", help="synthesize an RSS trace as t_ms,rss CSV")
    t.add_argument("--scenario", help="scenario JSON file (otherwise generated from --seed/--index)")
    t.add_argument("--crossing", action="store_true", help="use the constructed perpendicular-crossing scenario")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--index", type=int, default=0)
    t.add_argument("--qmax", type=int, default=10)
    t.add_argument("--fs", type=float, default=4000.0)
    t.add_argument("--fk-hz", type=float, default=30e9)
    t.add_argument("--bs-elems", type=int, default=16)
    t.add_argument("--ue-elems", type=int, default=4)
    t.add_argument("--mode", choices=("mimo", "omni"), default="mimo")
    t.add_argument("--out")
    t.add_argument("--figure", help="also render the trace to this image file")
    t.set_defaults(func=cmd_trace)

    g = sub.add_parser("gen", help="generate a labeled NDJSON dataset")
    _experiment_args(g)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("cv", help="k-fold cross-validation metrics as CSV")
    _experiment_args(c)
    c.add_argument("--data", help="dataset file from `gen` (otherwise generated from the flags)")
    c.add_argument("--out")
    c.set_defaults(func=cmd_cv)

    w = sub.add_parser("sweep", help="metrics table over one parameter")
    _experiment_args(w)
    w.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    w.add_argument("--values", required=True, help="comma-separated values, e.g. 100,150,200 or 16x4,64x16")
    w.add_argument("--test-n", type=int, default=2000, help="per-cell test set size for the speeds sweep")
    w.add_argument("--out")
    w.add_argument("--figure", help="also render the table to this image file")
    w.set_defaults(func=cmd_sweep)
    return p


def _apply_thread_cap():
    threads = os.environ.get("BLOCKCAST_THREADS")
    if threads:
        try:
            import numba

            numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))
        except ValueError:
            pass


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_thread_cap()
    try:
        return args.func(args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"blockcast: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleConfigError as exc:
        print(f"blockcast: infeasible configuration: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (OSError, DatasetFormatError, json.JSONDecodeError) as exc:
        print(f"blockcast: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"blockcast: invalid input: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
