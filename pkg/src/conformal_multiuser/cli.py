"""Command line entry point: ``conformal-mu <verb> ...``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import harness, synth
from .ingest import ingest

LOG_ENV = "CONFORMAL_MU_LOG"


def _cmd_run(args) -> int:
    overrides = {
        "repetitions": args.repetitions,
        "epsilon": args.epsilon,
        "base_seed": args.seed,
        "jobs": args.jobs,
    }
    cfg = harness.load_config(args.config, overrides)
    if args.out:
        # --out is relative to the working directory, not the config file
        cfg.output = str(Path(args.out).resolve())
    harness.run_experiment(cfg, resume=not args.no_resume)
    out = Path(cfg.output) if Path(cfg.output).is_absolute() else cfg.base_dir / cfg.output
    print(f"results written to {out}")
    return 0


def _cmd_ingest(args) -> int:
    path = args.path if len(args.path) > 1 else args.path[0]
    for p in args.path:
        if not Path(p).exists():
            raise FileNotFoundError(f"file not found: {p}")
    data = ingest(path, args.format, args.window, args.filter_width, args.min_per_class)
    data.to_csv(args.out)
    print(f"{data.n_instances} rows, {data.n_users} users, {data.n_classes} classes, "
          f"{data.n_features} features -> {args.out}")
    return 0


def _cmd_synth(args) -> int:
    data = synth.generate(
        args.users, args.classes, args.per_class, args.dims, args.shift, args.noise, args.seed
    )
    data.to_csv(args.out)
    print(f"{data.n_instances} rows -> {args.out}")
    return 0


def _cmd_viz(args) -> int:
    for p in harness.render_records(args.records, args.chart, args.out, args.max_sets):
        print(p)
    return 0


def _cmd_hypotheses(args) -> int:
    report = harness.hypotheses_for_run(args.run_dir)
    for dataset, by_clf in report.items():
        for clf, pairs in by_clf.items():
            for pair, res in pairs.items():
                print(f"{dataset}\t{clf}\t{pair}\tp={res['p']:.4g}\t{res['stars']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conformal-mu",
        description="Split conformal evaluation under multi-user strategies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the experiment grid described by a YAML config")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (overrides config)")
    p.add_argument("--repetitions", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--seed", type=int, help="base seed; repetition r uses seed + r")
    p.add_argument("--jobs", type=int)
    p.add_argument("--no-resume", action="store_true", help="recompute every cell")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("ingest", help="load, filter and write a preprocessed CSV")
    p.add_argument("path", nargs="+", help="CSV file; one per sensor for raw-stream")
    p.add_argument("--format", choices=("preprocessed", "raw-stream"), default="preprocessed")
    p.add_argument("--window", type=int, default=150)
    p.add_argument("--filter-width", type=int, default=10)
    p.add_argument("--min-per-class", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("synth", help="write a synthetic multi-user dataset")
    p.add_argument("--users", type=int, default=3)
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--per-class", type=int, default=40)
    p.add_argument("--dims", type=int, default=3)
    p.add_argument("--shift", type=float, default=0.0)
    p.add_argument("--noise", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("viz", help="render charts from a prediction-record CSV")
    p.add_argument("records")
    p.add_argument("--chart", choices=("cooc", "coocgraph", "zdcm", "cm", "multiset", "all"), default="all")
    p.add_argument("--out", help="output path stem")
    p.add_argument("--max-sets", type=int, default=20)
    p.set_defaults(func=_cmd_viz)

    p = sub.add_parser("hypotheses", help="recompute the Welch tests of a finished run")
    p.add_argument("run_dir")
    p.set_defaults(func=_cmd_hypotheses)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get(LOG_ENV, "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (harness.ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
