"""Command-line entry point.

Subcommands:
  generate  write a synthetic noisy dataset to CSV
  train     run one strategy from a config file
  compare   run every configured strategy on shared data and tabulate
  dedup     near-duplicate removal between two embedding CSVs
  report    re-render summaries from stored run records
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .data import NoiseSpec, apply_noise, generate_gaussian_dataset, write_dataset
from .errors import PeerlearnError
from .harness import compare_strategies, dedup_command, load_config, run_experiment
from .records import read_run_record


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="peerlearn")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic noisy dataset to CSV")
    gen.add_argument("--classes", type=int, default=10)
    gen.add_argument("--per-class", type=int, default=500)
    gen.add_argument("--dim", type=int, default=16)
    gen.add_argument("--separation", type=float, default=3.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--cross-category-rate", type=float, default=0.0)
    gen.add_argument("--flip-model", choices=("symmetric", "pairwise"), default="symmetric")
    gen.add_argument("--cross-domain-rate", type=float, default=0.0)
    gen.add_argument("--imbalance-factor", type=float, default=1.0)
    gen.add_argument("--out", required=True)

    tr = sub.add_parser("train", help="run the configured strategy over all seeds")
    tr.add_argument("--config", required=True)

    cmp_ = sub.add_parser("compare", help="run all configured strategies on shared data")
    cmp_.add_argument("--config", required=True)

    dd = sub.add_parser("dedup", help="remove near-duplicate train embeddings")
    dd.add_argument("--train", required=True)
    dd.add_argument("--test", required=True)
    dd.add_argument("--eta", type=float, default=0.01)
    dd.add_argument("--metric", choices=("euclidean", "cosine_distance"), default="euclidean")
    dd.add_argument("--out", required=True)

    rep = sub.add_parser("report", help="summarize stored run records")
    rep.add_argument("--records", required=True, help="directory of *.jsonl run records")
    return parser


def _cmd_generate(args) -> int:
    ds = generate_gaussian_dataset(args.classes, args.per_class, args.dim,
                                   args.separation, args.seed)
    spec = NoiseSpec(
        cross_category_rate=args.cross_category_rate,
        flip_model=args.flip_model,
        cross_domain_rate=args.cross_domain_rate,
        imbalance_factor=args.imbalance_factor,
        seed=args.seed + 1,
    )
    ds = apply_noise(ds, spec)
    write_dataset(ds, args.out)
    print(f"wrote {len(ds)} samples ({ds.num_classes} classes, dim {ds.dim}) to {args.out}")
    return 0


def _cmd_train(args) -> int:
    cfg = load_config(args.config)
    records = run_experiment(cfg)
    finals = [r.best_test_accuracy for r in records]
    print(f"{cfg.strategy.kind}: final test accuracy "
          f"{100 * np.mean(finals):.2f} +/- {100 * np.std(finals):.2f} "
          f"over {len(finals)} seed(s); records in {cfg.output_path}")
    return 0


def _cmd_compare(args) -> int:
    cfg = load_config(args.config)
    rows = compare_strategies(cfg)
    print((Path(cfg.output_path) / "comparison.txt").read_text(), end="")
    _ = rows
    return 0


def _cmd_dedup(args) -> int:
    report = dedup_command(args.train, args.test, args.eta, args.metric, args.out)
    print(f"removed {len(report.removed_ids)} of "
          f"{len(report.removed_ids) + len(report.kept_ids)} training items; "
          f"report at {args.out}")
    return 0


def _cmd_report(args) -> int:
    paths = sorted(Path(args.records).glob("*.jsonl"))
    if not paths:
        print(f"no run records found in {args.records}", file=sys.stderr)
        return 1
    for p in paths:
        rec = read_run_record(p)
        final = rec.final
        prec = ("-" if final.selection_label_precision is None
                else f"{final.selection_label_precision:.3f}")
        print(f"{p.name}: strategy={rec.strategy} epochs={len(rec.rows)} "
              f"best={100 * rec.best_test_accuracy:.2f}% ({rec.best_network}) "
              f"final_precision={prec}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "generate": _cmd_generate,
        "train": _cmd_train,
        "compare": _cmd_compare,
        "dedup": _cmd_dedup,
        "report": _cmd_report,
    }
    try:
        return handlers[args.command](args)
    except PeerlearnError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
