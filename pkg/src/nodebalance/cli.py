"""Command-line entry points: run, granularity, diagnose."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .diagnostics import (
    DEFAULT_WINDOWS,
    binned_accuracy,
    distance_to_same_class_supervision,
    heterophilic_ratio,
    write_bin_table,
)
from .experiment import (
    compare_granularity,
    load_config,
    run_experiment,
    write_granularity_csv,
)
from .graph import GraphFormatError, load_dataset


def _add_config_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="experiment config (JSON)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nodebalance",
        description="Imbalanced semi-supervised node classification experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a seed sweep and write result tables")
    _add_config_arg(run_p)
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument(
        "--seeds",
        type=int,
        default=None,
        metavar="K",
        help="use only the first K seeds of the config",
    )
    run_p.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="dotted-path config override, e.g. train.epochs=100 (repeatable)",
    )
    run_p.add_argument("--save-probs", action="store_true", help="write per-seed probability files")
    run_p.add_argument("--save-history", action="store_true", help="write per-seed epoch histories")
    run_p.add_argument(
        "--virtual-in-loss",
        action="store_true",
        help="include virtual prototype nodes in the training loss",
    )

    gran_p = sub.add_parser("granularity", help="sweep the augmentation refresh period")
    _add_config_arg(gran_p)
    gran_p.add_argument(
        "--values", default="1,5,10,50,100", help="comma-separated refresh periods"
    )
    gran_p.add_argument("--out", default=None, help="optional output directory")
    gran_p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")

    diag_p = sub.add_parser("diagnose", help="bin accuracy by structural scores")
    diag_p.add_argument("--graph", required=True, help="graph file with stored train/val/test")
    diag_p.add_argument("--probs", required=True, help="JSON file with a 'probs' matrix")
    diag_p.add_argument("--out", default=".", help="directory for the bin tables")
    diag_p.add_argument("--windows", type=int, default=DEFAULT_WINDOWS)
    return parser


def cmd_run(args: argparse.Namespace) -> int:
    overrides = list(args.override)
    if args.virtual_in_loss:
        overrides.append("train.virtual_in_loss=true")
    cfg = load_config(args.config, tuple(overrides))
    if args.seeds is not None:
        if args.seeds < 1 or args.seeds > len(cfg.seeds):
            raise GraphFormatError(
                f"--seeds must be in [1, {len(cfg.seeds)}], got {args.seeds}"
            )
        cfg = type(cfg)(
            dataset=cfg.dataset,
            imbalance=cfg.imbalance,
            method=cfg.method,
            train=cfg.train,
            seeds=cfg.seeds[: args.seeds],
        )
    rows, summary = run_experiment(
        cfg, args.out, save_probs=args.save_probs, save_history=args.save_history
    )
    agg = summary["aggregate"]
    print(f"{cfg.method.name()} on {cfg.dataset.name} (ir={cfg.imbalance.ir:g}, {len(rows)} seeds)")
    for metric in ("bacc", "macro_f1", "disparity"):
        stats = agg[metric]
        print(f"  {metric:10s} {stats['mean']:.4f} +- {stats['std']:.4f}")
    print(f"results written to {args.out}")
    return 0


def cmd_granularity(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, tuple(args.override))
    try:
        values = [int(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        raise GraphFormatError(f"--values: {exc}") from exc
    if not values or any(v < 1 for v in values):
        raise GraphFormatError(f"--values must be positive integers, got {args.values!r}")
    rows = compare_granularity(cfg, values)
    print(f"{'granularity':>11} {'bacc':>16} {'invocations':>11} {'ms/invocation':>13}")
    for r in rows:
        print(
            f"{r.granularity:>11d} {r.bacc_mean:>8.4f}+-{r.bacc_std:<6.4f} "
            f"{r.aug_invocations:>11d} {r.aug_ms_per_invocation:>13.2f}"
        )
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_granularity_csv(rows, out / "granularity.csv")
        print(f"table written to {out / 'granularity.csv'}")
    return 0


def cmd_diagnose(args: argparse.Namespace) -> int:
    g, preset = load_dataset(args.graph)
    if preset is None:
        raise GraphFormatError(f"{args.graph}: diagnose needs stored train/val/test sets")
    try:
        doc = json.loads(Path(args.probs).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GraphFormatError(
            f"{args.probs}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict) or "probs" not in doc:
        raise GraphFormatError(f"{args.probs}: expected an object with a 'probs' field")
    probs = np.asarray(doc["probs"], dtype=np.float64)
    if probs.shape != (g.n, g.m):
        raise GraphFormatError(
            f"{args.probs}: probs shape {probs.shape} does not match graph ({g.n}, {g.m})"
        )
    preds = probs.argmax(axis=1)
    test = preset["test"]
    correct = (preds[test] == g.y[test]).astype(np.float64)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    het = heterophilic_ratio(g, g.y)[test]
    write_bin_table(binned_accuracy(het, correct, args.windows), out / "het_bins.csv")
    dist = distance_to_same_class_supervision(g, g.y, preset["train"])[test]
    reachable = np.isfinite(dist)
    n_unreachable = int((~reachable).sum())
    write_bin_table(
        binned_accuracy(dist[reachable], correct[reachable], args.windows),
        out / "dist_bins.csv",
    )
    print(f"test accuracy {correct.mean():.4f} over {test.size} nodes")
    if n_unreachable:
        print(f"{n_unreachable} test nodes have no reachable same-class training node (excluded)")
    print(f"bin tables written to {out / 'het_bins.csv'} and {out / 'dist_bins.csv'}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"run": cmd_run, "granularity": cmd_granularity, "diagnose": cmd_diagnose}
    try:
        return handlers[args.command](args)
    except (GraphFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
