"""Batch experiment harness: config files, seed sweeps, result tables.

A config is a JSON document in the same format family as graph files:

    {
      "dataset": {"sbm": {...}, "seed": 7}      or {"path": "graph.json"},
      "imbalance": {"kind": "step", "ir": 10, "base_per_class": 20,
                    "val_per_class": 30},
      "method": {"baseline": "none", "aug": "topo"},
      "train": {"epochs": 500, ...},            TrainConfig overrides
      "seeds": [0, 1, 2]
    }

Each seed produces one ResultRow; rows are written as CSV (loss-free: the
floats re-parse to the same values) next to a JSON summary with per-metric
mean and standard deviation plus an echo of the resolved config.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph, GraphFormatError, load_dataset
from .rng import STREAM_SPLIT, substream
from .splits import (
    DEFAULT_VAL_PER_CLASS,
    Split,
    make_natural_imbalance_split,
    make_step_imbalance_split,
    subsample_step_imbalance,
)
from .synthetic import SbmParams, generate_sbm
from .training import AUG_MODES, BASELINE_MODES, TrainConfig, TrainResult, train

IMBALANCE_KINDS = ("step", "natural")


@dataclass(frozen=True)
class DatasetSpec:
    """Where the graph comes from: a file path or SBM parameters."""

    name: str
    path: str | None = None
    sbm: SbmParams | None = None
    sbm_seed: int = 0

    def __post_init__(self) -> None:
        if (self.path is None) == (self.sbm is None):
            raise ValueError("dataset needs exactly one of 'path' or 'sbm'")


@dataclass(frozen=True)
class ImbalanceSpec:
    kind: str
    ir: float
    base_per_class: int = 20
    val_per_class: int = DEFAULT_VAL_PER_CLASS

    def __post_init__(self) -> None:
        if self.kind not in IMBALANCE_KINDS:
            raise ValueError(f"imbalance kind must be one of {IMBALANCE_KINDS}, got {self.kind!r}")
        if self.ir < 1:
            raise ValueError(f"ir must be >= 1, got {self.ir}")


@dataclass(frozen=True)
class MethodSpec:
    baseline: str = "none"
    aug: str = "none"

    def __post_init__(self) -> None:
        if self.baseline not in BASELINE_MODES:
            raise ValueError(f"baseline must be one of {BASELINE_MODES}, got {self.baseline!r}")
        if self.aug not in AUG_MODES:
            raise ValueError(f"aug must be one of {AUG_MODES}, got {self.aug!r}")

    def name(self) -> str:
        base = self.baseline if self.baseline != "none" else "vanilla"
        return base + (f"+{self.aug}" if self.aug != "none" else "")


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetSpec
    imbalance: ImbalanceSpec
    method: MethodSpec
    train: TrainConfig
    seeds: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.seeds:
            raise ValueError("need at least one seed")
        if any(s < 0 for s in self.seeds):
            raise ValueError("seeds must be non-negative")


@dataclass(frozen=True)
class ResultRow:
    """One (config, seed) outcome, flat enough for CSV."""

    dataset: str
    method: str
    ir: float
    seed: int
    bacc: float
    macro_f1: float
    disparity: float
    runtime_ms: float
    virtual_edge_ratio: float
    epochs_run: int


RESULT_COLUMNS = [f.name for f in dataclasses.fields(ResultRow)]
AGGREGATE_METRICS = ("bacc", "macro_f1", "disparity", "runtime_ms", "virtual_edge_ratio")

_TRAIN_KEYS = {f.name for f in dataclasses.fields(TrainConfig)} - {"baseline", "aug", "seed"}


def _check_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise GraphFormatError(f"{where}: unknown field(s) {unknown}")


def parse_config(doc: dict) -> ExperimentConfig:
    """Validate and materialize a raw config document."""
    if not isinstance(doc, dict):
        raise GraphFormatError("config: top-level value must be an object")
    _check_keys(doc, {"dataset", "imbalance", "method", "train", "seeds"}, "config")
    for key in ("dataset", "imbalance", "seeds"):
        if key not in doc:
            raise GraphFormatError(f"config: missing required field {key!r}")

    ds_raw = doc["dataset"]
    _check_keys(ds_raw, {"path", "sbm", "seed", "name"}, "dataset")
    if "path" in ds_raw:
        path = str(ds_raw["path"])
        dataset = DatasetSpec(name=ds_raw.get("name", Path(path).stem), path=path)
    elif "sbm" in ds_raw:
        sbm_raw = dict(ds_raw["sbm"])
        _check_keys(
            sbm_raw,
            {"block_sizes", "p_intra", "p_inter", "d", "feature_shift", "noise_sigma"},
            "dataset.sbm",
        )
        params = SbmParams(
            block_sizes=tuple(sbm_raw["block_sizes"]),
            p_intra=float(sbm_raw["p_intra"]),
            p_inter=float(sbm_raw["p_inter"]),
            d=int(sbm_raw["d"]),
            feature_shift=float(sbm_raw["feature_shift"]),
            noise_sigma=float(sbm_raw["noise_sigma"]),
        )
        dataset = DatasetSpec(
            name=ds_raw.get("name", "sbm"), sbm=params, sbm_seed=int(ds_raw.get("seed", 0))
        )
    else:
        raise GraphFormatError("dataset: needs 'path' or 'sbm'")

    imb_raw = dict(doc["imbalance"])
    _check_keys(imb_raw, {"kind", "ir", "base_per_class", "val_per_class"}, "imbalance")
    imbalance = ImbalanceSpec(
        kind=str(imb_raw.get("kind", "step")),
        ir=float(imb_raw["ir"]),
        base_per_class=int(imb_raw.get("base_per_class", 20)),
        val_per_class=int(imb_raw.get("val_per_class", DEFAULT_VAL_PER_CLASS)),
    )

    method_raw = dict(doc.get("method", {}))
    _check_keys(method_raw, {"baseline", "aug"}, "method")
    method = MethodSpec(
        baseline=str(method_raw.get("baseline", "none")), aug=str(method_raw.get("aug", "none"))
    )

    train_raw = dict(doc.get("train", {}))
    _check_keys(train_raw, _TRAIN_KEYS, "train")
    train_cfg = TrainConfig(**train_raw)

    seeds = tuple(int(s) for s in doc["seeds"])
    cfg = ExperimentConfig(
        dataset=dataset, imbalance=imbalance, method=method, train=train_cfg, seeds=seeds
    )
    cfg.train.validate()
    return cfg


def load_config(path: str | Path, overrides: tuple[str, ...] = ()) -> ExperimentConfig:
    """Read a JSON config, apply key=value overrides, validate."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    for item in overrides:
        doc = apply_override(doc, item)
    return parse_config(doc)


def apply_override(doc: dict, item: str) -> dict:
    """Apply one dotted-path override like 'train.epochs=100'."""
    if "=" not in item:
        raise GraphFormatError(f"override {item!r}: expected key=value")
    key, _, raw_value = item.partition("=")
    try:
        value = json.loads(raw_value)
    except json.JSONDecodeError:
        value = raw_value
    target = doc
    parts = key.split(".")
    for part in parts[:-1]:
        target = target.setdefault(part, {})
        if not isinstance(target, dict):
            raise GraphFormatError(f"override {item!r}: {part} is not an object")
    target[parts[-1]] = value
    return doc


def config_echo(cfg: ExperimentConfig) -> dict:
    """JSON-serializable snapshot of the resolved configuration."""
    ds: dict = {"name": cfg.dataset.name}
    if cfg.dataset.path is not None:
        ds["path"] = cfg.dataset.path
    else:
        ds["sbm"] = dataclasses.asdict(cfg.dataset.sbm)
        ds["sbm"]["block_sizes"] = list(cfg.dataset.sbm.block_sizes)
        ds["seed"] = cfg.dataset.sbm_seed
    return {
        "dataset": ds,
        "imbalance": dataclasses.asdict(cfg.imbalance),
        "method": dataclasses.asdict(cfg.method),
        "train": dataclasses.asdict(cfg.train),
        "seeds": list(cfg.seeds),
    }


def build_dataset(cfg: ExperimentConfig) -> tuple[Graph, dict[str, np.ndarray] | None]:
    """Load or generate the graph; the SBM path uses the dataset seed only."""
    if cfg.dataset.path is not None:
        return load_dataset(cfg.dataset.path)
    return generate_sbm(cfg.dataset.sbm, cfg.dataset.sbm_seed), None


def build_split(
    g: Graph,
    preset: dict[str, np.ndarray] | None,
    imbalance: ImbalanceSpec,
    seed: int,
) -> Split:
    """Construct the imbalanced split for one run seed.

    With a preset split and the step protocol, minority training nodes are
    removed from the stored training set; in every other case the split is
    sampled from scratch.
    """
    rng = substream(seed, STREAM_SPLIT)
    if preset is not None and imbalance.kind == "step":
        return subsample_step_imbalance(g, preset, imbalance.base_per_class, imbalance.ir, rng)
    if imbalance.kind == "step":
        return make_step_imbalance_split(
            g, imbalance.base_per_class, imbalance.ir, rng, imbalance.val_per_class
        )
    return make_natural_imbalance_split(g, imbalance.ir, rng, imbalance.val_per_class)


def run_single(cfg: ExperimentConfig, g: Graph, preset, seed: int) -> tuple[ResultRow, TrainResult]:
    split = build_split(g, preset, cfg.imbalance, seed)
    train_cfg = dataclasses.replace(
        cfg.train, baseline=cfg.method.baseline, aug=cfg.method.aug, seed=seed
    )
    result = train(g, split, train_cfg)
    row = ResultRow(
        dataset=cfg.dataset.name,
        method=cfg.method.name(),
        ir=cfg.imbalance.ir,
        seed=seed,
        bacc=result.report.bacc,
        macro_f1=result.report.macro_f1,
        disparity=result.report.disparity,
        runtime_ms=result.report.runtime_ms,
        virtual_edge_ratio=result.report.virtual_edge_ratio,
        epochs_run=result.epochs_run,
    )
    return row, result


def run_experiment(
    cfg: ExperimentConfig,
    out_dir: str | Path | None = None,
    save_probs: bool = False,
    save_history: bool = False,
) -> tuple[list[ResultRow], dict]:
    """Run every seed, optionally writing results.csv and summary.json.

    Each seed is fully independent, so permuting the seed list permutes the
    rows without changing any value.
    """
    g, preset = build_dataset(cfg)
    rows = []
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    for seed in cfg.seeds:
        row, result = run_single(cfg, g, preset, seed)
        rows.append(row)
        if out is not None and save_probs:
            payload = {"probs": [[float(v) for v in r] for r in result.probs]}
            (out / f"probs_seed{seed}.json").write_text(json.dumps(payload), encoding="utf-8")
        if out is not None and save_history:
            _write_history(result, out / f"history_seed{seed}.csv")
    summary = {"config": config_echo(cfg), "runs": len(rows), "aggregate": aggregate(rows)}
    if out is not None:
        write_results_csv(rows, out / "results.csv")
        (out / "summary.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    return rows, summary


def aggregate(rows: list[ResultRow]) -> dict:
    """Per-metric mean and (population) standard deviation over seeds."""
    agg = {}
    for metric in AGGREGATE_METRICS:
        values = np.asarray([getattr(r, metric) for r in rows], dtype=np.float64)
        agg[metric] = {"mean": float(values.mean()), "std": float(values.std())}
    return agg


def write_results_csv(rows: list[ResultRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in dataclasses.astuple(row)])


def read_results_csv(path: str | Path) -> list[ResultRow]:
    """Inverse of write_results_csv; floats round-trip exactly."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULT_COLUMNS:
            raise GraphFormatError(f"{path}: unexpected columns {reader.fieldnames}")
        for rec in reader:
            rows.append(
                ResultRow(
                    dataset=rec["dataset"],
                    method=rec["method"],
                    ir=float(rec["ir"]),
                    seed=int(rec["seed"]),
                    bacc=float(rec["bacc"]),
                    macro_f1=float(rec["macro_f1"]),
                    disparity=float(rec["disparity"]),
                    runtime_ms=float(rec["runtime_ms"]),
                    virtual_edge_ratio=float(rec["virtual_edge_ratio"]),
                    epochs_run=int(rec["epochs_run"]),
                )
            )
    return rows


def _write_history(result: TrainResult, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["epoch", "train_loss", "val_loss", "lr", "n_virtual_edges", "mean_risk", "n_high_risk"]
        )
        for rec in result.history:
            writer.writerow(
                [
                    rec.epoch,
                    repr(rec.train_loss),
                    repr(rec.val_loss),
                    repr(rec.lr),
                    rec.n_virtual_edges,
                    repr(rec.mean_risk),
                    rec.n_high_risk,
                ]
            )


@dataclass(frozen=True)
class GranularityRow:
    granularity: int
    bacc_mean: float
    bacc_std: float
    aug_invocations: int
    aug_ms_per_invocation: float


def compare_granularity(
    cfg: ExperimentConfig, granularities: list[int]
) -> list[GranularityRow]:
    """Sweep the augmentation refresh period, reporting quality and cost.

    The invocation count per run is ceil(epochs / granularity); it is
    asserted, not just reported, so a drifting loop shows up here.
    """
    g, preset = build_dataset(cfg)
    out = []
    for gran in granularities:
        baccs, invs, ms = [], [], []
        for seed in cfg.seeds:
            split = build_split(g, preset, cfg.imbalance, seed)
            train_cfg = dataclasses.replace(
                cfg.train,
                baseline=cfg.method.baseline,
                aug=cfg.method.aug,
                seed=seed,
                granularity=gran,
            )
            result = train(g, split, train_cfg)
            expected = -(-train_cfg.epochs // gran) if cfg.method.aug != "none" else 0
            if result.aug_invocations != expected:
                raise AssertionError(
                    f"granularity {gran}: {result.aug_invocations} invocations, expected {expected}"
                )
            baccs.append(result.report.bacc)
            invs.append(result.aug_invocations)
            ms.append(result.aug_time_ms / max(result.aug_invocations, 1))
        arr = np.asarray(baccs)
        out.append(
            GranularityRow(
                granularity=gran,
                bacc_mean=float(arr.mean()),
                bacc_std=float(arr.std()),
                aug_invocations=int(invs[0]),
                aug_ms_per_invocation=float(np.mean(ms)),
            )
        )
    return out


def write_granularity_csv(rows: list[GranularityRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["granularity", "bacc_mean", "bacc_std", "aug_invocations", "aug_ms_per_invocation"]
        )
        for r in rows:
            writer.writerow(
                [r.granularity, repr(r.bacc_mean), repr(r.bacc_std), r.aug_invocations, repr(r.aug_ms_per_invocation)]
            )
