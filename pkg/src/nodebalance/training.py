"""Full-batch GCN training with optional static and dynamic rebalancing.

The loop composes three independent switches:

* baseline: none | reweight | oversample | smote (static, applied once),
* aug: none | pred | topo (dynamic virtual topology, refreshed every
  `granularity` iterations; one edge sample is reused within a block),
* the usual optimization knobs (Adam, plateau-halved lr, dropout).

Validation loss and all returned predictions are computed on the static
graph, so dynamic virtual content never leaks into evaluation; the final
prediction state covers exactly the real nodes of the input graph.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from . import augmentation as aug_mod
from .baselines import apply_augmentation, class_reweight, oversample, smote
from .gcn import (
    ModelParams,
    PredictionState,
    gcn_backward,
    gcn_forward,
    make_dropout_mask,
    masked_cross_entropy,
)
from .graph import Graph, normalize_adjacency
from .metrics import MetricsReport, evaluate
from .optim import PlateauScheduler, adam_step
from .rng import (
    STREAM_BASELINE,
    STREAM_DROPOUT,
    STREAM_DROPOUT_VIRTUAL,
    STREAM_EDGES,
    STREAM_INIT,
    substream,
)
from .splits import Split

BASELINE_MODES = ("none", "reweight", "oversample", "smote")
AUG_MODES = ("none", "pred", "topo")
_SIMILARITY_FOR_AUG = {"pred": "prediction", "topo": "topology"}

# features sparser than this are fed to the first layer in csr form
_SPARSE_FEATURE_DENSITY = 0.05
_SPARSE_FEATURE_MIN_SIZE = 100_000


@dataclass
class TrainConfig:
    """Hyperparameters and method switches for one training run."""

    hidden: int = 64
    lr: float = 0.01
    epochs: int = 2000
    weight_decay: float = 5e-4
    dropout: float = 0.5
    patience: int = 100
    lr_factor: float = 0.5
    granularity: int = 1
    baseline: str = "none"
    aug: str = "none"
    smote_k: int = 5
    virtual_in_loss: bool = False
    seed: int = 0

    def validate(self) -> None:
        if self.baseline not in BASELINE_MODES:
            raise ValueError(f"baseline must be one of {BASELINE_MODES}, got {self.baseline!r}")
        if self.aug not in AUG_MODES:
            raise ValueError(f"aug must be one of {AUG_MODES}, got {self.aug!r}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.granularity < 1:
            raise ValueError(f"granularity must be >= 1, got {self.granularity}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.hidden < 1:
            raise ValueError(f"hidden must be >= 1, got {self.hidden}")


@dataclass(frozen=True)
class EpochRecord:
    """One training iteration's bookkeeping."""

    epoch: int
    train_loss: float
    val_loss: float
    lr: float
    n_virtual_edges: int
    mean_risk: float
    n_high_risk: int


@dataclass
class TrainResult:
    """Everything a caller needs after training.

    probs/preds cover the real nodes of the input graph; report holds test
    metrics. aug_invocations counts augmentation refreshes, aug_time_ms the
    total wall time they consumed.
    """

    params: ModelParams
    history: list[EpochRecord]
    report: MetricsReport
    probs: np.ndarray
    preds: np.ndarray
    epochs_run: int
    aug_invocations: int = 0
    aug_time_ms: float = 0.0
    virtual_edge_ratio: float = 0.0


def predict(
    params: ModelParams, op: sp.spmatrix, x: np.ndarray | sp.spmatrix
) -> PredictionState:
    """Dropout-free forward pass wrapped as a PredictionState."""
    cache = gcn_forward(params, op, x, dropout_mask=None)
    return PredictionState.from_probs(cache.probs)


def _feature_operand(x: np.ndarray) -> np.ndarray | sp.spmatrix:
    if x.size >= _SPARSE_FEATURE_MIN_SIZE:
        density = np.count_nonzero(x) / x.size
        if density < _SPARSE_FEATURE_DENSITY:
            return sp.csr_matrix(x)
    return x


def _stack_features(
    x: np.ndarray | sp.spmatrix, extra: np.ndarray
) -> np.ndarray | sp.spmatrix:
    if sp.issparse(x):
        return sp.vstack([x, sp.csr_matrix(extra)]).tocsr()
    return np.vstack([x, extra])


def train(g: Graph, split: Split, cfg: TrainConfig) -> TrainResult:
    """Train a two-layer GCN under the configured rebalancing method.

    Deterministic for a fixed (config, seed): every random component draws
    from its own named substream of cfg.seed, so switching the dynamic
    augmentation on or off leaves initialization, dropout on real nodes,
    and any static baseline untouched.
    """
    cfg.validate()
    t_start = time.perf_counter()
    rng_init = substream(cfg.seed, STREAM_INIT)
    rng_drop = substream(cfg.seed, STREAM_DROPOUT)
    rng_drop_virtual = substream(cfg.seed, STREAM_DROPOUT_VIRTUAL)
    rng_edges = substream(cfg.seed, STREAM_EDGES)
    rng_baseline = substream(cfg.seed, STREAM_BASELINE)

    # static rebalancing happens once, before the first iteration
    train_graph, train_split = g, split
    class_weights = None
    if cfg.baseline == "reweight":
        class_weights = class_reweight(split)
    elif cfg.baseline == "oversample":
        train_graph, train_split = apply_augmentation(g, split, oversample(g, split, rng_baseline))
    elif cfg.baseline == "smote":
        train_graph, train_split = apply_augmentation(
            g, split, smote(g, split, cfg.smote_k, rng_baseline)
        )

    n_t, m = train_graph.n, train_graph.m
    op_static = normalize_adjacency(train_graph)
    x_static = _feature_operand(train_graph.x)
    params = ModelParams.init(train_graph.d, cfg.hidden, m, rng_init)
    scheduler = PlateauScheduler(cfg.lr, cfg.patience, cfg.lr_factor)
    similarity_mode = _SIMILARITY_FOR_AUG.get(cfg.aug)

    history: list[EpochRecord] = []
    state = predict(params, op_static, x_static)
    current: aug_mod.AugmentedGraph | None = None
    aug_op, aug_x = None, None
    aug_invocations = 0
    aug_time = 0.0
    virtual_edge_counts: list[int] = []
    lr = cfg.lr

    for epoch in range(cfg.epochs):
        if similarity_mode is not None and epoch % cfg.granularity == 0:
            t_aug = time.perf_counter()
            current = aug_mod.augment(train_graph, state, train_split, similarity_mode, rng_edges)
            aug_op = normalize_adjacency(train_graph, m, current.edge_pairs())
            aug_x = _stack_features(x_static, current.virtual_x)
            aug_time += time.perf_counter() - t_aug
            aug_invocations += 1
            virtual_edge_counts.append(current.num_virtual_edges)

        if current is not None:
            op, x_in, rows = aug_op, aug_x, n_t + m
        else:
            op, x_in, rows = op_static, x_static, n_t

        mask = train_split.train
        labels = train_graph.y
        if current is not None and cfg.virtual_in_loss:
            mask = np.concatenate([mask, n_t + np.arange(m)])
            labels = np.concatenate([labels, current.virtual_labels])

        if cfg.dropout > 0.0:
            # real-node rows come from their own stream so that runs with and
            # without virtual nodes see identical masks on real nodes
            drop = make_dropout_mask((n_t, cfg.hidden), cfg.dropout, rng_drop)
            if rows > n_t:
                extra = make_dropout_mask((m, cfg.hidden), cfg.dropout, rng_drop_virtual)
                drop = np.vstack([drop, extra])
        else:
            drop = None

        cache = gcn_forward(params, op, x_in, drop)
        train_loss = masked_cross_entropy(cache.probs, labels, mask, class_weights)
        gw1, gw2 = gcn_backward(params, cache, labels, mask, class_weights, cfg.weight_decay)
        adam_step(params, gw1, gw2, lr)

        state = predict(params, op_static, x_static)
        val_loss = masked_cross_entropy(state.probs, train_graph.y, train_split.val)
        history.append(
            EpochRecord(
                epoch=epoch,
                train_loss=train_loss,
                val_loss=val_loss,
                lr=lr,
                n_virtual_edges=current.num_virtual_edges if current is not None else 0,
                mean_risk=current.mean_risk if current is not None else 0.0,
                n_high_risk=current.num_high_risk if current is not None else 0,
            )
        )
        lr = scheduler.step(val_loss)

    # evaluation-graph invariance: the reported state was produced on the
    # static operator, which has no virtual rows
    assert state.probs.shape == (train_graph.n, m)
    probs_real = np.asarray(state.probs[: g.n])
    final_state = PredictionState.from_probs(probs_real)
    if virtual_edge_counts and train_graph.num_edges > 0:
        edge_ratio = float(np.mean(virtual_edge_counts)) / train_graph.num_edges
    else:
        edge_ratio = 0.0
    runtime_ms = (time.perf_counter() - t_start) * 1000.0
    report = evaluate(
        final_state.preds,
        g.y,
        split.test,
        g.m,
        runtime_ms=runtime_ms,
        virtual_edge_ratio=edge_ratio,
    )
    return TrainResult(
        params=params,
        history=history,
        report=report,
        probs=probs_real,
        preds=final_state.preds,
        epochs_run=cfg.epochs,
        aug_invocations=aug_invocations,
        aug_time_ms=aug_time * 1000.0,
        virtual_edge_ratio=edge_ratio,
    )
