"""Structural bias probes: where on the graph does a model fail?

Two per-node scores connect errors to topology. The heterophilic ratio
measures how much of a node's neighborhood disagrees with its own label
(ambivalent message passing: mixed neighborhoods dilute the signal). The
supervision distance measures how many hops separate a node from the
nearest training node of its own class (distant message passing: the
label signal decays along the way). binned_accuracy turns either score
plus a correctness vector into an accuracy-vs-score table.
"""
from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph

DEFAULT_WINDOWS = 10


def heterophilic_ratio(g: Graph, labels: np.ndarray) -> np.ndarray:
    """Fraction of each node's neighbors carrying a different label.

    Isolated nodes score 0: with no neighbors there is no conflicting
    signal.
    """
    labels = np.asarray(labels)
    mismatch = np.zeros(g.n)
    deg = np.zeros(g.n)
    if g.num_edges:
        u, v = g.edges[:, 0], g.edges[:, 1]
        differs = (labels[u] != labels[v]).astype(np.float64)
        np.add.at(mismatch, u, differs)
        np.add.at(mismatch, v, differs)
        np.add.at(deg, u, 1.0)
        np.add.at(deg, v, 1.0)
    out = np.zeros(g.n)
    has = deg > 0
    out[has] = mismatch[has] / deg[has]
    return out


def _multi_source_bfs(adj: list[np.ndarray], sources: np.ndarray, n: int) -> np.ndarray:
    dist = np.full(n, np.inf)
    queue: deque[int] = deque()
    for s in sources:
        dist[s] = 0.0
        queue.append(int(s))
    while queue:
        node = queue.popleft()
        for nbr in adj[node]:
            if np.isinf(dist[nbr]):
                dist[nbr] = dist[node] + 1.0
                queue.append(int(nbr))
    return dist


def distance_to_same_class_supervision(
    g: Graph, labels: np.ndarray, train: np.ndarray
) -> np.ndarray:
    """Hop distance from each node to the nearest training node of its class.

    Training nodes score 0 for themselves. Nodes with no reachable
    same-class training node get inf.
    """
    labels = np.asarray(labels)
    train = np.asarray(train, dtype=np.int64)
    adj = g.adjacency_lists()
    out = np.full(g.n, np.inf)
    for c in np.unique(labels):
        sources = train[labels[train] == c]
        if sources.size == 0:
            continue
        dist_c = _multi_source_bfs(adj, sources, g.n)
        members = labels == c
        out[members] = dist_c[members]
    return out


@dataclass(frozen=True)
class BinStat:
    """One equal-count score bin: center, accuracy, spread, population."""

    mean_score: float
    mean_accuracy: float
    std_accuracy: float
    count: int


def binned_accuracy(
    scores: np.ndarray, correct: np.ndarray, windows: int = DEFAULT_WINDOWS
) -> list[BinStat]:
    """Accuracy as a function of a per-node score.

    Nodes are sorted by score and partitioned into `windows` equal-count
    bins (sizes differ by at most one). Ties are kept in input order, so
    the partition is deterministic.
    """
    scores = np.asarray(scores, dtype=np.float64)
    correct = np.asarray(correct, dtype=np.float64)
    if scores.shape != correct.shape:
        raise ValueError(f"shape mismatch: scores {scores.shape}, correct {correct.shape}")
    if windows < 1:
        raise ValueError(f"windows must be >= 1, got {windows}")
    if scores.size < windows:
        raise ValueError(f"{scores.size} nodes cannot fill {windows} windows")
    order = np.argsort(scores, kind="stable")
    stats = []
    for chunk in np.array_split(order, windows):
        s = scores[chunk]
        c = correct[chunk]
        stats.append(
            BinStat(
                mean_score=float(s.mean()),
                mean_accuracy=float(c.mean()),
                std_accuracy=float(np.sqrt(np.mean((c - c.mean()) ** 2))),
                count=int(chunk.size),
            )
        )
    return stats


def write_bin_table(stats: list[BinStat], path: str | Path) -> None:
    """Dump a bin table as CSV for external plotting."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin", "mean_score", "mean_accuracy", "std_accuracy", "count"])
        for i, b in enumerate(stats):
            writer.writerow([i, b.mean_score, b.mean_accuracy, b.std_accuracy, b.count])
