"""Classical class-rebalancing baselines: reweighting and oversampling.

All three are static: they are computed once from the initial graph and
split, before training starts. The oversampling variants return a
BaselineAugmentation describing the synthesized nodes, which
apply_augmentation turns into an extended graph and split.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .splits import Split

DEFAULT_SMOTE_NEIGHBORS = 5


def class_reweight(split: Split) -> np.ndarray:
    """Inverse-frequency loss weights: w_j = total / (m * count_j).

    The weights have mean 1, so the overall loss scale is unchanged; the
    ratio between two classes equals the inverse ratio of their counts.
    """
    counts = split.train_counts.astype(np.float64)
    return counts.sum() / (len(counts) * counts)


@dataclass(frozen=True)
class BaselineAugmentation:
    """Synthesized training nodes to append after the real ones.

    new_edges holds (new node index, real endpoint) pairs; new node k of
    the batch gets index n + k in the extended graph.
    """

    new_x: np.ndarray
    new_y: np.ndarray
    new_edges: np.ndarray
    seed_nodes: np.ndarray

    @property
    def num_new(self) -> int:
        return int(self.new_y.shape[0])


def _deficits(split: Split) -> np.ndarray:
    return split.max_train_count - split.train_counts


def _duplicate_seed_edges(g: Graph, seeds: np.ndarray) -> np.ndarray:
    """Edges of each synthesized node: copies of its seed's adjacency."""
    adj = g.adjacency_lists()
    rows = []
    for k, s in enumerate(seeds):
        for nbr in adj[int(s)]:
            rows.append((g.n + k, int(nbr)))
    if not rows:
        return np.zeros((0, 2), dtype=np.int64)
    return np.asarray(rows, dtype=np.int64)


def oversample(
    g: Graph, split: Split, rng: int | np.random.Generator
) -> BaselineAugmentation:
    """Replicate minority training nodes until every class hits the max count.

    Each replica copies its seed's features and label and duplicates the
    seed's edges. Seeds are drawn with replacement. A balanced split yields
    an empty augmentation.
    """
    rng = np.random.default_rng(rng)
    deficits = _deficits(split)
    seeds = []
    for j in np.nonzero(deficits > 0)[0]:
        members = split.train[g.y[split.train] == j]
        seeds.extend(int(s) for s in rng.choice(members, size=int(deficits[j]), replace=True))
    seeds = np.asarray(seeds, dtype=np.int64)
    return BaselineAugmentation(
        new_x=g.x[seeds].copy() if seeds.size else np.zeros((0, g.d)),
        new_y=g.y[seeds].copy() if seeds.size else np.zeros(0, dtype=np.int64),
        new_edges=_duplicate_seed_edges(g, seeds),
        seed_nodes=seeds,
    )


def smote(
    g: Graph,
    split: Split,
    k: int = DEFAULT_SMOTE_NEIGHBORS,
    rng: int | np.random.Generator = 0,
) -> BaselineAugmentation:
    """Interpolated oversampling in feature space.

    Each synthesized node is seed + delta * (neighbor - seed) with delta
    uniform in [0, 1], where the neighbor is drawn from the seed's k nearest
    same-class training nodes by Euclidean distance. Labels and edges are
    copied from the seed. A class with a single training node degrades to
    replication.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    rng = np.random.default_rng(rng)
    deficits = _deficits(split)
    seeds, new_x_rows = [], []
    for j in np.nonzero(deficits > 0)[0]:
        members = split.train[g.y[split.train] == j]
        feats = g.x[members]
        # pairwise distances within the class; self excluded from the pool
        diff = feats[:, None, :] - feats[None, :, :]
        dist = np.sqrt((diff**2).sum(axis=2))
        np.fill_diagonal(dist, np.inf)
        for _ in range(int(deficits[j])):
            si = int(rng.integers(members.size))
            seeds.append(int(members[si]))
            if members.size == 1:
                new_x_rows.append(feats[0].copy())
                continue
            pool_size = min(k, members.size - 1)
            pool = np.argsort(dist[si], kind="stable")[:pool_size]
            ni = int(pool[rng.integers(pool_size)])
            delta = rng.random()
            new_x_rows.append(feats[si] + delta * (feats[ni] - feats[si]))
    seeds = np.asarray(seeds, dtype=np.int64)
    new_x = np.asarray(new_x_rows) if new_x_rows else np.zeros((0, g.d))
    return BaselineAugmentation(
        new_x=new_x,
        new_y=g.y[seeds].copy() if seeds.size else np.zeros(0, dtype=np.int64),
        new_edges=_duplicate_seed_edges(g, seeds),
        seed_nodes=seeds,
    )


def apply_augmentation(
    g: Graph, split: Split, aug: BaselineAugmentation
) -> tuple[Graph, Split]:
    """Materialize the extended graph and split with synthesized nodes.

    Synthesized nodes are appended after the real ones and join the
    training set; val and test are untouched. With an empty augmentation
    the original objects are returned as-is.
    """
    if aug.num_new == 0:
        return g, split
    edges = np.vstack([g.edges, _normalize_pairs(aug.new_edges)])
    extended = Graph(
        n=g.n + aug.num_new,
        d=g.d,
        m=g.m,
        edges=edges,
        x=np.vstack([g.x, aug.new_x]),
        y=np.concatenate([g.y, aug.new_y]),
    )
    new_train = np.concatenate([split.train, g.n + np.arange(aug.num_new)])
    new_split = Split.from_indices(new_train, split.val, split.test, extended.y, g.m)
    return extended, new_split


def _normalize_pairs(pairs: np.ndarray) -> np.ndarray:
    if pairs.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    return np.stack([lo, hi], axis=1)
