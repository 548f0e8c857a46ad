"""Imbalanced train/val/test split construction.

Two labeling protocols are provided. The step protocol starts from a fixed
per-class budget and shrinks the budget of the minority half of the classes
by the imbalance ratio. The natural protocol assigns a power-law profile
interpolating from `ir` labeled nodes for the head class down to 1 for the
tail class.

Validation is stratified (a fixed number of nodes per class, drawn after
the training nodes); everything left over becomes test.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph

DEFAULT_VAL_PER_CLASS = 30


@dataclass(frozen=True, eq=False)
class Split:
    """Disjoint train/val/test node index sets plus per-class train counts."""

    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    train_counts: np.ndarray

    def __post_init__(self) -> None:
        for name in ("train", "val", "test", "train_counts"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            object.__setattr__(self, name, arr)
            arr.setflags(write=False)
        if (self.train_counts < 1).any():
            j = int(np.nonzero(self.train_counts < 1)[0][0])
            raise ValueError(f"class {j} has no training nodes")

    @property
    def max_train_count(self) -> int:
        return int(self.train_counts.max())

    @property
    def num_classes(self) -> int:
        return int(self.train_counts.shape[0])

    def minority_classes(self) -> np.ndarray:
        """Classes whose train count is below the largest one."""
        return np.nonzero(self.train_counts < self.max_train_count)[0]

    @classmethod
    def from_indices(
        cls,
        train: np.ndarray,
        val: np.ndarray,
        test: np.ndarray,
        y: np.ndarray,
        m: int,
    ) -> "Split":
        train = np.asarray(train, dtype=np.int64)
        val = np.asarray(val, dtype=np.int64)
        test = np.asarray(test, dtype=np.int64)
        sets = [set(train.tolist()), set(val.tolist()), set(test.tolist())]
        names = ("train", "val", "test")
        for i in range(3):
            if len(sets[i]) != len((train, val, test)[i]):
                raise ValueError(f"{names[i]} contains duplicate indices")
            for j in range(i + 1, 3):
                overlap = sets[i] & sets[j]
                if overlap:
                    raise ValueError(
                        f"{names[i]} and {names[j]} overlap at node {min(overlap)}"
                    )
        counts = np.bincount(np.asarray(y)[train], minlength=m)
        return cls(train=train, val=val, test=test, train_counts=counts)


def step_train_counts(m: int, base_per_class: int, ir: float) -> np.ndarray:
    """Per-class training budgets for the step-imbalance protocol.

    The last floor(m/2) classes are minority and get max(round(base/ir), 1)
    labeled nodes; the rest keep the full budget.
    """
    if m < 2:
        raise ValueError(f"need at least 2 classes, got {m}")
    if base_per_class < 1 or ir < 1:
        raise ValueError(f"base_per_class and ir must be >= 1, got {base_per_class}, {ir}")
    counts = np.full(m, base_per_class, dtype=np.int64)
    minority_from = (m + 1) // 2
    minority_count = max(int(np.floor(base_per_class / ir + 0.5)), 1)
    counts[minority_from:] = minority_count
    return counts


def natural_train_counts(m: int, ir: float) -> np.ndarray:
    """Power-law training budgets: class k of m gets floor(ir^((m-1-k)/(m-1)))."""
    if m < 2:
        raise ValueError(f"need at least 2 classes, got {m}")
    if ir < 1:
        raise ValueError(f"ir must be >= 1, got {ir}")
    exponents = (m - 1 - np.arange(m)) / (m - 1)
    return np.floor(ir**exponents).astype(np.int64)


def _stratified_split(
    g: Graph,
    quotas: np.ndarray,
    val_per_class: int,
    rng: np.random.Generator,
) -> Split:
    class_sizes = np.bincount(g.y, minlength=g.m)
    for j in range(g.m):
        need = int(quotas[j]) + val_per_class
        if class_sizes[j] < need:
            raise ValueError(
                f"class {j} has {class_sizes[j]} nodes, needs {need} for train+val"
            )
    train, val, test = [], [], []
    for j in range(g.m):
        members = np.nonzero(g.y == j)[0]
        order = rng.permutation(members.size)
        shuffled = members[order]
        q = int(quotas[j])
        train.append(shuffled[:q])
        val.append(shuffled[q : q + val_per_class])
        test.append(shuffled[q + val_per_class :])
    return Split.from_indices(
        np.concatenate(train), np.concatenate(val), np.concatenate(test), g.y, g.m
    )


def make_step_imbalance_split(
    g: Graph,
    base_per_class: int,
    ir: float,
    seed: int | np.random.Generator,
    val_per_class: int = DEFAULT_VAL_PER_CLASS,
) -> Split:
    """Sample a step-imbalanced split; see step_train_counts for the budgets."""
    quotas = step_train_counts(g.m, base_per_class, ir)
    return _stratified_split(g, quotas, val_per_class, np.random.default_rng(seed))


def make_natural_imbalance_split(
    g: Graph,
    ir: float,
    seed: int | np.random.Generator,
    val_per_class: int = DEFAULT_VAL_PER_CLASS,
) -> Split:
    """Sample a power-law imbalanced split; see natural_train_counts."""
    quotas = natural_train_counts(g.m, ir)
    return _stratified_split(g, quotas, val_per_class, np.random.default_rng(seed))


def subsample_step_imbalance(
    g: Graph,
    preset: dict[str, np.ndarray],
    base_per_class: int,
    ir: float,
    seed: int | np.random.Generator,
) -> Split:
    """Apply step imbalance to a preset split by removing minority train nodes.

    Keeps the preset's val and test sets untouched; each class's training
    set is randomly subsampled down to its step budget. A class whose preset
    training set is smaller than its budget is an error.
    """
    rng = np.random.default_rng(seed)
    quotas = step_train_counts(g.m, base_per_class, ir)
    train = np.asarray(preset["train"], dtype=np.int64)
    kept = []
    for j in range(g.m):
        members = train[g.y[train] == j]
        q = int(quotas[j])
        if members.size < q:
            raise ValueError(
                f"class {j} has {members.size} preset training nodes, budget is {q}"
            )
        order = rng.permutation(members.size)
        kept.append(np.sort(members[order[:q]]))
    return Split.from_indices(
        np.concatenate(kept), preset["val"], preset["test"], g.y, g.m
    )
