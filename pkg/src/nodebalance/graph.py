"""Undirected attributed graph container, text file format, propagation operator.

The on-disk format is a JSON document (UTF-8) with fields

    n       node count
    d       feature dimension
    m       class count
    edges   list of [u, v] pairs with u < v, deduplicated, no self-loops
    x       n rows of d feature values, stored at 9 significant digits
    y       n integer labels in [0, m)

plus optional `train` / `val` / `test` index arrays. Unknown fields are
rejected so that converter bugs surface early instead of being ignored.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

FEATURE_SIG_DIGITS = 9

_REQUIRED_KEYS = ("n", "d", "m", "edges", "x", "y")
_SPLIT_KEYS = ("train", "val", "test")
_ALLOWED_KEYS = set(_REQUIRED_KEYS) | set(_SPLIT_KEYS)


class GraphFormatError(ValueError):
    """A graph or config file violates the on-disk schema."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected graph with dense node features.

    Attributes:
        n: node count.
        d: feature dimension.
        m: class count.
        edges: (E, 2) int64 array, each row (u, v) with u < v, unique, sorted.
        x: (n, d) float64 feature matrix.
        y: (n,) int64 label vector with values in [0, m).
    """

    n: int
    d: int
    m: int
    edges: np.ndarray
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", _canonical_edges(self.edges, self.n))
        x = np.ascontiguousarray(np.asarray(self.x, dtype=np.float64))
        y = np.asarray(self.y, dtype=np.int64)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.n < 1 or self.d < 1 or self.m < 1:
            raise ValueError(f"n, d, m must be positive, got ({self.n}, {self.d}, {self.m})")
        if x.shape != (self.n, self.d):
            raise ValueError(f"x: expected shape ({self.n}, {self.d}), got {x.shape}")
        if y.shape != (self.n,):
            raise ValueError(f"y: expected shape ({self.n},), got {y.shape}")
        bad = np.nonzero((y < 0) | (y >= self.m))[0]
        if bad.size:
            i = int(bad[0])
            raise ValueError(f"y[{i}]: label {int(y[i])} out of range [0, {self.m})")
        present = np.bincount(y, minlength=self.m)
        if (present == 0).any():
            missing = int(np.nonzero(present == 0)[0][0])
            raise ValueError(f"class {missing} has no nodes")
        for arr in (self.edges, x, y):
            arr.setflags(write=False)
        object.__setattr__(self, "_adj", None)

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    def adjacency_lists(self) -> list[np.ndarray]:
        """Per-node sorted neighbor index arrays (built once, cached)."""
        if self._adj is None:
            nbrs: list[list[int]] = [[] for _ in range(self.n)]
            for u, v in self.edges:
                nbrs[u].append(int(v))
                nbrs[v].append(int(u))
            adj = [np.asarray(sorted(a), dtype=np.int64) for a in nbrs]
            object.__setattr__(self, "_adj", adj)
        return self._adj

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        if self.num_edges:
            np.add.at(deg, self.edges[:, 0], 1)
            np.add.at(deg, self.edges[:, 1], 1)
        return deg

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and self.d == other.d
            and self.m == other.m
            and np.array_equal(self.edges, other.edges)
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
        )


def _canonical_edges(edges: Sequence | np.ndarray, n: int) -> np.ndarray:
    arr = np.asarray(edges, dtype=np.int64)
    if arr.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"edges: expected shape (E, 2), got {arr.shape}")
    for i, (u, v) in enumerate(arr):
        if u == v:
            raise ValueError(f"edges[{i}]: self-loop ({u}, {v})")
        if u > v:
            raise ValueError(f"edges[{i}]: endpoints must satisfy u < v, got ({u}, {v})")
        if u < 0 or v >= n:
            raise ValueError(f"edges[{i}]: endpoint out of range [0, {n}) in ({u}, {v})")
    order = np.lexsort((arr[:, 1], arr[:, 0]))
    arr = arr[order]
    dup = np.nonzero((arr[1:] == arr[:-1]).all(axis=1))[0]
    if dup.size:
        u, v = arr[dup[0] + 1]
        raise ValueError(f"edges: duplicate pair ({u}, {v})")
    return arr


def _quantize(value: float) -> float:
    return float(f"{value:.{FEATURE_SIG_DIGITS}g}")


def save_graph(
    g: Graph,
    path: str | Path,
    train: np.ndarray | None = None,
    val: np.ndarray | None = None,
    test: np.ndarray | None = None,
) -> None:
    """Write `g` (and optionally split index arrays) in the text format.

    Features are quantized to FEATURE_SIG_DIGITS significant digits, so a
    load after save reproduces the stored values bit-for-bit.
    """
    lines = ["{"]
    lines.append(f'"n": {g.n},')
    lines.append(f'"d": {g.d},')
    lines.append(f'"m": {g.m},')
    lines.append('"edges": [')
    for i, (u, v) in enumerate(g.edges):
        comma = "," if i + 1 < g.num_edges else ""
        lines.append(f"[{u}, {v}]{comma}")
    lines.append("],")
    lines.append('"x": [')
    for i in range(g.n):
        row = json.dumps([_quantize(v) for v in g.x[i]])
        comma = "," if i + 1 < g.n else ""
        lines.append(row + comma)
    lines.append("],")
    y_line = f'"y": {json.dumps([int(v) for v in g.y])}'
    splits = [(k, arr) for k, arr in zip(_SPLIT_KEYS, (train, val, test)) if arr is not None]
    if splits:
        y_line += ","
    lines.append(y_line)
    for j, (key, arr) in enumerate(splits):
        comma = "," if j + 1 < len(splits) else ""
        lines.append(f'"{key}": {json.dumps([int(v) for v in np.asarray(arr)])}{comma}')
    lines.append("}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _require_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise GraphFormatError(f"{where}: expected an integer, got {value!r}")
    return value


def _parse_index_array(raw, key: str, n: int) -> np.ndarray:
    if not isinstance(raw, list):
        raise GraphFormatError(f"{key}: expected an array of node indices")
    out = np.asarray([_require_int(v, f"{key}[{i}]") for i, v in enumerate(raw)], dtype=np.int64)
    bad = np.nonzero((out < 0) | (out >= n))[0]
    if bad.size:
        i = int(bad[0])
        raise GraphFormatError(f"{key}[{i}]: index {int(out[i])} out of range [0, {n})")
    if np.unique(out).size != out.size:
        raise GraphFormatError(f"{key}: contains duplicate indices")
    return out


def load_dataset(path: str | Path) -> tuple[Graph, dict[str, np.ndarray] | None]:
    """Load a graph file; returns (graph, split index arrays or None).

    Split arrays are returned only when the file carries all three of
    train/val/test; a partial set is rejected.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise GraphFormatError(f"{path}: top-level value must be an object")
    unknown = sorted(set(doc) - _ALLOWED_KEYS)
    if unknown:
        raise GraphFormatError(f"{path}: unknown field(s) {unknown}")
    missing = [k for k in _REQUIRED_KEYS if k not in doc]
    if missing:
        raise GraphFormatError(f"{path}: missing required field(s) {missing}")

    n = _require_int(doc["n"], "n")
    d = _require_int(doc["d"], "d")
    m = _require_int(doc["m"], "m")
    raw_edges = doc["edges"]
    if not isinstance(raw_edges, list):
        raise GraphFormatError("edges: expected an array of [u, v] pairs")
    edges = np.zeros((len(raw_edges), 2), dtype=np.int64)
    for i, pair in enumerate(raw_edges):
        if not isinstance(pair, list) or len(pair) != 2:
            raise GraphFormatError(f"edges[{i}]: expected a [u, v] pair, got {pair!r}")
        edges[i, 0] = _require_int(pair[0], f"edges[{i}][0]")
        edges[i, 1] = _require_int(pair[1], f"edges[{i}][1]")
    raw_x = doc["x"]
    if not isinstance(raw_x, list) or len(raw_x) != n:
        raise GraphFormatError(f"x: expected {n} feature rows")
    try:
        x = np.asarray(raw_x, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise GraphFormatError(f"x: {exc}") from exc
    if x.shape != (n, d):
        raise GraphFormatError(f"x: expected shape ({n}, {d}), got {x.shape}")
    raw_y = doc["y"]
    if not isinstance(raw_y, list) or len(raw_y) != n:
        raise GraphFormatError(f"y: expected {n} labels")
    y = np.asarray([_require_int(v, f"y[{i}]") for i, v in enumerate(raw_y)], dtype=np.int64)

    try:
        g = Graph(n=n, d=d, m=m, edges=edges, x=x, y=y)
    except ValueError as exc:
        raise GraphFormatError(f"{path}: {exc}") from exc

    present = [k for k in _SPLIT_KEYS if k in doc]
    if not present:
        return g, None
    if len(present) != len(_SPLIT_KEYS):
        raise GraphFormatError(f"{path}: split requires all of {list(_SPLIT_KEYS)}, found {present}")
    split = {k: _parse_index_array(doc[k], k, n) for k in _SPLIT_KEYS}
    return g, split


def load_graph(path: str | Path) -> Graph:
    """Load a graph file, ignoring any stored split."""
    g, _ = load_dataset(path)
    return g


def normalize_adjacency(
    g: Graph,
    extra_nodes: int = 0,
    extra_edges: Iterable[tuple[int, int]] | np.ndarray = (),
) -> sp.csr_matrix:
    """Symmetrically normalized propagation operator with self-loops.

    Builds D^{-1/2} (A + I) D^{-1/2} over n + extra_nodes nodes, where A
    contains the graph's edges plus `extra_edges` (any orientation; may
    reference the appended node range). Rows of isolated extra nodes reduce
    to the single self-loop entry 1.

    Args:
        g: base graph.
        extra_nodes: number of nodes appended after the real ones.
        extra_edges: iterable of (u, v) index pairs over the extended range.

    Returns:
        (n + extra_nodes) square csr matrix with sorted indices.
    """
    if extra_nodes < 0:
        raise ValueError(f"extra_nodes must be >= 0, got {extra_nodes}")
    total = g.n + extra_nodes
    extra = np.asarray(list(extra_edges) if not isinstance(extra_edges, np.ndarray) else extra_edges, dtype=np.int64)
    extra = extra.reshape(-1, 2)
    if extra.size:
        if (extra[:, 0] == extra[:, 1]).any():
            raise ValueError("extra_edges: self-loops are not allowed")
        if extra.min() < 0 or extra.max() >= total:
            raise ValueError(f"extra_edges: endpoint out of range [0, {total})")
        lo = np.minimum(extra[:, 0], extra[:, 1])
        hi = np.maximum(extra[:, 0], extra[:, 1])
        extra = np.unique(np.stack([lo, hi], axis=1), axis=0)
    und = np.vstack([g.edges, extra]) if extra.size else g.edges
    und = np.unique(und, axis=0) if extra.size else und
    src = np.concatenate([und[:, 0], und[:, 1]])
    dst = np.concatenate([und[:, 1], und[:, 0]])
    adj = sp.coo_matrix((np.ones(src.size, dtype=np.float64), (src, dst)), shape=(total, total))
    a_tilde = (adj + sp.identity(total, dtype=np.float64, format="coo")).tocsr()
    deg = np.asarray(a_tilde.sum(axis=1)).ravel()
    inv_sqrt = 1.0 / np.sqrt(deg)
    scale = sp.diags(inv_sqrt)
    op = (scale @ a_tilde @ scale).tocsr()
    op.sort_indices()
    return op
