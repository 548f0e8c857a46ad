"""Stochastic block model generation for controlled benchmark graphs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph


@dataclass(frozen=True)
class SbmParams:
    """Planted-partition parameters.

    Node i in block b gets label b. Features are drawn as the class mean
    (feature_shift placed on the class's own axis) plus isotropic Gaussian
    noise scaled by noise_sigma, so separability is tunable independently
    of the topology.
    """

    block_sizes: tuple[int, ...]
    p_intra: float
    p_inter: float
    d: int
    feature_shift: float
    noise_sigma: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "block_sizes", tuple(int(b) for b in self.block_sizes))
        if len(self.block_sizes) < 1 or any(b < 1 for b in self.block_sizes):
            raise ValueError(f"block_sizes must be positive, got {self.block_sizes}")
        if not (0.0 <= self.p_inter <= self.p_intra <= 1.0):
            raise ValueError(
                f"need 0 <= p_inter <= p_intra <= 1, got p_intra={self.p_intra}, p_inter={self.p_inter}"
            )
        if self.d < len(self.block_sizes):
            raise ValueError(
                f"d={self.d} too small for {len(self.block_sizes)} class axes"
            )
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")


def generate_sbm(params: SbmParams, seed: int | np.random.Generator) -> Graph:
    """Sample a graph from `params`, deterministic for a given seed.

    Edges within block b appear independently with p_intra, edges across
    blocks with p_inter. Degenerate probabilities behave as expected:
    p_intra=1 yields complete blocks, p_inter=0 disconnects them.
    """
    rng = np.random.default_rng(seed)
    sizes = np.asarray(params.block_sizes, dtype=np.int64)
    m = len(sizes)
    n = int(sizes.sum())
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    y = np.repeat(np.arange(m, dtype=np.int64), sizes)

    edge_rows = []
    for a in range(m):
        for b in range(a, m):
            p = params.p_intra if a == b else params.p_inter
            ia = np.arange(offsets[a], offsets[a + 1])
            ib = np.arange(offsets[b], offsets[b + 1])
            if a == b:
                uu, vv = np.triu_indices(len(ia), k=1)
                us, vs = ia[uu], ia[vv]
            else:
                us = np.repeat(ia, len(ib))
                vs = np.tile(ib, len(ia))
            if us.size == 0 or p == 0.0:
                continue
            keep = rng.random(us.size) < p
            if keep.any():
                edge_rows.append(np.stack([us[keep], vs[keep]], axis=1))
    if edge_rows:
        edges = np.vstack(edge_rows)
    else:
        edges = np.zeros((0, 2), dtype=np.int64)

    means = np.zeros((m, params.d))
    means[np.arange(m), np.arange(m)] = params.feature_shift
    x = means[y] + params.noise_sigma * rng.standard_normal((n, params.d))
    return Graph(n=n, d=params.d, m=m, edges=edges, x=x, y=y)
