"""Deterministic derivation of named random substreams.

One top-level experiment seed fans out into independent child generators so
that enabling a randomized component (say, virtual-edge sampling) does not
shift the draws consumed by another (say, dropout). Child streams are keyed
by name through crc32, which is stable across platforms and numpy versions.
"""
from __future__ import annotations

import zlib

import numpy as np

STREAM_SPLIT = "split"
STREAM_INIT = "init"
STREAM_DROPOUT = "dropout"
STREAM_DROPOUT_VIRTUAL = "dropout-virtual"
STREAM_EDGES = "edges"
STREAM_BASELINE = "baseline"


def substream(seed: int, name: str) -> np.random.Generator:
    """Return the child generator of `seed` identified by `name`."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(key,)))
