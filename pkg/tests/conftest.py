"""Shared test builders and the acceptance-criteria reporter."""
from __future__ import annotations

import numpy as np
import pytest

from nodebalance import Graph


def build_graph(edges, y, d=4, x=None, seed=0) -> Graph:
    """Small graph from an edge list and labels; features default to N(0, 1)."""
    y = np.asarray(y, dtype=np.int64)
    n = y.shape[0]
    m = int(y.max()) + 1
    if x is None:
        x = np.random.default_rng(seed).standard_normal((n, d))
    x = np.asarray(x, dtype=np.float64)
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return Graph(n=n, d=x.shape[1], m=m, edges=edges, x=x, y=y)


def random_graph(n, p, m, rng, d=4) -> Graph:
    """Erdos-Renyi graph with every class guaranteed at least one node."""
    u, v = np.triu_indices(n, k=1)
    keep = rng.random(u.size) < p
    edges = np.stack([u[keep], v[keep]], axis=1)
    y = rng.integers(0, m, size=n)
    y[:m] = np.arange(m)
    x = rng.standard_normal((n, d))
    return Graph(n=n, d=d, m=m, edges=edges, x=x, y=y)


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def criterion(request):
    """Record one acceptance-criterion verdict, then enforce it."""

    def _record(num, name, ok, detail=""):
        verdict = "PASS" if ok else "FAIL"
        line = f"[criterion {num}] {name}: {verdict}"
        if detail:
            line += f" ({detail})"
        request.config._acceptance_lines.append(line)
        print(line)
        assert ok, line

    return _record


@pytest.fixture
def criterion_skip(request):
    """Record a criterion as skipped and skip the test."""

    def _record(num, name, reason):
        line = f"[criterion {num}] {name}: SKIP ({reason})"
        request.config._acceptance_lines.append(line)
        print(line)
        pytest.skip(reason)

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
