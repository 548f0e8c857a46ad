"""Dynamic virtual-topology augmentation for imbalanced node classification.

Each invocation inspects the classifier's current predictions and builds one
virtual prototype node per class plus stochastic edges that route extra
message-passing signal to nodes at risk of being misclassified:

1.  score each node's prediction uncertainty,
2.  calibrate the score into a non-negative risk, relative to the node's
    predicted-class peer group and discounted for classes that already own
    a large share of the training labels,
3.  spread each node's risk over its candidate (non-predicted) classes by
    prediction-derived or neighborhood-derived similarity,
4.  link nodes to class prototypes independently with probability
    risk * similarity.

Virtual prototypes carry the mean features of their predicted group, so a
sampled link pulls the node's representation toward the candidate class
without touching any real edge.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gcn import PredictionState
from .graph import Graph
from .splits import Split

SIMILARITY_MODES = ("prediction", "topology")


@dataclass(frozen=True)
class RiskScores:
    """Per-node misclassification risk and its ingredients.

    Attributes:
        uncertainty: total-variation distance between the predicted
            distribution and its own argmax one-hot, in [0, 1].
        calibrated: uncertainty centered by the predicted group's mean and
            divided by the group's imbalance scale; may be negative.
        risk: positive part of `calibrated`.
        class_mean: mean uncertainty of each predicted group (0 for empty).
        class_scale: max_train_count / train_count per class; 1 for the
            best-labeled class, larger for under-labeled ones, which damps
            risk where extra supervision signal is least needed.
    """

    uncertainty: np.ndarray
    calibrated: np.ndarray
    risk: np.ndarray
    class_mean: np.ndarray
    class_scale: np.ndarray


@dataclass(frozen=True)
class CandidateSimilarity:
    """Row-normalized affinity of each node to its candidate classes.

    scores[i, j] is the weight of class j as an alternative label for node
    i; the entry at the node's own predicted class is 0. Rows sum to 1,
    except degenerate rows (no usable evidence) which are all zero.
    """

    scores: np.ndarray
    mode: str


def compute_uncertainty(state: PredictionState) -> np.ndarray:
    """Total-variation distance between probs[i] and onehot(preds[i])."""
    n = state.probs.shape[0]
    onehot = np.zeros_like(state.probs)
    onehot[np.arange(n), state.preds] = 1.0
    return 0.5 * np.abs(state.probs - onehot).sum(axis=1)


def calibrate_risk(
    uncertainty: np.ndarray, preds: np.ndarray, train_counts: np.ndarray
) -> RiskScores:
    """Turn raw uncertainty into non-negative, imbalance-aware risk.

    Centering by the predicted group's mean makes risk relative: a node is
    risky only if it is more uncertain than its peers under the same
    predicted label. Scaling by max_train_count / train_count then shrinks
    the risk of nodes predicted as under-labeled classes, since routing
    those toward other classes would fight the imbalance correction.
    """
    counts = np.asarray(train_counts, dtype=np.float64)
    if (counts < 1).any():
        raise ValueError("every class needs at least one training node")
    m = counts.shape[0]
    preds = np.asarray(preds)
    sums = np.bincount(preds, weights=uncertainty, minlength=m)
    sizes = np.bincount(preds, minlength=m)
    class_mean = np.where(sizes > 0, sums / np.maximum(sizes, 1), 0.0)
    class_scale = counts.max() / counts
    calibrated = (uncertainty - class_mean[preds]) / class_scale[preds]
    risk = np.maximum(calibrated, 0.0)
    return RiskScores(
        uncertainty=uncertainty,
        calibrated=calibrated,
        risk=risk,
        class_mean=class_mean,
        class_scale=class_scale,
    )


def prediction_similarity(state: PredictionState) -> CandidateSimilarity:
    """Renormalize the predicted distribution over the non-predicted classes.

    scores[i, j] = probs[i, j] / (1 - probs[i, preds[i]]) for j != preds[i].
    A node whose predicted probability is exactly 1 has no residual mass to
    distribute and gets an all-zero row.
    """
    probs = state.probs
    n = probs.shape[0]
    rows = np.arange(n)
    residual = 1.0 - probs[rows, state.preds]
    scores = np.zeros_like(probs)
    usable = residual > 0.0
    scores[usable] = probs[usable] / residual[usable, None]
    scores[rows, state.preds] = 0.0
    return CandidateSimilarity(scores=scores, mode="prediction")


def _neighbor_label_counts(g: Graph, preds: np.ndarray) -> np.ndarray:
    counts = np.zeros((g.n, g.m), dtype=np.float64)
    if g.num_edges:
        np.add.at(counts, (g.edges[:, 0], preds[g.edges[:, 1]]), 1.0)
        np.add.at(counts, (g.edges[:, 1], preds[g.edges[:, 0]]), 1.0)
    return counts


def topology_similarity(g: Graph, state: PredictionState) -> CandidateSimilarity:
    """Candidate affinity from the predicted labels of a node's neighbors.

    scores[i, j] is the fraction of i's neighbors predicted j among those
    not predicted i's own class. Nodes with no such neighbors (including
    isolated nodes) fall back to their prediction_similarity row.
    """
    counts = _neighbor_label_counts(g, state.preds)
    rows = np.arange(g.n)
    degree = counts.sum(axis=1)
    own = counts[rows, state.preds]
    residual = degree - own
    scores = np.zeros_like(counts)
    usable = residual > 0.0
    scores[usable] = counts[usable] / residual[usable, None]
    scores[rows, state.preds] = 0.0
    fallback = ~usable
    if fallback.any():
        scores[fallback] = prediction_similarity(state).scores[fallback]
    return CandidateSimilarity(scores=scores, mode="topology")


def class_prototypes(
    x: np.ndarray, preds: np.ndarray, y: np.ndarray, train: np.ndarray, m: int
) -> np.ndarray:
    """Mean feature vector of each predicted group.

    A class nobody is currently predicted as falls back to the mean of its
    labeled training nodes, which always exist.
    """
    x = np.asarray(x, dtype=np.float64)
    d = x.shape[1]
    sums = np.zeros((m, d))
    np.add.at(sums, preds, x)
    sizes = np.bincount(preds, minlength=m).astype(np.float64)
    protos = np.zeros((m, d))
    filled = sizes > 0
    protos[filled] = sums[filled] / sizes[filled, None]
    for j in np.nonzero(~filled)[0]:
        members = train[y[train] == j]
        protos[j] = x[members].mean(axis=0)
    return protos


def link_probabilities(risk: np.ndarray, similarity: CandidateSimilarity) -> np.ndarray:
    """Per-(node, class) edge probabilities: risk[i] * scores[i, j].

    Row i sums to risk[i] whenever the similarity row is non-degenerate;
    degenerate rows only occur at zero risk, so the identity holds there
    too.
    """
    return risk[:, None] * similarity.scores


def sample_virtual_edges(
    link_probs: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Independently keep each (node, class) pair with its link probability.

    Returns a (K, 2) array of (node index, class index) rows. Entries with
    probability 0 never appear; entries with probability 1 always do.
    """
    draws = rng.random(link_probs.shape)
    nodes, classes = np.nonzero(draws < link_probs)
    return np.stack([nodes, classes], axis=1).astype(np.int64)


@dataclass(frozen=True)
class AugmentedGraph:
    """One augmentation invocation: prototypes, sampled links, bookkeeping.

    The virtual node for class j sits at index base.n + j in the extended
    graph. Virtual edges are undirected, like real ones.
    """

    base: Graph
    virtual_x: np.ndarray
    virtual_labels: np.ndarray
    virtual_edges: np.ndarray
    link_probs: np.ndarray
    risk: RiskScores

    @property
    def num_virtual_edges(self) -> int:
        return int(self.virtual_edges.shape[0])

    @property
    def mean_risk(self) -> float:
        return float(self.risk.risk.mean())

    @property
    def num_high_risk(self) -> int:
        return int((self.risk.risk > 0).sum())

    def edge_pairs(self) -> np.ndarray:
        """Sampled links as (real node, extended virtual index) pairs."""
        pairs = self.virtual_edges.copy()
        if pairs.size:
            pairs[:, 1] += self.base.n
        return pairs


def augment(
    g: Graph,
    state: PredictionState,
    split: Split,
    mode: str,
    rng: int | np.random.Generator,
) -> AugmentedGraph:
    """Build one round of virtual prototypes and stochastic links.

    Args:
        g: graph to augment (never mutated).
        state: current predictions for the n real nodes.
        split: supplies per-class train counts for risk calibration and the
            training set for empty-group prototype fallback.
        mode: "prediction" or "topology" candidate similarity.
        rng: edge-sampling stream; a fresh sample is drawn per invocation.
    """
    if mode not in SIMILARITY_MODES:
        raise ValueError(f"mode must be one of {SIMILARITY_MODES}, got {mode!r}")
    if state.probs.shape != (g.n, g.m):
        raise ValueError(
            f"prediction state shape {state.probs.shape} does not match graph ({g.n}, {g.m})"
        )
    rng = np.random.default_rng(rng)
    uncertainty = compute_uncertainty(state)
    risk = calibrate_risk(uncertainty, state.preds, split.train_counts)
    if mode == "prediction":
        similarity = prediction_similarity(state)
    else:
        similarity = topology_similarity(g, state)
    protos = class_prototypes(g.x, state.preds, g.y, split.train, g.m)
    probs = link_probabilities(risk.risk, similarity)
    edges = sample_virtual_edges(probs, rng)
    return AugmentedGraph(
        base=g,
        virtual_x=protos,
        virtual_labels=np.arange(g.m, dtype=np.int64),
        virtual_edges=edges,
        link_probs=probs,
        risk=risk,
    )
