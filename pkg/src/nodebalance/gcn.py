"""Two-layer graph convolutional network with hand-derived gradients.

Forward pass, all float64:

    H = relu(S X W1) * dropout_mask
    logits = S H W2
    probs = row_softmax(logits)

where S is the symmetrically normalized propagation operator. The backward
pass returns exact gradients of the masked, class-weighted cross-entropy
plus a coupled L2 penalty (weight_decay / 2) * (|W1|^2 + |W2|^2).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

# probability clamp inside the log; keeps -log finite without bending
# gradients anywhere a softmax output can realistically reach
LOG_CLAMP_EPS = 1e-12


@dataclass
class ModelParams:
    """Weight matrices plus Adam moment buffers, updated in place."""

    w1: np.ndarray
    w2: np.ndarray
    m_w1: np.ndarray
    v_w1: np.ndarray
    m_w2: np.ndarray
    v_w2: np.ndarray
    step: int = 0

    @classmethod
    def init(
        cls, num_features: int, hidden: int, num_classes: int, rng: np.random.Generator
    ) -> "ModelParams":
        """Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero moments."""

        def glorot(fan_in: int, fan_out: int) -> np.ndarray:
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            return rng.uniform(-bound, bound, size=(fan_in, fan_out))

        w1 = glorot(num_features, hidden)
        w2 = glorot(hidden, num_classes)
        return cls(
            w1=w1,
            w2=w2,
            m_w1=np.zeros_like(w1),
            v_w1=np.zeros_like(w1),
            m_w2=np.zeros_like(w2),
            v_w2=np.zeros_like(w2),
        )


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class PredictionState:
    """Row-stochastic class probabilities and hard labels.

    Argmax ties resolve to the lowest class index.
    """

    probs: np.ndarray
    preds: np.ndarray

    @classmethod
    def from_probs(cls, probs: np.ndarray) -> "PredictionState":
        return cls(probs=probs, preds=probs.argmax(axis=1))

    @classmethod
    def from_logits(cls, logits: np.ndarray) -> "PredictionState":
        return cls.from_probs(softmax_rows(logits))


@dataclass
class ForwardCache:
    """Activations retained for the backward pass."""

    op: sp.spmatrix
    x: np.ndarray | sp.spmatrix
    prop_x: np.ndarray | sp.spmatrix
    pre_act: np.ndarray
    hidden: np.ndarray
    dropout_mask: np.ndarray | None
    prop_h: np.ndarray
    logits: np.ndarray
    probs: np.ndarray


def make_dropout_mask(
    shape: tuple[int, int], drop_p: float, rng: np.random.Generator
) -> np.ndarray:
    """Inverted-dropout mask: 0 with probability drop_p, else 1/(1 - drop_p)."""
    if not 0.0 <= drop_p < 1.0:
        raise ValueError(f"drop_p must be in [0, 1), got {drop_p}")
    keep = rng.random(shape) >= drop_p
    return keep / (1.0 - drop_p)


def gcn_forward(
    params: ModelParams,
    op: sp.spmatrix,
    x: np.ndarray | sp.spmatrix,
    dropout_mask: np.ndarray | None = None,
) -> ForwardCache:
    """Full-batch forward pass; dropout is applied only when a mask is given."""
    prop_x = op @ x
    pre_act = np.asarray(prop_x @ params.w1)
    hidden = np.maximum(pre_act, 0.0)
    if dropout_mask is not None:
        hidden = hidden * dropout_mask
    prop_h = np.asarray(op @ hidden)
    logits = prop_h @ params.w2
    probs = softmax_rows(logits)
    return ForwardCache(
        op=op,
        x=x,
        prop_x=prop_x,
        pre_act=pre_act,
        hidden=hidden,
        dropout_mask=dropout_mask,
        prop_h=prop_h,
        logits=logits,
        probs=probs,
    )


def masked_cross_entropy(
    probs: np.ndarray,
    labels: np.ndarray,
    mask: np.ndarray,
    class_weights: np.ndarray | None = None,
) -> float:
    """Mean (optionally class-weighted) negative log-likelihood over `mask`."""
    mask = np.asarray(mask, dtype=np.int64)
    if mask.size == 0:
        raise ValueError("evaluation mask is empty")
    m = probs.shape[1]
    p_true = probs[mask, labels[mask]]
    p_true = np.clip(p_true, LOG_CLAMP_EPS, 1.0 - LOG_CLAMP_EPS * (m - 1))
    losses = -np.log(p_true)
    if class_weights is not None:
        losses = class_weights[labels[mask]] * losses
    return float(losses.mean())


def gcn_backward(
    params: ModelParams,
    cache: ForwardCache,
    labels: np.ndarray,
    mask: np.ndarray,
    class_weights: np.ndarray | None = None,
    weight_decay: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Exact gradients of masked_cross_entropy plus the L2 penalty.

    Derivation: for a masked node i with weight w_i, d loss / d logits_i =
    (w_i / |mask|) * (probs_i - onehot(y_i)); unmasked rows contribute zero.
    The rest is the chain rule through two propagation/linear stages, using
    that S is symmetric.
    """
    mask = np.asarray(mask, dtype=np.int64)
    if class_weights is None:
        w = np.ones(mask.size)
    else:
        w = class_weights[labels[mask]]
    coeff = w / mask.size

    dlogits = np.zeros_like(cache.probs)
    dlogits[mask] = cache.probs[mask] * coeff[:, None]
    dlogits[mask, labels[mask]] -= coeff

    gw2 = cache.prop_h.T @ dlogits + weight_decay * params.w2
    dprop_h = dlogits @ params.w2.T
    dhidden = np.asarray(cache.op @ dprop_h)
    if cache.dropout_mask is not None:
        dhidden = dhidden * cache.dropout_mask
    dpre = dhidden * (cache.pre_act > 0.0)
    gw1 = np.asarray(cache.prop_x.T @ dpre) + weight_decay * params.w1
    return gw1, gw2
