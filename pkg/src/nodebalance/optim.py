"""Adam updates and plateau-driven learning-rate control."""
from __future__ import annotations

import numpy as np

from .gcn import ModelParams

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


def adam_step(
    params: ModelParams, grad_w1: np.ndarray, grad_w2: np.ndarray, lr: float
) -> None:
    """One bias-corrected Adam update, applied to `params` in place."""
    params.step += 1
    t = params.step
    pairs = (
        (params.w1, grad_w1, params.m_w1, params.v_w1),
        (params.w2, grad_w2, params.m_w2, params.v_w2),
    )
    for w, g, m_buf, v_buf in pairs:
        m_buf *= ADAM_BETA1
        m_buf += (1.0 - ADAM_BETA1) * g
        v_buf *= ADAM_BETA2
        v_buf += (1.0 - ADAM_BETA2) * g * g
        m_hat = m_buf / (1.0 - ADAM_BETA1**t)
        v_hat = v_buf / (1.0 - ADAM_BETA2**t)
        w -= lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


class PlateauScheduler:
    """Multiply lr by `factor` after `patience` checks without a new best loss.

    The bad-check counter resets both on improvement and on a reduction, so
    consecutive reductions are `patience` checks apart.
    """

    def __init__(self, lr: float, patience: int = 100, factor: float = 0.5) -> None:
        if patience < 1:
            raise ValueError(f"patience must be >= 1, got {patience}")
        if not 0.0 < factor < 1.0:
            raise ValueError(f"factor must be in (0, 1), got {factor}")
        self.lr = lr
        self.patience = patience
        self.factor = factor
        self.best = np.inf
        self.bad_checks = 0

    def step(self, val_loss: float) -> float:
        """Record one validation loss; returns the (possibly reduced) lr."""
        if val_loss < self.best:
            self.best = val_loss
            self.bad_checks = 0
        else:
            self.bad_checks += 1
            if self.bad_checks >= self.patience:
                self.lr *= self.factor
                self.bad_checks = 0
        return self.lr
