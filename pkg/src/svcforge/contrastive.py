"""Perturbation-invariance contrastive objective and its weight ramp.

Symmetric InfoNCE over cosine similarities: row i of each side of a batch
comes from the same underlying frame, every other row is a negative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import defaults
from .errors import InvalidParameterError, ShapeMismatchError, ZeroNormError


@dataclass(frozen=True)
class FeaturePairBatch:
    """Aligned feature matrices [N, d] from two perturbations of one source."""

    z: np.ndarray
    z_prime: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=np.float64)
        zp = np.asarray(self.z_prime, dtype=np.float64)
        if z.ndim != 2 or z.shape != zp.shape:
            raise ShapeMismatchError("z and z_prime must be equal-shape [N, d]")
        if z.shape[0] < 1:
            raise InvalidParameterError("batch must contain at least one row")
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(zp))):
            raise InvalidParameterError("batch rows must be finite")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "z_prime", zp)


def contrastive_loss(batch: FeaturePairBatch,
                     tau: float = defaults.CONTRASTIVE_TAU) -> float:
    """Symmetric InfoNCE on cosine similarities at temperature tau.

    L = -(1/2N) sum_i [log softmax_j(cos(z_i, z'_j)/tau)_i
                       + log softmax_j(cos(z'_i, z_j)/tau)_i]
    """
    if tau <= 0:
        raise InvalidParameterError("tau must be positive")
    norms = np.linalg.norm(batch.z, axis=1)
    norms_p = np.linalg.norm(batch.z_prime, axis=1)
    if np.any(norms == 0) or np.any(norms_p == 0):
        raise ZeroNormError("zero-norm feature row")
    zn = batch.z / norms[:, None]
    zpn = batch.z_prime / norms_p[:, None]
    sim = (zn @ zpn.T) / tau
    diag = np.diag(sim)
    forward = logsumexp(sim, axis=1) - diag
    backward = logsumexp(sim, axis=0) - diag
    return float(np.mean(forward + backward) / 2.0)


def ramp_weight(n: int, rate: float = defaults.RAMP_RATE,
                cap: float = defaults.RAMP_CAP) -> float:
    """Contrastive-loss weight at training step n: min(rate * n, cap)."""
    if n < 0:
        raise InvalidParameterError("step must be >= 0")
    return float(min(rate * n, cap))
