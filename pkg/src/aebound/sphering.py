"""Input normalization for the sigmoid autoencoder.

Each vector is centered on its own mean, truncated at three global standard
deviations, and rescaled into [0.1, 0.9]. The global scale is estimated once
from the training set and shipped with the model, so both ends of the link
apply the same mapping.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .dataset import DataVector
from .errors import DegenerateDataError


@dataclass(frozen=True)
class SpheringScale:
    """Global standard deviation of mean-centered training entries."""

    sigma: float

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma}")


def _as_array(p) -> np.ndarray:
    if isinstance(p, DataVector):
        return p.entries
    return np.asarray(p, dtype=np.float64)


def estimate_sigma(training: Iterable) -> SpheringScale:
    """Population standard deviation of all per-vector-centered training entries."""
    centered = [(_as_array(p) - _as_array(p).mean()) for p in training]
    if not centered:
        raise ValueError("training set is empty")
    pooled = np.concatenate(centered)
    sigma = float(np.sqrt(np.mean(pooled**2)))  # centered entries have zero mean per vector pool
    if sigma == 0.0:
        raise DegenerateDataError("all centered training entries are zero")
    return SpheringScale(sigma=sigma)


def normalize(p, sigma: SpheringScale) -> np.ndarray:
    """Map a raw vector into [0.1, 0.9] with 3-sigma truncation."""
    arr = _as_array(p)
    if not np.all(np.isfinite(arr)):
        raise ValueError("input contains non-finite entries")
    s3 = 3.0 * sigma.sigma
    centered = np.clip(arr - arr.mean(), -s3, s3)
    # the final clip pins boundary values that float rounding would push
    # a few ulps outside the advertised range
    return np.clip(0.5 + (0.4 / s3) * centered, 0.1, 0.9)


def denormalize(x, m: float, sigma: SpheringScale) -> np.ndarray:
    """Inverse of `normalize` (up to truncated outliers) given the vector mean."""
    arr = np.asarray(x, dtype=np.float64)
    return (3.0 * sigma.sigma / 0.4) * (arr - 0.5) + m
