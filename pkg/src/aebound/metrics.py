"""Evaluation metrics: mean absolute error, relative error, compression ratio."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EvalRow:
    """One benchmark result row (CSV schema in the report writer)."""

    method: str
    epsilon_bound: float
    cr: float  # percent
    eps_abs: float
    eps_rel: float  # percent
    bits_code: int
    bits_residual: int
    bits_raw: int
    wall_time: float
    status: str = "ok"


def _pair(p, q) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {q.shape}")
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
        raise ValueError("inputs must be finite")
    return p, q


def mean_abs_error(p, q) -> float:
    p, q = _pair(p, q)
    return float(np.mean(np.abs(p - q)))


def relative_error(p, q) -> float:
    """Percent: sum of squared differences over sum of squared readings."""
    p, q = _pair(p, q)
    denom = float(np.sum(p**2))
    if denom == 0.0:
        raise ValueError("relative error undefined for an all-zero reference")
    return 100.0 * float(np.sum(np.abs(p - q) ** 2)) / denom


def compression_ratio(bits_code: int, bits_residual: int, bits_raw: int) -> float:
    """Percent reduction; negative values (expansion) are allowed."""
    if bits_raw <= 0:
        raise ValueError(f"bits_raw must be positive, got {bits_raw}")
    return (1.0 - (bits_code + bits_residual) / bits_raw) * 100.0
