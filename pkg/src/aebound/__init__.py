"""Error-bounded lossy sensor-data compression with autoencoder codes."""

from . import autoencoder, baselines, codec, dataset, harness, metrics, optimizer, residual, sphering

__all__ = [
    "autoencoder",
    "baselines",
    "codec",
    "dataset",
    "harness",
    "metrics",
    "optimizer",
    "residual",
    "sphering",
]
