"""Seeded Gaussian latent initialization."""

from __future__ import annotations

import numpy as np


class InvalidDims(Exception):
    """Latent dimensions must all be positive."""


def init_latent(shape: tuple[int, ...], seed: int) -> np.ndarray:
    """Standard-normal float32 raster, deterministic per (shape, seed)."""
    dims = tuple(int(d) for d in shape)
    if not dims or any(d < 1 for d in dims):
        raise InvalidDims(f"latent shape must be positive, got {shape}")
    return np.random.default_rng(seed).standard_normal(dims, dtype=np.float32)
