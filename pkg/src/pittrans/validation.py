"""Input checks shared by the estimator and the CLI."""

from __future__ import annotations

import numpy as np

from .block_model import BlockModel, GridSpec

MODES = ("pit-only", "conventional", "dual-identity", "crown-simple", "crown-shaped")
CROWN_MODES = ("crown-simple", "crown-shaped")

# optimisation mode -> weight mode
WEIGHT_MODE = {
    "pit-only": "pit-only",
    "conventional": "conventional",
    "dual-identity": "dual",
    "crown-simple": "dual",
    "crown-shaped": "dual",
}


def check_block_model(X) -> BlockModel:
    if not isinstance(X, BlockModel):
        raise TypeError(f"expected a BlockModel, got {type(X).__name__}")
    return X


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


def check_block_indices(X, grid: GridSpec) -> np.ndarray:
    """Coerce ``X`` to an ``(n, 3)`` int array of in-grid ``(i, j, k)`` rows."""
    arr = np.asarray(X)
    if arr.ndim == 1 and arr.size == 3:
        arr = arr.reshape(1, 3)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"expected block indices of shape (n, 3), got {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise ValueError("block indices must be integers")
    arr = arr.astype(np.int64)
    upper = np.array([grid.nx, grid.ny, grid.nz])
    if np.any(arr < 0) or np.any(arr >= upper):
        raise IndexError("block index outside the grid")
    return arr
