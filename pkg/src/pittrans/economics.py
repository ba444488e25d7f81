"""Vertex weights for the pit-only, conventional and dual optimisation modes."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .block_model import BlockIndex, BlockModel, PitAttributes, UndergroundAttributes

WEIGHT_MODES = ("pit-only", "conventional", "dual")


@dataclass(frozen=True)
class EconomicParams:
    ug_discount: float = 1.0

    def __post_init__(self):
        if not 0 < self.ug_discount <= 1:
            raise ValueError(f"ug_discount must be in (0, 1], got {self.ug_discount!r}")

    @property
    def discount_fraction(self) -> Fraction:
        # decimal text, so 0.1 means exactly one tenth
        return Fraction(str(self.ug_discount))


def _scale_round(values, frac: Fraction):
    """``values * frac`` rounded half away from zero; exact integer arithmetic."""
    p, q = frac.numerator, frac.denominator
    if isinstance(values, np.ndarray):
        num = values.astype(np.int64) * p
        mag = (2 * np.abs(num) + q) // (2 * q)
        return np.sign(num) * mag
    num = int(values) * p
    return (1 if num >= 0 else -1) * ((2 * abs(num) + q) // (2 * q))


def pit_weight(pit: PitAttributes) -> int:
    return pit.vp - pit.cp


def ug_opportunity_weight(ug: UndergroundAttributes, params: EconomicParams) -> int:
    """Negated (discounted) stope value: the cost of giving the stope up."""
    return -_scale_round(ug.vu - ug.cu, params.discount_fraction)


def conventional_weight(pit: PitAttributes, ug: UndergroundAttributes | None,
                        params: EconomicParams) -> int:
    w = pit_weight(pit)
    if ug is not None:
        w += ug_opportunity_weight(ug, params)
    return w


class _WeightView(Mapping):
    def __init__(self, grid, mask, arr):
        self._grid, self._mask, self._arr = grid, mask, arr

    def __getitem__(self, key):
        i, j, k = key
        if not self._grid.contains(i, j, k) or not self._mask[k, j, i]:
            raise KeyError(key)
        return int(self._arr[k, j, i])

    def __iter__(self):
        for k, j, i in zip(*np.nonzero(self._mask)):
            yield BlockIndex(int(i), int(j), int(k))

    def __len__(self):
        return int(self._mask.sum())


@dataclass(frozen=True, eq=False)
class VertexWeights:
    """Per-vertex weights in cents.

    ``pit`` holds a weight for every grid cell (air is 0). ``ug`` is a dense
    grid array meaningful only where ``ug_mask`` is set; ``ug_mask`` is
    all-false outside the dual mode.
    """

    mode: str
    pit: np.ndarray
    ug: np.ndarray
    ug_mask: np.ndarray
    grid: object = field(repr=False)

    @property
    def wp(self) -> Mapping:
        return _WeightView(self.grid, np.ones(self.grid.shape, bool), self.pit)

    @property
    def wu(self) -> Mapping:
        return _WeightView(self.grid, self.ug_mask, self.ug)


def ug_weight_array(model: BlockModel, params: EconomicParams) -> np.ndarray:
    """``ug_opportunity_weight`` on every cell; zero where no stope exists."""
    value = np.where(model.ug_mask, model.vu - model.cu, 0)
    return -_scale_round(value, params.discount_fraction)


def build_vertex_weights(model: BlockModel, params: EconomicParams, mode: str) -> VertexWeights:
    if mode not in WEIGHT_MODES:
        raise ValueError(f"mode must be one of {WEIGHT_MODES}, got {mode!r}")
    wp = (model.vp - model.cp).astype(np.int64)
    no_ug = np.zeros(model.grid.shape, bool)
    zeros = np.zeros(model.grid.shape, np.int64)
    if mode == "pit-only":
        out = VertexWeights(mode, wp, zeros, no_ug, model.grid)
    elif mode == "conventional":
        out = VertexWeights(mode, wp + ug_weight_array(model, params), zeros, no_ug, model.grid)
    else:
        out = VertexWeights(mode, wp, ug_weight_array(model, params), model.ug_mask.copy(), model.grid)
    for arr in (out.pit, out.ug, out.ug_mask):
        arr.flags.writeable = False
    return out
