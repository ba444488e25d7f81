"""Turn a closure back into pit / crown pillar / underground block sets and report metrics."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, fields
from functools import cached_property
from pathlib import Path

import numpy as np

from .block_model import BlockIndex, BlockModel, depth_of_level
from .economics import VertexWeights
from .precedence import CrownSpec
from .solver import ClosureSolution, VertexMap

MONEY_FIELDS = ("pit_value", "ug_value", "total_value", "objective")


class InterpretationError(ValueError):
    pass


def _cells(mask) -> frozenset:
    return frozenset(BlockIndex(int(i), int(j), int(k)) for k, j, i in zip(*np.nonzero(mask)))


@dataclass(frozen=True, eq=False)
class TransitionOutcome:
    """Grid-shaped boolean masks; the set-valued properties are derived from them.

    ``ug_considered`` marks the stopes that take part in the partition
    (every stope, except in pit-only runs where none do).
    """

    pit_mask: np.ndarray
    ug_unavailable_mask: np.ndarray
    ug_considered: np.ndarray

    @property
    def crown_mask(self) -> np.ndarray:
        return self.ug_unavailable_mask & ~self.pit_mask

    @property
    def ug_available_mask(self) -> np.ndarray:
        return self.ug_considered & ~self.ug_unavailable_mask

    @cached_property
    def pit_blocks(self) -> frozenset:
        return _cells(self.pit_mask)

    @cached_property
    def ug_unavailable(self) -> frozenset:
        return _cells(self.ug_unavailable_mask)

    @cached_property
    def crown_pillar(self) -> frozenset:
        return _cells(self.crown_mask)

    @cached_property
    def ug_available(self) -> frozenset:
        return _cells(self.ug_available_mask)


def empty_outcome(model: BlockModel, consider_ug: bool = True) -> TransitionOutcome:
    shape = model.grid.shape
    considered = model.ug_mask.copy() if consider_ug else np.zeros(shape, bool)
    return TransitionOutcome(np.zeros(shape, bool), np.zeros(shape, bool), considered)


def extract_outcome(solution: ClosureSolution, mapping: VertexMap, model: BlockModel,
                    mode: str = "dual") -> TransitionOutcome:
    """Partition blocks according to ``solution``.

    ``mode`` is the weight mode the problem was built with. Conventional
    runs have no underground vertices, so a stope counts as lost exactly
    when its own cell is mined.
    """
    if mapping.grid != model.grid or len(solution.mask) != mapping.n:
        raise InterpretationError("solution does not match the vertex map")
    shape = model.grid.shape
    mask = np.asarray(solution.mask, bool)
    pit = mask[:mapping.n_pit].reshape(shape).copy()
    if mode == "pit-only":
        return TransitionOutcome(pit, np.zeros(shape, bool), np.zeros(shape, bool))
    if mode == "conventional":
        return TransitionOutcome(pit, pit & model.ug_mask, model.ug_mask.copy())
    if mode != "dual":
        raise ValueError(f"unknown weight mode {mode!r}")
    if not np.array_equal(mapping.ug_flat, model.ug_flat):
        raise InterpretationError("vertex map stopes differ from the model's")
    lost = np.zeros(model.grid.size, bool)
    lost[mapping.ug_flat] = mask[mapping.n_pit:]
    return TransitionOutcome(pit, lost.reshape(shape), model.ug_mask.copy())


def pit_bottoms(outcome: TransitionOutcome) -> np.ndarray:
    """Deepest mined level per column, ``(ny, nx)``; -1 where nothing is mined."""
    pit = outcome.pit_mask
    nz = pit.shape[0]
    any_mined = pit.any(axis=0)
    deepest = nz - 1 - np.argmax(pit[::-1], axis=0)
    return np.where(any_mined, deepest, -1)


def verify_crown_thickness(outcome: TransitionOutcome, crown: CrownSpec,
                           model: BlockModel) -> list[BlockIndex]:
    """Stopes inside the required crown below each pit bottom that were left available."""
    t = crown.thickness_levels
    bottoms = pit_bottoms(outcome)
    available = outcome.ug_available_mask
    out = []
    for j, i in zip(*np.nonzero(bottoms >= 0)):
        bottom = int(bottoms[j, i])
        for k in range(bottom + 1, min(bottom + t, model.grid.nz - 1) + 1):
            if k - t >= 0 and model.ug_mask[k, j, i] and available[k, j, i]:
                out.append(BlockIndex(int(i), int(j), k))
    return out


@dataclass(frozen=True)
class SummaryReport:
    """Run summary; money in integer cents, mass in tonnes.

    ``objective`` is the closure value (pit value net of the discounted
    opportunity cost of lost stopes); ``ug_value`` is undiscounted.
    """

    mode: str = ""
    n_vertices: int = 0
    n_b_arcs: int = 0
    n_c_arcs: int = 0
    n_d_arcs: int = 0
    pit_total_tonnes: float = 0.0
    pit_ore_tonnes: float = 0.0
    pit_depth_m: float = 0.0
    ug_level_count: int = 0
    ug_top_level_min: int | None = None
    ug_top_level_max: int | None = None
    pit_value: int = 0
    ug_value: int = 0
    total_value: int = 0
    objective: int = 0
    solve_seconds: float = 0.0

    def to_dict(self, timing: bool = True) -> dict:
        out = asdict(self)
        for name in MONEY_FIELDS:
            out[name] = out[name] / 100
        if not timing:
            del out["solve_seconds"]
        return out

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "SummaryReport":
        kwargs = {}
        for f in fields(cls):
            if f.name in data:
                value = data[f.name]
                if f.name in MONEY_FIELDS:
                    value = int(round(value * 100))
                kwargs[f.name] = value
        return cls(**kwargs)


def summarize(outcome: TransitionOutcome, model: BlockModel, weights: VertexWeights,
              timings: dict | None = None, arc_counts=(0, 0, 0),
              n_vertices: int = 0, mode: str | None = None) -> SummaryReport:
    pit = outcome.pit_mask
    avail = outcome.ug_available_mask
    pit_value = int((model.vp - model.cp)[pit].sum())
    ug_value = int((model.vu - model.cu)[avail].sum())
    objective = int(weights.pit[pit].sum()) + int(weights.ug[outcome.ug_unavailable_mask & weights.ug_mask].sum())
    levels = np.nonzero(pit.any(axis=(1, 2)))[0]
    depth = depth_of_level(model.grid, int(levels.max())) if len(levels) else 0.0
    ug_levels = np.nonzero(avail.any(axis=(1, 2)))[0]
    col_has = avail.any(axis=0)
    tops = np.argmax(avail, axis=0)[col_has]
    b, c, d = arc_counts
    return SummaryReport(
        mode=mode or weights.mode,
        n_vertices=int(n_vertices),
        n_b_arcs=int(b), n_c_arcs=int(c), n_d_arcs=int(d),
        pit_total_tonnes=float(model.tonnes[pit].sum()),
        pit_ore_tonnes=float(model.ore_tonnes[pit].sum()),
        pit_depth_m=float(depth),
        ug_level_count=len(ug_levels),
        ug_top_level_min=int(tops.min()) if len(tops) else None,
        ug_top_level_max=int(tops.max()) if len(tops) else None,
        pit_value=pit_value,
        ug_value=ug_value,
        total_value=pit_value + ug_value,
        objective=objective,
        solve_seconds=float((timings or {}).get("solve_seconds", 0.0)),
    )


def write_membership(outcome: TransitionOutcome, path) -> None:
    """``i,j,k,in_pit,in_crown,ug_available`` for every cell, in ``(k, j, i)`` order."""
    pit = outcome.pit_mask.ravel().astype(int)
    crown = outcome.crown_mask.ravel().astype(int)
    avail = outcome.ug_available_mask.ravel().astype(int)
    nz, ny, nx = outcome.pit_mask.shape
    k, j, i = np.unravel_index(np.arange(pit.size), (nz, ny, nx))
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "k", "in_pit", "in_crown", "ug_available"])
        w.writerows(zip(i.tolist(), j.tolist(), k.tolist(), pit.tolist(), crown.tolist(), avail.tolist()))


def write_pit_surface(outcome: TransitionOutcome, path) -> None:
    bottoms = pit_bottoms(outcome)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "bottom_level"])
        ny, nx = bottoms.shape
        for j in range(ny):
            for i in range(nx):
                w.writerow([i, j, int(bottoms[j, i])])
