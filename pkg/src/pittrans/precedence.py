"""Arc families of the dual block-model digraph.

Every arc ``(u, v)`` reads "mining ``u`` requires ``v``". Pit and
underground vertices are both addressed by flat grid cell id; the solver
module turns them into dense vertex ids.

* B: slope precedence inside the pit model (deeper block -> block above).
* C: pit block -> underground block, directly below it by the crown offset.
* D: per-level directed cycles over underground blocks (crown shape).
"""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .block_model import BlockIndex, BlockModel, GridSpec

# relative slack on the cone test, absorbs tan() rounding at exact boundaries
_CONE_RTOL = 1e-9


class PrecedenceError(ValueError):
    pass


@dataclass(frozen=True)
class SlopeSpec:
    slope_deg: float = 45.0
    template_levels: int = 5

    def __post_init__(self):
        if not 0 < self.slope_deg < 90:
            raise ValueError(f"slope_deg must be in (0, 90), got {self.slope_deg!r}")
        if int(self.template_levels) != self.template_levels or self.template_levels < 1:
            raise ValueError(f"template_levels must be a positive integer, got {self.template_levels!r}")


@dataclass(frozen=True)
class CrownSpec:
    thickness_levels: int

    def __post_init__(self):
        if int(self.thickness_levels) != self.thickness_levels or self.thickness_levels < 1:
            raise ValueError(f"thickness_levels must be an integer >= 1, got {self.thickness_levels!r}")

    def check_grid(self, grid: GridSpec) -> None:
        if self.thickness_levels >= grid.nz:
            raise ValueError(f"crown thickness {self.thickness_levels} must be < nz={grid.nz}")


@dataclass(frozen=True)
class OffsetTemplate:
    offsets: tuple[tuple[int, int, int], ...]

    def __len__(self):
        return len(self.offsets)

    def __iter__(self):
        return iter(self.offsets)


@dataclass(frozen=True)
class CrownGroup:
    level: int
    members: tuple[BlockIndex, ...]


@dataclass(frozen=True)
class CrownShapeTemplate:
    groups: tuple[CrownGroup, ...] = ()


@dataclass(frozen=True, eq=False)
class ArcSet:
    """Arc arrays of shape ``(m, 2)`` holding flat cell ids."""

    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    @property
    def counts(self) -> tuple[int, int, int]:
        return len(self.b), len(self.c), len(self.d)


def _empty_arcs():
    return np.empty((0, 2), np.int64)


def cone_offsets(slope: SlopeSpec, grid: GridSpec) -> set[tuple[int, int, int]]:
    """All block-centre offsets inside the slope cone over ``template_levels`` levels.

    Lateral offsets that can never land inside the grid (``|di| >= nx`` or
    ``|dj| >= ny``) are left out, which is what makes a ``ny == 1`` model 2D.
    """
    tan = math.tan(math.radians(slope.slope_deg))
    out = set()
    for depth in range(1, slope.template_levels + 1):
        radius = depth * grid.dz / tan
        ri = min(int(radius / grid.dx) + 1, grid.nx - 1)
        rj = min(int(radius / grid.dy) + 1, grid.ny - 1)
        limit = radius * radius * (1 + _CONE_RTOL)
        for di in range(-ri, ri + 1):
            for dj in range(-rj, rj + 1):
                if (di * grid.dx) ** 2 + (dj * grid.dy) ** 2 <= limit:
                    out.add((di, dj, -depth))
    return out


def build_slope_template(slope: SlopeSpec, grid: GridSpec) -> OffsetTemplate:
    """Transitively reduced cone template.

    An offset is dropped when it equals a sum of two or more cone offsets;
    the remaining set generates exactly the same precedences.
    """
    cone = cone_offsets(slope, grid)
    ordered = sorted(cone, key=lambda o: (-o[2], o[1], o[0]))

    @lru_cache(maxsize=None)
    def is_sum(v):
        # v expressible as a sum of >= 1 cone offsets
        if v in cone:
            return True
        return any(v[2] - a[2] <= -1 and is_sum((v[0] - a[0], v[1] - a[1], v[2] - a[2]))
                   for a in ordered)

    reduced = tuple(
        o for o in ordered
        if not any(o[2] - a[2] <= -1 and is_sum((o[0] - a[0], o[1] - a[1], o[2] - a[2]))
                   for a in ordered)
    )
    return OffsetTemplate(reduced)


def build_b_arcs(model: BlockModel, template: OffsetTemplate) -> np.ndarray:
    """Slope arcs from every cell to each in-grid template offset above it."""
    grid = model.grid
    nz, ny, nx = grid.shape
    chunks = []
    for di, dj, dk in template:
        # sources x with x + offset inside the grid
        i0, i1 = max(0, -di), min(nx, nx - di)
        j0, j1 = max(0, -dj), min(ny, ny - dj)
        k0, k1 = max(0, -dk), nz
        if i0 >= i1 or j0 >= j1 or k0 >= k1:
            continue
        k, j, i = np.meshgrid(np.arange(k0, k1), np.arange(j0, j1), np.arange(i0, i1), indexing="ij")
        src = grid.flat(i, j, k).ravel()
        dst = grid.flat(i + di, j + dj, k + dk).ravel()
        chunks.append(np.stack([src, dst], axis=1))
    if not chunks:
        return _empty_arcs()
    return np.concatenate(chunks).astype(np.int64)


def build_c_arcs(model: BlockModel, offset_levels: int) -> np.ndarray:
    """One arc per stope from the pit cell ``offset_levels`` above it; clipped at surface."""
    if offset_levels < 0:
        raise ValueError("offset_levels must be >= 0")
    grid = model.grid
    ug = model.ug_flat
    i, j, k = grid.unflat(ug)
    keep = k - offset_levels >= 0
    src = grid.flat(i[keep], j[keep], k[keep] - offset_levels)
    return np.stack([src, ug[keep]], axis=1).astype(np.int64).reshape(-1, 2)


def check_crown_shape(shape: CrownShapeTemplate, model: BlockModel) -> None:
    seen = {}
    for gid, group in enumerate(shape.groups):
        if not group.members:
            raise PrecedenceError(f"group {gid} is empty")
        for m in group.members:
            i, j, k = m
            if k != group.level:
                raise PrecedenceError(f"group {gid}: member {tuple(m)} not on level {group.level}")
            if not model.grid.contains(i, j, k) or not model.ug_mask[k, j, i]:
                raise PrecedenceError(f"group {gid}: member {tuple(m)} has no underground attributes")
            if (i, j, k) in seen:
                raise PrecedenceError(f"block {tuple(m)} in groups {seen[(i, j, k)]} and {gid}")
            seen[(i, j, k)] = gid


def build_d_arcs(shape: CrownShapeTemplate, model: BlockModel) -> np.ndarray:
    """Close each group into a directed cycle ordered by ``(i, j)``.

    Singleton groups emit nothing. Raises :class:`PrecedenceError` for
    overlapping groups, mixed levels or members without a stope.
    """
    check_crown_shape(shape, model)
    grid = model.grid
    arcs = []
    for group in shape.groups:
        members = sorted(group.members, key=lambda m: (m[0], m[1]))
        if len(members) < 2:
            continue
        ids = [grid.flat(m[0], m[1], m[2]) for m in members]
        arcs.extend(zip(ids, ids[1:] + ids[:1]))
    if not arcs:
        return _empty_arcs()
    return np.asarray(arcs, np.int64)


def generate_flat_level_groups(model: BlockModel) -> CrownShapeTemplate:
    """One group per level holding every stope on it (a flat crown top)."""
    groups = []
    for k in range(model.grid.nz):
        jj, ii = np.nonzero(model.ug_mask[k])
        if len(ii):
            members = tuple(BlockIndex(int(i), int(j), k) for i, j in sorted(zip(ii, jj)))
            groups.append(CrownGroup(k, members))
    return CrownShapeTemplate(tuple(groups))


def load_crown_shape(path) -> CrownShapeTemplate:
    """Read a ``level,group,i,j`` CSV into a crown-shape template."""
    groups: dict[int, tuple[int, list]] = {}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["level", "group", "i", "j"]:
            raise PrecedenceError(f"{path}: header must be level,group,i,j")
        for row in reader:
            if not row:
                continue
            if len(row) != 4:
                raise PrecedenceError(f"line {reader.line_num}: expected 4 fields")
            try:
                level, gid, i, j = (int(x) for x in row)
            except ValueError:
                raise PrecedenceError(f"line {reader.line_num}: non-integer field") from None
            if min(level, gid, i, j) < 0:
                raise PrecedenceError(f"line {reader.line_num}: negative field")
            lvl, members = groups.setdefault(gid, (level, []))
            if lvl != level:
                raise PrecedenceError(f"line {reader.line_num}: group {gid} spans levels {lvl} and {level}")
            members.append(BlockIndex(i, j, level))
    return CrownShapeTemplate(tuple(CrownGroup(lvl, tuple(m)) for _, (lvl, m) in sorted(groups.items())))


def write_crown_shape(shape: CrownShapeTemplate, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["level", "group", "i", "j"])
        for gid, group in enumerate(shape.groups):
            for m in group.members:
                w.writerow([group.level, gid, m[0], m[1]])


def build_arcs(model: BlockModel, slope: SlopeSpec, c_offset: int | None = None,
               shape: CrownShapeTemplate | None = None) -> ArcSet:
    """Assemble B, and optionally C and D, for one run."""
    b = build_b_arcs(model, build_slope_template(slope, model.grid))
    c = build_c_arcs(model, c_offset) if c_offset is not None else _empty_arcs()
    d = build_d_arcs(shape, model) if shape is not None else _empty_arcs()
    return ArcSet(b, c, d)


def iter_cycles(d_arcs: Iterable) -> list[list[int]]:
    """Split a D-arc list into its vertex-disjoint cycles."""
    succ = {int(u): int(v) for u, v in d_arcs}
    done, cycles = set(), []
    for start in succ:
        if start in done:
            continue
        cyc, v = [], start
        while v not in done:
            done.add(v)
            cyc.append(v)
            v = succ[v]
        cycles.append(cyc)
    return cycles
