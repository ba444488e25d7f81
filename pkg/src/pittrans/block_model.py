"""Regular 3D block model carrying open-pit and underground economics.

Money is held as integer cents throughout the package. Level ``k`` grows
downward, ``k = 0`` being the top bench. Cells without a row in the input
file are air: zero mass, zero value and no underground attributes.
"""

from __future__ import annotations

import csv
from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal, InvalidOperation
from pathlib import Path
from typing import NamedTuple

import numpy as np

HEADER = ("i", "j", "k", "tonnes", "ore_tonnes", "vp", "cp", "vu", "cu")


class BlockModelError(ValueError):
    """Raised when a block-model file or record set is malformed."""


@dataclass(frozen=True)
class GridSpec:
    nx: int
    ny: int
    nz: int
    dx: float = 1.0
    dy: float = 1.0
    dz: float = 1.0
    surface_elevation: float = 0.0

    def __post_init__(self):
        for name in ("nx", "ny", "nz"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        for name in ("dx", "dy", "dz"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)!r}")

    @property
    def shape(self) -> tuple[int, int, int]:
        """Array shape ``(nz, ny, nx)`` used for every per-cell array."""
        return (self.nz, self.ny, self.nx)

    @property
    def size(self) -> int:
        return self.nx * self.ny * self.nz

    def contains(self, i: int, j: int, k: int) -> bool:
        return 0 <= i < self.nx and 0 <= j < self.ny and 0 <= k < self.nz

    def flat(self, i, j, k):
        """Flat cell id in ``(k, j, i)`` order; works on scalars and arrays."""
        return (k * self.ny + j) * self.nx + i

    def unflat(self, flat) -> tuple:
        k, rem = np.divmod(flat, self.nx * self.ny)
        j, i = np.divmod(rem, self.nx)
        return i, j, k


class BlockIndex(NamedTuple):
    i: int
    j: int
    k: int


@dataclass(frozen=True)
class PitAttributes:
    """Open-pit attributes of a block; money in cents."""

    tonnes: float = 0.0
    ore_tonnes: float = 0.0
    vp: int = 0
    cp: int = 0


@dataclass(frozen=True)
class UndergroundAttributes:
    """Underground stope attributes; ``cu`` includes prorated access cost."""

    vu: int
    cu: int


AIR = PitAttributes()


def to_cents(value) -> int:
    """Parse a decimal money amount into integer cents (half away from zero)."""
    try:
        d = Decimal(str(value).strip())
    except InvalidOperation:
        raise BlockModelError(f"not a decimal number: {value!r}") from None
    if not d.is_finite():
        raise BlockModelError(f"money must be finite: {value!r}")
    return int((d * 100).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def format_cents(cents: int) -> str:
    sign = "-" if cents < 0 else ""
    whole, frac = divmod(abs(int(cents)), 100)
    return f"{sign}{whole}.{frac:02d}"


def depth_of_level(grid: GridSpec, k: int) -> float:
    """Depth below surface of the bottom of level ``k``."""
    if not 0 <= k < grid.nz:
        raise IndexError(f"level {k} outside [0, {grid.nz})")
    return (k + 1) * grid.dz


class _CellMapping(Mapping):
    """Read-only ``BlockIndex -> attributes`` view over dense arrays."""

    def __init__(self, grid, mask, build):
        self._grid = grid
        self._mask = mask
        self._build = build
        self._len = int(mask.sum())

    def __getitem__(self, key):
        i, j, k = key
        if not self._grid.contains(i, j, k) or not self._mask[k, j, i]:
            raise KeyError(key)
        return self._build(k, j, i)

    def __iter__(self) -> Iterator[BlockIndex]:
        for k, j, i in zip(*np.nonzero(self._mask)):
            yield BlockIndex(int(i), int(j), int(k))

    def __len__(self) -> int:
        return self._len


class BlockModel:
    """Immutable dense block model.

    ``pit`` and ``ug`` behave as sparse mappings keyed by :class:`BlockIndex`;
    the underlying arrays (shape ``grid.shape``) are exposed read-only for
    vectorised consumers.
    """

    def __init__(self, grid, present, tonnes, ore_tonnes, vp, cp, ug_mask, vu, cu):
        self.grid = grid
        arrays = dict(present=(present, bool), tonnes=(tonnes, np.float64),
                      ore_tonnes=(ore_tonnes, np.float64), vp=(vp, np.int64),
                      cp=(cp, np.int64), ug_mask=(ug_mask, bool),
                      vu=(vu, np.int64), cu=(cu, np.int64))
        for name, (arr, dtype) in arrays.items():
            arr = np.array(arr, dtype=dtype, copy=True)
            if arr.shape != grid.shape:
                raise BlockModelError(f"{name} has shape {arr.shape}, expected {grid.shape}")
            arr.flags.writeable = False
            setattr(self, name, arr)

    @classmethod
    def from_records(cls, grid: GridSpec, pit=None, ug=None) -> "BlockModel":
        """Build a model from ``{(i, j, k): PitAttributes}`` and ``{(i, j, k): UndergroundAttributes}``.

        Only index ranges are checked here; use :func:`validate` for the
        remaining invariants.
        """
        shape = grid.shape
        present = np.zeros(shape, bool)
        tonnes = np.zeros(shape)
        ore = np.zeros(shape)
        vp = np.zeros(shape, np.int64)
        cp = np.zeros(shape, np.int64)
        ug_mask = np.zeros(shape, bool)
        vu = np.zeros(shape, np.int64)
        cu = np.zeros(shape, np.int64)
        for (i, j, k), attrs in (pit or {}).items():
            if not grid.contains(i, j, k):
                raise BlockModelError(f"pit block {(i, j, k)} outside grid")
            present[k, j, i] = True
            tonnes[k, j, i] = attrs.tonnes
            ore[k, j, i] = attrs.ore_tonnes
            vp[k, j, i] = attrs.vp
            cp[k, j, i] = attrs.cp
        for (i, j, k), attrs in (ug or {}).items():
            if not grid.contains(i, j, k):
                raise BlockModelError(f"underground block {(i, j, k)} outside grid")
            ug_mask[k, j, i] = True
            vu[k, j, i] = attrs.vu
            cu[k, j, i] = attrs.cu
        return cls(grid, present, tonnes, ore, vp, cp, ug_mask, vu, cu)

    @property
    def pit(self) -> Mapping:
        return _CellMapping(self.grid, self.present, self._pit_attrs)

    @property
    def ug(self) -> Mapping:
        return _CellMapping(self.grid, self.ug_mask, self._ug_attrs)

    def _pit_attrs(self, k, j, i):
        return PitAttributes(float(self.tonnes[k, j, i]), float(self.ore_tonnes[k, j, i]),
                             int(self.vp[k, j, i]), int(self.cp[k, j, i]))

    def _ug_attrs(self, k, j, i):
        return UndergroundAttributes(int(self.vu[k, j, i]), int(self.cu[k, j, i]))

    def pit_at(self, idx) -> PitAttributes:
        """Pit attributes at ``idx``, air defaults when the cell has no row."""
        i, j, k = idx
        if not self.grid.contains(i, j, k):
            raise IndexError(f"{tuple(idx)} outside grid")
        return self._pit_attrs(k, j, i) if self.present[k, j, i] else AIR

    def ug_at(self, idx) -> UndergroundAttributes | None:
        i, j, k = idx
        if not self.grid.contains(i, j, k):
            raise IndexError(f"{tuple(idx)} outside grid")
        return self._ug_attrs(k, j, i) if self.ug_mask[k, j, i] else None

    @property
    def ug_flat(self) -> np.ndarray:
        """Flat cell ids of underground-defined blocks in ``(k, j, i)`` order."""
        return np.flatnonzero(self.ug_mask)

    @property
    def n_ug(self) -> int:
        return int(self.ug_mask.sum())

    def __eq__(self, other):
        if not isinstance(other, BlockModel):
            return NotImplemented
        if self.grid != other.grid:
            return False
        names = ("present", "tonnes", "ore_tonnes", "vp", "cp", "ug_mask", "vu", "cu")
        return all(np.array_equal(getattr(self, n), getattr(other, n)) for n in names)

    __hash__ = None

    def __repr__(self):
        return f"BlockModel(grid={self.grid}, pit_rows={int(self.present.sum())}, ug_rows={self.n_ug})"


def _parse_float(text, line, field):
    try:
        value = float(text)
    except ValueError:
        raise BlockModelError(f"line {line}: {field} is not numeric: {text!r}") from None
    if not np.isfinite(value):
        raise BlockModelError(f"line {line}: {field} must be finite")
    return value


def _parse_index(text, line, field):
    try:
        value = int(text)
    except ValueError:
        raise BlockModelError(f"line {line}: {field} is not an integer: {text!r}") from None
    if value < 0:
        raise BlockModelError(f"line {line}: {field} is negative")
    return value


def _parse_money(text, line, field):
    try:
        return to_cents(text)
    except BlockModelError as exc:
        raise BlockModelError(f"line {line}: {field}: {exc}") from None


def load_block_model(path, grid: GridSpec) -> BlockModel:
    """Read a block-model CSV with header ``i,j,k,tonnes,ore_tonnes,vp,cp,vu,cu``."""
    path = Path(path)
    pit, ug = {}, {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != HEADER:
            raise BlockModelError(f"{path}: header must be {','.join(HEADER)}, got {header}")
        for row in reader:
            line = reader.line_num
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(HEADER):
                raise BlockModelError(f"line {line}: expected {len(HEADER)} fields, got {len(row)}")
            i, j, k = (_parse_index(row[n], line, HEADER[n]) for n in range(3))
            if not grid.contains(i, j, k):
                raise BlockModelError(f"line {line}: index {(i, j, k)} outside grid {grid.shape[::-1]}")
            if (i, j, k) in pit:
                raise BlockModelError(f"line {line}: duplicate index {(i, j, k)}")
            tonnes = _parse_float(row[3], line, "tonnes")
            ore = _parse_float(row[4], line, "ore_tonnes")
            if tonnes < 0 or ore < 0:
                raise BlockModelError(f"line {line}: negative mass")
            if ore > tonnes:
                raise BlockModelError(f"line {line}: ore_tonnes {ore} exceeds tonnes {tonnes}")
            pit[(i, j, k)] = PitAttributes(tonnes, ore, _parse_money(row[5], line, "vp"),
                                           _parse_money(row[6], line, "cp"))
            vu_txt, cu_txt = row[7].strip(), row[8].strip()
            if bool(vu_txt) != bool(cu_txt):
                raise BlockModelError(f"line {line}: vu and cu must be both present or both blank")
            if vu_txt:
                ug[(i, j, k)] = UndergroundAttributes(_parse_money(vu_txt, line, "vu"),
                                                      _parse_money(cu_txt, line, "cu"))
    return BlockModel.from_records(grid, pit, ug)


def _format_mass(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def write_block_model(model: BlockModel, path) -> None:
    """Write ``model`` in the loader's CSV format.

    Underground attributes on air cells are written on a zero-mass row,
    which reloads as an identical model except that the cell becomes a
    present (zero) pit row.
    """
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        rows = model.present | model.ug_mask
        for k, j, i in zip(*np.nonzero(rows)):
            ug = model.ug_mask[k, j, i]
            w.writerow([
                i, j, k,
                _format_mass(model.tonnes[k, j, i]),
                _format_mass(model.ore_tonnes[k, j, i]),
                format_cents(model.vp[k, j, i]),
                format_cents(model.cp[k, j, i]),
                format_cents(model.vu[k, j, i]) if ug else "",
                format_cents(model.cu[k, j, i]) if ug else "",
            ])


@dataclass(frozen=True)
class Diagnostic:
    index: BlockIndex | None
    reason: str
    severity: str = "error"

    def __str__(self):
        where = "" if self.index is None else f"{tuple(self.index)}: "
        return f"{self.severity}: {where}{self.reason}"


def validate(model: BlockModel) -> list[Diagnostic]:
    """Check model invariants; an empty list means the model is valid.

    Underground stopes in air cells are reported as warnings only.
    """
    out = []

    def cells(mask):
        for k, j, i in zip(*np.nonzero(mask)):
            yield BlockIndex(int(i), int(j), int(k))

    for idx in cells(model.tonnes < 0):
        out.append(Diagnostic(idx, "negative tonnes"))
    for idx in cells(model.ore_tonnes < 0):
        out.append(Diagnostic(idx, "negative ore_tonnes"))
    for idx in cells(model.ore_tonnes > model.tonnes):
        out.append(Diagnostic(idx, "ore_tonnes exceeds tonnes"))
    for idx in cells(~np.isfinite(model.tonnes) | ~np.isfinite(model.ore_tonnes)):
        out.append(Diagnostic(idx, "non-finite mass"))
    air = ~model.present
    for idx in cells(air & ((model.tonnes != 0) | (model.ore_tonnes != 0) | (model.vp != 0) | (model.cp != 0))):
        out.append(Diagnostic(idx, "air block carries pit attributes"))
    for idx in cells(~model.ug_mask & ((model.vu != 0) | (model.cu != 0))):
        out.append(Diagnostic(idx, "underground values without a stope"))
    for idx in cells(model.ug_mask & air):
        out.append(Diagnostic(idx, "underground stope in air block", "warning"))
    return out
