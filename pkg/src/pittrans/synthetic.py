"""Deterministic synthetic deposit: a plunging elliptical ore shell in waste.

The shell runs from ``ore_top_level`` to the bottom of the grid, so deep ore
is reachable only by an underground mine. Stopes (underground attributes)
are defined inside the shell below ``oxide_cap_levels`` wherever the stope
pays for itself.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .block_model import HEADER, BlockModel, GridSpec, format_cents


@dataclass(frozen=True)
class SyntheticDepositSpec:
    nx: int = 60
    ny: int = 60
    nz: int = 40
    dx: float = 30.0
    dy: float = 30.0
    dz: float = 30.0
    # ore shell, in block units; the centre moves by drift_* per level
    center_x: float | None = None
    center_y: float | None = None
    drift_x: float = 0.12
    drift_y: float = 0.04
    radius_x: float = 9.0
    radius_y: float = 6.0
    radius_growth: float = 0.03
    ore_top_level: int = 2
    grade_min: float = 0.4
    grade_max: float = 2.2
    grade_noise: float = 0.25
    oxide_cap_levels: int = 4
    # economics, dollars
    density: float = 2.7
    metal_value: float = 25.0
    pit_mining_cost: float = 2.0
    pit_cost_per_level: float = 0.25
    processing_cost: float = 12.0
    ug_mining_cost: float = 28.0
    ug_access_cost: float = 150000.0
    seed: int = 1

    def __post_init__(self):
        GridSpec(self.nx, self.ny, self.nz, self.dx, self.dy, self.dz)
        if not 0 <= self.oxide_cap_levels <= self.nz:
            raise ValueError("oxide_cap_levels must be within [0, nz]")
        if self.grade_max < self.grade_min:
            raise ValueError("grade_max < grade_min")

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.nx, self.ny, self.nz, self.dx, self.dy, self.dz)

    @classmethod
    def from_json(cls, path) -> "SyntheticDepositSpec":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown synthetic spec keys: {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2) + "\n"


DESK_SPEC = SyntheticDepositSpec()
# >= 200k vertices and >= 3M arcs with the default 45 degree, L=5 slopes
DEMO_SPEC = SyntheticDepositSpec(nx=72, ny=72, nz=44, radius_x=11.0, radius_y=7.0)


def _cents(dollars: np.ndarray) -> np.ndarray:
    return np.rint(dollars * 100).astype(np.int64)


def generate_arrays(spec: SyntheticDepositSpec) -> dict:
    """Per-cell arrays ``tonnes, ore_tonnes, vp, cp, ug_mask, vu, cu`` (money in cents)."""
    rng = np.random.default_rng(spec.seed)
    shape = (spec.nz, spec.ny, spec.nx)
    k, j, i = np.indices(shape)
    cx = (spec.nx - 1) / 2 if spec.center_x is None else spec.center_x
    cy = (spec.ny - 1) / 2 if spec.center_y is None else spec.center_y
    grow = 1 + spec.radius_growth * k
    r2 = (((i - cx - spec.drift_x * k) / (spec.radius_x * grow)) ** 2
          + ((j - cy - spec.drift_y * k) / (spec.radius_y * grow)) ** 2)
    shell = (r2 <= 1.0) & (k >= spec.ore_top_level)

    noise = rng.lognormal(mean=0.0, sigma=spec.grade_noise, size=shape)
    grade = np.where(shell, (spec.grade_min + (spec.grade_max - spec.grade_min) * (1 - r2)) * noise, 0.0)

    tonnes_block = spec.dx * spec.dy * spec.dz * spec.density
    tonnes = np.full(shape, tonnes_block)
    revenue = tonnes * grade * spec.metal_value
    is_ore = shell & (revenue >= tonnes * spec.processing_cost)
    ore_tonnes = np.where(is_ore, tonnes, 0.0)
    vp = np.where(is_ore, revenue, 0.0)
    cp = tonnes * (spec.pit_mining_cost + spec.pit_cost_per_level * k) + ore_tonnes * spec.processing_cost

    vu = revenue
    cu = tonnes * (spec.ug_mining_cost + spec.processing_cost) + spec.ug_access_cost
    vu_c, cu_c = _cents(vu), _cents(cu)
    # only stopes that strictly pay for themselves
    ug_mask = shell & (k >= spec.oxide_cap_levels) & (vu_c > cu_c)
    return dict(tonnes=tonnes, ore_tonnes=ore_tonnes, vp=_cents(vp), cp=_cents(cp),
                ug_mask=ug_mask, vu=np.where(ug_mask, vu_c, 0), cu=np.where(ug_mask, cu_c, 0))


def generate_model(spec: SyntheticDepositSpec) -> BlockModel:
    a = generate_arrays(spec)
    present = np.ones(spec.grid.shape, bool)
    return BlockModel(spec.grid, present, a["tonnes"], a["ore_tonnes"], a["vp"], a["cp"],
                      a["ug_mask"], a["vu"], a["cu"])


def _mass_text(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def run_gen_synthetic(spec: SyntheticDepositSpec, out) -> Path:
    """Write the synthetic block model CSV; identical spec gives identical bytes."""
    a = generate_arrays(spec)
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    nz, ny, nx = spec.grid.shape
    with out.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        for k in range(nz):
            for j in range(ny):
                for i in range(nx):
                    ug = a["ug_mask"][k, j, i]
                    w.writerow([
                        i, j, k,
                        _mass_text(a["tonnes"][k, j, i]),
                        _mass_text(a["ore_tonnes"][k, j, i]),
                        format_cents(a["vp"][k, j, i]),
                        format_cents(a["cp"][k, j, i]),
                        format_cents(a["vu"][k, j, i]) if ug else "",
                        format_cents(a["cu"][k, j, i]) if ug else "",
                    ])
    return out
