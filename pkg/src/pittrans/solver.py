"""Maximum-closure solving via minimum cut, plus an exhaustive oracle.

A set ``Y`` is closed when every arc ``(u, v)`` with ``u`` in ``Y`` also has
``v`` in ``Y``. The solver returns the canonical optimum: the largest of
the optimal closures, which is unique because optimal closures are closed
under union.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._maxflow import max_preflow, residual_csr
from .block_model import BlockIndex, BlockModel, GridSpec
from .economics import VertexWeights
from .precedence import ArcSet

BRUTE_FORCE_MAX_N = 24


class AssemblyError(ValueError):
    pass


def _as_arcs(arcs) -> np.ndarray:
    arr = np.asarray(arcs, dtype=np.int64)
    if arr.size == 0:
        return np.empty((0, 2), np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"arcs must have shape (m, 2), got {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class ClosureProblem:
    """Weighted digraph; ``weights`` in integer cents, ``arcs`` as ``(from, to)`` rows."""

    n: int
    weights: np.ndarray
    arcs: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.int64).reshape(-1)
        a = _as_arcs(self.arcs)
        if len(w) != self.n:
            raise ValueError(f"{len(w)} weights for n={self.n}")
        if len(a) and (a.min() < 0 or a.max() >= self.n):
            raise ValueError("arc endpoint outside [0, n)")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "arcs", a)


@dataclass(frozen=True, eq=False)
class ClosureSolution:
    mask: np.ndarray
    objective: int

    @cached_property
    def members(self) -> frozenset:
        return frozenset(np.flatnonzero(self.mask).tolist())


def is_closed(mask, arcs) -> bool:
    arcs = _as_arcs(arcs)
    if not len(arcs):
        return True
    mask = np.asarray(mask, bool)
    return not np.any(mask[arcs[:, 0]] & ~mask[arcs[:, 1]])


def solve_max_closure(problem: ClosureProblem) -> ClosureSolution:
    """Exact maximum closure through a source/sink minimum cut.

    Positive vertices hang off the source with capacity ``w``, negative ones
    feed the sink with capacity ``-w``, and precedence arcs get a capacity
    larger than any finite cut. The closure is every vertex that cannot
    reach the sink in the residual network, which is the maximal optimum.
    """
    n = problem.n
    w = problem.weights
    if n == 0:
        return ClosureSolution(np.zeros(0, bool), 0)
    arcs = problem.arcs
    if len(arcs):
        arcs = arcs[arcs[:, 0] != arcs[:, 1]]
    s, t = n, n + 1
    pos = np.flatnonzero(w > 0)
    neg = np.flatnonzero(w < 0)
    inf = int(w[pos].sum()) + 1
    tails = np.concatenate([arcs[:, 0], np.full(len(pos), s), neg])
    heads = np.concatenate([arcs[:, 1], pos, np.full(len(neg), t)])
    caps = np.concatenate([np.full(len(arcs), inf, np.int64), w[pos], -w[neg]])
    start, to, cap, twin = residual_csr(n + 2, tails, heads, caps)
    height = max_preflow(n + 2, s, t, start, to, cap, twin)
    mask = height[:n] >= n + 2
    return ClosureSolution(mask, int(w[mask].sum()))


def _popcount(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint32)
    x = x - ((x >> 1) & 0x55555555)
    x = (x & 0x33333333) + ((x >> 2) & 0x33333333)
    x = (x + (x >> 4)) & 0x0F0F0F0F
    return (((x * 0x01010101) & 0xFFFFFFFF) >> 24).astype(np.int64)


def enumerate_closures(problem: ClosureProblem, chunk: int = 1 << 20):
    """Yield ``(subset_bits, objective)`` arrays for every closed subset."""
    n = problem.n
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")
    w = problem.weights
    arcs = problem.arcs
    total = 1 << n
    for lo in range(0, total, chunk):
        bits = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        ok = np.ones(len(bits), bool)
        for u, v in arcs:
            ok &= ~(((bits >> u) & 1).astype(bool) & ~((bits >> v) & 1).astype(bool))
        bits = bits[ok]
        obj = np.zeros(len(bits), np.int64)
        for b in range(n):
            obj += w[b] * ((bits >> b) & 1)
        yield bits, obj


def brute_force_max_closure(problem: ClosureProblem) -> ClosureSolution:
    """Enumerate all subsets; ties go to larger cardinality, then to the
    numerically smallest membership bit pattern (bit ``v`` = vertex ``v``)."""
    best = None
    for bits, obj in enumerate_closures(problem):
        if not len(bits):
            continue
        card = _popcount(bits)
        # lexsort: last key is primary
        k = np.lexsort((bits, -card, -obj))[0]
        cand = (int(obj[k]), int(card[k]), int(bits[k]))
        if best is None or (-cand[0], -cand[1], cand[2]) < (-best[0], -best[1], best[2]):
            best = cand
    obj, _, pattern = best
    mask = np.array([(pattern >> v) & 1 for v in range(problem.n)], bool)
    return ClosureSolution(mask, obj)


def all_optimal_closures(problem: ClosureProblem) -> list[frozenset]:
    """Every closed set attaining the maximum objective (small ``n`` only)."""
    best, sets = None, []
    for bits, obj in enumerate_closures(problem):
        if not len(obj):
            continue
        top = int(obj.max())
        if best is None or top > best:
            best, sets = top, []
        if top == best:
            sets.extend(int(b) for b in bits[obj == top])
    return [frozenset(v for v in range(problem.n) if (b >> v) & 1) for b in sets]


@dataclass(frozen=True, eq=False)
class VertexMap:
    """Dense vertex ids: pit cells ``0..n_pit-1`` in ``(k, j, i)`` order, then stopes."""

    grid: GridSpec
    ug_flat: np.ndarray = field(repr=False)

    @property
    def n_pit(self) -> int:
        return self.grid.size

    @property
    def n_ug(self) -> int:
        return len(self.ug_flat)

    @property
    def n(self) -> int:
        return self.n_pit + self.n_ug

    def ug_vertex(self, flat) -> np.ndarray:
        flat = np.asarray(flat, np.int64)
        pos = np.searchsorted(self.ug_flat, flat)
        pos_c = np.minimum(pos, max(self.n_ug - 1, 0))
        if self.n_ug == 0 or np.any(self.ug_flat[pos_c] != flat):
            raise AssemblyError("arc endpoint is not an underground-defined block")
        return self.n_pit + pos

    def block_of(self, vertex: int) -> tuple[str, BlockIndex]:
        if vertex < self.n_pit:
            flat = vertex
            kind = "pit"
        else:
            flat = int(self.ug_flat[vertex - self.n_pit])
            kind = "ug"
        i, j, k = self.grid.unflat(flat)
        return kind, BlockIndex(int(i), int(j), int(k))


def assemble_problem(weights: VertexWeights, arcs: ArcSet, model: BlockModel):
    """Merge weights and B/C/D arcs into one deduplicated closure problem.

    Returns ``(problem, vertex_map)``.
    """
    grid = model.grid
    if weights.grid != grid:
        raise AssemblyError("weights were built for a different grid")
    ug_flat = np.flatnonzero(weights.ug_mask)
    vmap = VertexMap(grid, ug_flat)
    n_pit = grid.size

    def check_pit(ids, fam):
        if len(ids) and (ids.min() < 0 or ids.max() >= n_pit):
            raise AssemblyError(f"{fam} arc endpoint outside the pit model")

    b = _as_arcs(arcs.b)
    c = _as_arcs(arcs.c)
    d = _as_arcs(arcs.d)
    check_pit(b.ravel(), "B")
    check_pit(c[:, 0], "C")
    parts = [b]
    if len(c):
        parts.append(np.stack([c[:, 0], vmap.ug_vertex(c[:, 1])], axis=1))
    if len(d):
        parts.append(vmap.ug_vertex(d))
    all_arcs = np.concatenate(parts) if parts else np.empty((0, 2), np.int64)
    n = vmap.n
    if len(all_arcs):
        keys = np.unique(all_arcs[:, 0] * n + all_arcs[:, 1])
        all_arcs = np.stack([keys // n, keys % n], axis=1)
    w = np.concatenate([weights.pit.reshape(-1), weights.ug.reshape(-1)[ug_flat]])
    return ClosureProblem(n, w, all_arcs), vmap
