import json

import numpy as np
import pytest

from pittrans.block_model import BlockIndex, BlockModel, GridSpec, PitAttributes, UndergroundAttributes
from pittrans.economics import EconomicParams, build_vertex_weights
from pittrans.interpret import (InterpretationError, SummaryReport, TransitionOutcome,
                                empty_outcome, extract_outcome, pit_bottoms, summarize,
                                verify_crown_thickness, write_membership, write_pit_surface)
from pittrans.precedence import CrownSpec, SlopeSpec, build_arcs
from pittrans.solver import assemble_problem, brute_force_max_closure, solve_max_closure

from conftest import random_model

B = lambda k: BlockIndex(0, 0, k)  # noqa: E731


def column(pit_values, ug_values):
    """1x1xN column; pit_values are (vp, cp) pairs, ug_values map level -> (vu, cu)."""
    grid = GridSpec(1, 1, len(pit_values), 30, 30, 30)
    pit = {(0, 0, k): PitAttributes(1000, 400 if vp else 0, vp, cp) for k, (vp, cp) in enumerate(pit_values)}
    ug = {(0, 0, k): UndergroundAttributes(vu, cu) for k, (vu, cu) in ug_values.items()}
    return BlockModel.from_records(grid, pit, ug)


IDENTITY_FIXTURE = column([(0, 100), (0, 100), (1200, 200), (0, 5000)], {2: (600, 300), 3: (800, 300)})
OFFSET_FIXTURE = column([(2100, 100), (2100, 100), (0, 10000), (0, 10000)], {2: (600, 300), 3: (800, 300)})


def solve(model, c_offset, check_oracle=True):
    w = build_vertex_weights(model, EconomicParams(), "dual")
    p, vmap = assemble_problem(w, build_arcs(model, SlopeSpec(45, 1), c_offset=c_offset), model)
    sol = solve_max_closure(p)
    if check_oracle:
        oracle = brute_force_max_closure(p)
        assert sol.members == oracle.members and sol.objective == oracle.objective
    return sol, vmap, w


def test_identity_column():
    sol, vmap, _ = solve(IDENTITY_FIXTURE, 0)
    assert sol.objective == 500
    out = extract_outcome(sol, vmap, IDENTITY_FIXTURE)
    assert out.pit_blocks == {B(0), B(1), B(2)}
    assert out.ug_unavailable == {B(2)}
    assert out.crown_pillar == frozenset()
    assert out.ug_available == {B(3)}


def test_offset_column():
    sol, vmap, _ = solve(OFFSET_FIXTURE, 2)
    assert sol.objective == 3200
    out = extract_outcome(sol, vmap, OFFSET_FIXTURE)
    assert out.pit_blocks == {B(0), B(1)}
    assert out.ug_unavailable == {B(2), B(3)}
    assert out.crown_pillar == {B(2), B(3)}
    assert out.ug_available == frozenset()


def test_empty_solution():
    model = IDENTITY_FIXTURE
    w = build_vertex_weights(model, EconomicParams(), "dual")
    p, vmap = assemble_problem(w, build_arcs(model, SlopeSpec(), c_offset=0), model)
    from pittrans.solver import ClosureSolution
    out = extract_outcome(ClosureSolution(np.zeros(p.n, bool), 0), vmap, model)
    assert out.pit_blocks == frozenset() and out.ug_available == {B(2), B(3)}


def test_mapping_mismatch():
    sol, vmap, _ = solve(IDENTITY_FIXTURE, 0, check_oracle=False)
    from pittrans.solver import ClosureSolution
    with pytest.raises(InterpretationError):
        extract_outcome(ClosureSolution(sol.mask[:-1], 0), vmap, IDENTITY_FIXTURE)


@pytest.mark.parametrize("c_offset", [0, 1, 2])
def test_partition_identities(rng, c_offset):
    model = random_model(rng, 5, 4, 6)
    sol, vmap, _ = solve(model, c_offset, check_oracle=False)
    out = extract_outcome(sol, vmap, model)
    assert out.crown_pillar == {u for u in out.ug_unavailable if u not in out.pit_blocks}
    assert out.ug_available | out.ug_unavailable == set(model.ug)
    assert not out.ug_available & out.ug_unavailable


def test_objective_restates_dual_sum(rng):
    model = random_model(rng, 5, 4, 6)
    sol, vmap, w = solve(model, 2, check_oracle=False)
    out = extract_outcome(sol, vmap, model)
    expected = sum(model.pit_at(b).vp - model.pit_at(b).cp for b in out.pit_blocks)
    expected += sum(w.wu[u] for u in out.ug_unavailable)
    assert sol.objective == expected


def test_conventional_marks_lost_stopes_under_pit(rng):
    model = random_model(rng, 4, 4, 4)
    w = build_vertex_weights(model, EconomicParams(), "conventional")
    p, vmap = assemble_problem(w, build_arcs(model, SlopeSpec()), model)
    out = extract_outcome(solve_max_closure(p), vmap, model, "conventional")
    assert out.ug_unavailable == out.pit_blocks & set(model.ug)
    assert out.crown_pillar == frozenset()


def test_crown_thickness_clean_and_corrupted():
    sol, vmap, _ = solve(OFFSET_FIXTURE, 2)
    out = extract_outcome(sol, vmap, OFFSET_FIXTURE)
    crown = CrownSpec(2)
    assert verify_crown_thickness(out, crown, OFFSET_FIXTURE) == []
    lost = out.ug_unavailable_mask.copy()
    lost[3, 0, 0] = False
    bad = TransitionOutcome(out.pit_mask, lost, out.ug_considered)
    assert verify_crown_thickness(bad, crown, OFFSET_FIXTURE) == [B(3)]


def test_crown_thickness_clipped_source():
    model = column([(100, 0), (0, 0), (0, 0)], {1: (500, 100)})
    pit = np.zeros(model.grid.shape, bool)
    pit[0] = True
    out = TransitionOutcome(pit, np.zeros_like(pit), model.ug_mask.copy())
    assert verify_crown_thickness(out, CrownSpec(2), model) == []


def test_pit_bottoms():
    model = random_model(np.random.default_rng(3), 3, 2, 4)
    out = empty_outcome(model)
    pit = out.pit_mask.copy()
    pit[:3, 0, 1] = True
    assert pit_bottoms(TransitionOutcome(pit, out.ug_unavailable_mask, out.ug_considered)).tolist() == [[-1, 2, -1], [-1, -1, -1]]


def test_summarize_empty():
    model = BlockModel.from_records(GridSpec(2, 2, 2))
    w = build_vertex_weights(model, EconomicParams(), "dual")
    r = summarize(empty_outcome(model), model, w)
    assert (r.pit_total_tonnes, r.pit_ore_tonnes, r.pit_depth_m, r.ug_level_count) == (0, 0, 0, 0)
    assert (r.pit_value, r.ug_value, r.total_value, r.objective) == (0, 0, 0, 0)
    assert r.ug_top_level_min is None and r.ug_top_level_max is None


def test_summarize_single_block():
    model = BlockModel.from_records(GridSpec(1, 1, 1, dz=30), {(0, 0, 0): PitAttributes(1000, 400, 1000, 200)})
    w = build_vertex_weights(model, EconomicParams(), "pit-only")
    out = TransitionOutcome(np.ones((1, 1, 1), bool), np.zeros((1, 1, 1), bool), np.zeros((1, 1, 1), bool))
    r = summarize(out, model, w)
    assert r.pit_ore_tonnes == 400 and r.pit_total_tonnes == 1000
    assert r.pit_value == 800 and r.total_value == 800 and r.ug_value == 0
    assert r.pit_depth_m == 30


def test_summarize_offset_fixture():
    sol, vmap, w = solve(OFFSET_FIXTURE, 2)
    out = extract_outcome(sol, vmap, OFFSET_FIXTURE)
    r = summarize(out, OFFSET_FIXTURE, w, {"solve_seconds": 0.5}, (3, 4, 0), vmap.n, "crown-simple")
    assert r.ug_value == 0
    assert r.pit_value == 2000 + 2000
    assert r.objective == sol.objective == 3200
    assert r.pit_depth_m == 60 and r.pit_ore_tonnes == 800
    assert r.total_value == r.pit_value + r.ug_value


def test_summarize_ug_levels():
    sol, vmap, w = solve(IDENTITY_FIXTURE, 0)
    r = summarize(extract_outcome(sol, vmap, IDENTITY_FIXTURE), IDENTITY_FIXTURE, w)
    assert r.ug_level_count == 1 and r.ug_top_level_min == r.ug_top_level_max == 3
    assert r.ug_value == 500


def test_summary_json_round_trip(rng):
    model = random_model(rng, 4, 4, 4)
    sol, vmap, w = solve(model, 1, check_oracle=False)
    r = summarize(extract_outcome(sol, vmap, model), model, w, {"solve_seconds": 1.25}, (1, 2, 3), 9, "crown-simple")
    data = json.loads(r.to_json())
    assert data["solve_seconds"] == 1.25
    assert SummaryReport.from_dict(data) == r
    assert "solve_seconds" not in r.to_dict(timing=False)
    # pure: same input, identical text
    again = summarize(extract_outcome(sol, vmap, model), model, w, {"solve_seconds": 9.0}, (1, 2, 3), 9, "crown-simple")
    assert again.to_json(timing=False) == r.to_json(timing=False)


def test_membership_and_surface_files(tmp_path):
    sol, vmap, _ = solve(OFFSET_FIXTURE, 2)
    out = extract_outcome(sol, vmap, OFFSET_FIXTURE)
    write_membership(out, tmp_path / "m.csv")
    write_pit_surface(out, tmp_path / "s.csv")
    assert (tmp_path / "m.csv").read_text().splitlines() == [
        "i,j,k,in_pit,in_crown,ug_available", "0,0,0,1,0,0", "0,0,1,1,0,0", "0,0,2,0,1,0", "0,0,3,0,1,0"]
    assert (tmp_path / "s.csv").read_text().splitlines() == ["i,j,bottom_level", "0,0,1"]
