"""Acceptance gate. Each criterion records one PASS/FAIL line in the terminal summary."""

import json
import time

import numpy as np
import pytest

from pittrans.block_model import GridSpec
from pittrans.cli import ScenarioConfig, format_table, load_model, run_compare, run_optimize
from pittrans.estimator import TransitionOptimizer
from pittrans.interpret import verify_crown_thickness
from pittrans.precedence import SlopeSpec, build_slope_template, cone_offsets
from pittrans.solver import (ClosureProblem, all_optimal_closures, brute_force_max_closure,
                             is_closed, solve_max_closure)
from pittrans.synthetic import DEMO_SPEC, run_gen_synthetic

from conftest import ACCEPTANCE_LINES, random_model

MODES = ["pit-only", "conventional", "dual-identity", "crown-simple", "crown-shaped"]
CROWN_RUNS = []


def record(number, name, ok, detail=""):
    ACCEPTANCE_LINES.append(f"criterion {number} {'PASS' if ok else 'FAIL'}: {name}"
                            + (f" ({detail})" if detail else ""))
    return ok


def random_closure_instance(rng):
    n = int(rng.integers(1, 17))
    order = rng.permutation(n)
    arcs = set()
    for _ in range(int(rng.integers(0, 2 * n + 1))):
        a, b = sorted(rng.choice(n, 2, replace=False)) if n > 1 else (0, 0)
        if a != b:
            arcs.add((int(order[a]), int(order[b])))
    for _ in range(int(rng.integers(0, 3))):
        if n >= 2:
            cyc = rng.choice(n, int(rng.integers(2, min(4, n) + 1)), replace=False).tolist()
            arcs.update(zip(cyc, cyc[1:] + cyc[:1]))
    weights = rng.integers(-10, 11, n) * 100
    return ClosureProblem(n, weights, sorted(arcs))


def test_criterion_1_oracle_equivalence():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    failures = []
    for case in range(500):
        p = random_closure_instance(rng)
        s = solve_max_closure(p)
        b = brute_force_max_closure(p)
        optimal = all_optimal_closures(p)
        ok = (s.objective == b.objective and is_closed(s.mask, p.arcs)
              and int(p.weights[s.mask].sum()) == b.objective
              and all(o <= s.members for o in optimal))
        if not ok:
            failures.append(case)
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 30
    record(1, "max closure equals brute force on 500 instances", ok,
           f"{len(failures)} mismatches, {elapsed:.1f}s")
    assert not failures
    assert elapsed < 30


def test_criterion_2_conventional_equals_dual():
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(100):
        model = random_model(rng)
        conv = TransitionOptimizer(mode="conventional", template_levels=3).fit(model)
        dual = TransitionOptimizer(mode="dual-identity", template_levels=3).fit(model)
        if (conv.outcome_.pit_blocks != dual.outcome_.pit_blocks
                or conv.report_.objective != dual.report_.objective):
            mismatches += 1
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 60
    record(2, "conventional and dual-identity agree on 100 models", ok,
           f"{mismatches} mismatches, {elapsed:.1f}s")
    assert mismatches == 0
    assert elapsed < 60


def test_criterion_3_constraint_monotonicity():
    rng = np.random.default_rng(3)
    bad = []
    for case in range(50):
        model = random_model(rng)
        thickness = int(rng.integers(1, 4))
        simple = TransitionOptimizer(mode="crown-simple", template_levels=3,
                                     crown_thickness=thickness).fit(model)
        shaped = TransitionOptimizer(mode="crown-shaped", template_levels=3,
                                     crown_thickness=thickness).fit(model)
        CROWN_RUNS.extend([(simple, model), (shaped, model)])
        same_c = np.array_equal(simple.arcs_.c, shaped.arcs_.c)
        bounded = all(e.report_.objective <= int(e.problem_.weights[e.problem_.weights > 0].sum())
                      for e in (simple, shaped))
        if not (same_c and bounded and shaped.report_.objective <= simple.report_.objective):
            bad.append(case)
    record(3, "crown-shaped <= crown-simple, objective <= positive weight sum", not bad,
           f"{len(bad)} violations over 50 models")
    assert not bad


def test_criterion_4_crown_thickness(demo):
    assert CROWN_RUNS, "criterion 3 must run first"
    violations = sum(len(verify_crown_thickness(e.outcome_, e.crown_, m)) for e, m in CROWN_RUNS)
    model = demo["model"]
    for mode in ("crown-simple", "crown-shaped"):
        est = demo["configs"][mode].estimator().fit(model)
        violations += len(verify_crown_thickness(est.outcome_, est.crown_, model))
    record(4, "no crown thickness violations", violations == 0,
           f"{len(CROWN_RUNS) + 2} crown runs, {violations} violations")
    assert violations == 0


def composition_closure(gens, depth_limit, span):
    """Every offset reachable as a sum of >= 1 generators, within the window."""
    seen, frontier = set(gens), set(gens)
    while frontier:
        nxt = set()
        for a in frontier:
            for g in gens:
                v = (a[0] + g[0], a[1] + g[1], a[2] + g[2])
                if -v[2] <= depth_limit and abs(v[0]) <= span[0] and abs(v[1]) <= span[1] and v not in seen:
                    nxt.add(v)
        seen |= nxt
        frontier = nxt
    return seen


def reduction_holds(slope, grid):
    cone = cone_offsets(slope, grid)
    template = set(build_slope_template(slope, grid).offsets)
    span = (grid.nx - 1, grid.ny - 1)
    L = slope.template_levels
    same_reach = composition_closure(template, L, span) == composition_closure(cone, L, span)
    # no template offset is itself a sum of two or more template offsets
    reach = composition_closure(template, L, span)
    sums = {(a[0] + g[0], a[1] + g[1], a[2] + g[2]) for a in reach for g in template}
    minimal = not (template & sums)
    return same_reach and minimal


def test_criterion_5_slope_templates():
    grid2d, grid3d = GridSpec(13, 1, 7), GridSpec(13, 13, 7)
    n2 = len(build_slope_template(SlopeSpec(45, 1), grid2d).offsets)
    n3 = len(build_slope_template(SlopeSpec(45, 1), grid3d).offsets)
    reductions = all(reduction_holds(SlopeSpec(deg, L), g)
                     for g in (grid2d, grid3d) for deg in (40.0, 45.0, 55.0) for L in range(1, 6))
    ok = n2 == 3 and n3 == 5 and reductions
    record(5, "slope templates", ok, f"2D L=1: {n2}, 3D L=1: {n3}, reduction {'ok' if reductions else 'broken'}")
    assert n2 == 3
    assert n3 == 5
    assert reductions


def write_configs(root, model_path, out_name):
    configs = {}
    for mode in MODES:
        data = {"grid": {"nx": DEMO_SPEC.nx, "ny": DEMO_SPEC.ny, "nz": DEMO_SPEC.nz,
                         "dx": DEMO_SPEC.dx, "dy": DEMO_SPEC.dy, "dz": DEMO_SPEC.dz},
                "block_model": str(model_path), "mode": mode,
                "slope": {"degrees": 45, "template_levels": 5},
                "crown": {"thickness_levels": 2}, "crown_shape": "flat-levels",
                "economics": {"ug_discount": 1.0}, "output_dir": f"{out_name}/{mode}"}
        path = root / f"{out_name}-{mode}.json"
        path.write_text(json.dumps(data))
        configs[mode] = ScenarioConfig.from_json(path)
    return configs


@pytest.fixture(scope="module")
def demo(tmp_path_factory):
    root = tmp_path_factory.mktemp("demo")
    model_path = run_gen_synthetic(DEMO_SPEC, root / "demo.csv")
    configs = write_configs(root, model_path, "run1")
    model = load_model(configs["pit-only"])
    reports, walls = [], {}
    for mode in MODES:
        t0 = time.perf_counter()
        reports.append(run_optimize(configs[mode], model))
        walls[mode] = time.perf_counter() - t0
    return dict(root=root, model_path=model_path, model=model, configs=configs,
                reports=reports, walls=walls)


def test_criterion_6_demonstration_scale(demo):
    reports, walls = demo["reports"], demo["walls"]
    by_mode = {r.mode: r for r in reports}
    shaped = by_mode["crown-shaped"]
    n_arcs = shaped.n_b_arcs + shaped.n_c_arcs + shaped.n_d_arcs
    rows = format_table(reports, timing=False).splitlines()[1:]
    conv_row, dual_row = rows[1].split()[5:], rows[2].split()[5:]
    checks = {
        "size": shaped.n_vertices >= 200_000 and n_arcs >= 3_000_000,
        "time": max(walls.values()) < 120,
        "conventional == dual-identity": conv_row == dual_row
        and by_mode["conventional"].total_value == by_mode["dual-identity"].total_value,
        "shaped <= simple": shaped.total_value <= by_mode["crown-simple"].total_value,
        "total == pit + ug": all(r.total_value == r.pit_value + r.ug_value for r in reports),
    }
    ok = all(checks.values())
    record(6, "demonstration-scale comparison", ok,
           f"{shaped.n_vertices} vertices, {n_arcs} arcs, slowest mode {max(walls.values()):.1f}s"
           + "".join(f", {k} failed" for k, v in checks.items() if not v))
    assert ok, checks


def snapshot(out_root):
    files = {}
    for p in sorted(out_root.rglob("*")):
        if p.is_file():
            data = p.read_bytes()
            if p.name == "summary.json":
                d = json.loads(data)
                d.pop("solve_seconds")
                data = json.dumps(d, sort_keys=True).encode()
            files[str(p.relative_to(out_root))] = data
    return files


def test_criterion_7_determinism(demo):
    root = demo["root"]
    regenerated = run_gen_synthetic(DEMO_SPEC, root / "demo-again.csv")
    same_csv = regenerated.read_bytes() == demo["model_path"].read_bytes()
    configs = write_configs(root, demo["model_path"], "run2")
    reports = run_compare([configs[m] for m in MODES])
    same_table = format_table(reports, timing=False) == format_table(demo["reports"], timing=False)
    first, second = snapshot(root / "run1"), snapshot(root / "run2")
    same_files = first == second and len(first) == 4 * len(MODES)
    ok = same_csv and same_table and same_files
    record(7, "byte-identical non-timing outputs on re-run", ok,
           f"{len(second)} files compared")
    assert ok
