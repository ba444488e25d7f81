"""Scenario runner: ``pittrans optimize | compare | gen-synthetic | validate``.

Exit codes: 0 success, 2 configuration or input-file error, 3 internal
inconsistency in a solved run.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .block_model import BlockModel, BlockModelError, GridSpec, load_block_model, validate
from .economics import EconomicParams
from .estimator import ConsistencyError, TransitionOptimizer
from .interpret import SummaryReport, TransitionOutcome, write_membership, write_pit_surface
from .precedence import CrownSpec, PrecedenceError, SlopeSpec
from .synthetic import SyntheticDepositSpec, run_gen_synthetic
from .validation import CROWN_MODES, check_mode

log = logging.getLogger("pittrans")

EXIT_OK, EXIT_CONFIG, EXIT_INTERNAL = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    grid: GridSpec
    block_model_path: Path
    mode: str
    slope: SlopeSpec = SlopeSpec()
    crown: CrownSpec | None = None
    crown_shape_path: str = "flat-levels"
    economics: EconomicParams = EconomicParams()
    output_dir: Path = Path("out")

    @classmethod
    def from_dict(cls, data: dict, base_dir=".") -> "ScenarioConfig":
        base = Path(base_dir)
        try:
            g = data["grid"]
            grid = GridSpec(int(g["nx"]), int(g["ny"]), int(g["nz"]),
                            float(g.get("dx", 1.0)), float(g.get("dy", 1.0)), float(g.get("dz", 1.0)),
                            float(g.get("surface_elevation", 0.0)))
            mode = check_mode(data["mode"])
            s = data.get("slope", {})
            slope = SlopeSpec(float(s.get("degrees", 45.0)), int(s.get("template_levels", 5)))
            crown = None
            if "crown" in data and data["crown"] is not None:
                crown = CrownSpec(int(data["crown"]["thickness_levels"]))
            if mode in CROWN_MODES:
                if crown is None:
                    raise ConfigError(f"mode {mode!r} requires crown.thickness_levels")
                crown.check_grid(grid)
            shape = data.get("crown_shape", "flat-levels")
            if shape != "flat-levels":
                shape = str(base / shape)
            econ = EconomicParams(float(data.get("economics", {}).get("ug_discount", 1.0)))
            return cls(grid, base / data["block_model"], mode, slope, crown, shape, econ,
                       base / data.get("output_dir", "out"))
        except ConfigError:
            raise
        except KeyError as exc:
            raise ConfigError(f"missing config key {exc}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path) -> "ScenarioConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(data, path.parent)

    def estimator(self) -> TransitionOptimizer:
        return TransitionOptimizer(
            mode=self.mode,
            slope_degrees=self.slope.slope_deg,
            template_levels=self.slope.template_levels,
            crown_thickness=self.crown.thickness_levels if self.crown else None,
            crown_shape=self.crown_shape_path,
            ug_discount=self.economics.ug_discount,
        )


def load_model(config: ScenarioConfig) -> BlockModel:
    try:
        return load_block_model(config.block_model_path, config.grid)
    except OSError as exc:
        raise ConfigError(f"cannot read block model: {exc}") from None
    except BlockModelError as exc:
        raise ConfigError(f"{config.block_model_path}: {exc}") from None


def render_slice(outcome: TransitionOutcome, model: BlockModel, axis: str, index: int) -> str:
    """ASCII section, top level first.

    ``axis="j"`` cuts the east-west section at row ``j = index``;
    ``axis="i"`` the north-south section at column ``i = index``.
    """
    grid = model.grid
    labels = np.full(grid.shape, ".")
    labels[outcome.ug_available_mask] = "U"
    labels[outcome.ug_unavailable_mask] = "u"
    labels[outcome.crown_mask] = "C"
    labels[outcome.pit_mask] = "P"
    if axis == "j":
        if not 0 <= index < grid.ny:
            raise IndexError(f"j={index} outside [0, {grid.ny})")
        section = labels[:, index, :]
    elif axis == "i":
        if not 0 <= index < grid.nx:
            raise IndexError(f"i={index} outside [0, {grid.nx})")
        section = labels[:, :, index]
    else:
        raise ValueError("axis must be 'i' or 'j'")
    return "\n".join("".join(row) for row in section) + "\n"


def _write_outputs(est: TransitionOptimizer, model: BlockModel, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_membership(est.outcome_, out_dir / "membership.csv")
    write_pit_surface(est.outcome_, out_dir / "pit_surface.csv")
    (out_dir / "summary.json").write_text(est.report_.to_json(), encoding="utf-8")
    grid = model.grid
    parts = [f"# section j={grid.ny // 2}\n", render_slice(est.outcome_, model, "j", grid.ny // 2),
             f"# section i={grid.nx // 2}\n", render_slice(est.outcome_, model, "i", grid.nx // 2)]
    (out_dir / "slices.txt").write_text("".join(parts), encoding="utf-8")


def run_optimize(config: ScenarioConfig, model: BlockModel | None = None) -> SummaryReport:
    """Run one scenario and write membership, pit surface, summary and slices."""
    model = load_model(config) if model is None else model
    est = config.estimator()
    try:
        est.fit(model)
    except (PrecedenceError, OSError) as exc:
        raise ConfigError(str(exc)) from None
    _write_outputs(est, model, config.output_dir)
    log.info("%s: objective %.2f, solve %.2fs", config.mode, est.report_.objective / 100,
             est.report_.solve_seconds)
    return est.report_


def thread_count() -> int:
    raw = os.environ.get("PITTRANS_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"PITTRANS_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError("PITTRANS_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def run_compare(configs: list[ScenarioConfig]) -> list[SummaryReport]:
    """Run scenarios over one shared block model; reports keep the input order."""
    if not configs:
        raise ConfigError("compare needs at least one config")
    first = configs[0]
    for c in configs[1:]:
        if c.grid != first.grid or c.block_model_path.resolve() != first.block_model_path.resolve():
            raise ConfigError("all compared configs must share one block model and grid")
    dirs = [c.output_dir.resolve() for c in configs]
    if len(set(dirs)) != len(dirs):
        raise ConfigError("compared configs must use distinct output_dir values")
    model = load_model(first)
    workers = min(thread_count(), len(configs))
    if workers == 1:
        return [run_optimize(c, model) for c in configs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: run_optimize(c, model), configs))


COLUMNS = ("mode", "vertices", "B", "C", "D", "pit_ore_t", "pit_depth_m", "ug_levels",
           "ug_top_levels", "open_pit", "underground", "total", "objective", "solve_s")


def _money(cents: int) -> str:
    return f"{cents / 100:.2f}"


def comparison_rows(reports: list[SummaryReport], timing: bool = True) -> list[list[str]]:
    rows = []
    for r in reports:
        tops = "n/a" if r.ug_top_level_min is None else (
            f"{r.ug_top_level_min}" if r.ug_top_level_min == r.ug_top_level_max
            else f"{r.ug_top_level_min}~{r.ug_top_level_max}")
        rows.append([r.mode, str(r.n_vertices), str(r.n_b_arcs), str(r.n_c_arcs), str(r.n_d_arcs),
                     f"{r.pit_ore_tonnes:.0f}", f"{r.pit_depth_m:g}", str(r.ug_level_count), tops,
                     _money(r.pit_value), _money(r.ug_value), _money(r.total_value),
                     _money(r.objective), f"{r.solve_seconds:.2f}" if timing else "-"])
    return rows


def format_table(reports: list[SummaryReport], timing: bool = True) -> str:
    rows = [list(COLUMNS)] + comparison_rows(reports, timing)
    widths = [max(len(row[c]) for row in rows) for c in range(len(COLUMNS))]
    lines = ["  ".join(cell.rjust(w) if c else cell.ljust(w) for c, (cell, w) in enumerate(zip(row, widths)))
             for row in rows]
    return "\n".join(lines) + "\n"


def _cmd_optimize(args) -> int:
    report = run_optimize(ScenarioConfig.from_json(args.config))
    sys.stdout.write(report.to_json())
    return EXIT_OK


def _cmd_compare(args) -> int:
    reports = run_compare([ScenarioConfig.from_json(p) for p in args.config])
    table = format_table(reports)
    sys.stdout.write(table)
    if args.out:
        Path(args.out).write_text(table, encoding="utf-8")
    return EXIT_OK


def _cmd_gen_synthetic(args) -> int:
    try:
        spec = SyntheticDepositSpec.from_json(args.spec) if args.spec else SyntheticDepositSpec()
    except OSError as exc:
        raise ConfigError(f"cannot read spec: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad synthetic spec: {exc}") from None
    run_gen_synthetic(spec, args.out)
    return EXIT_OK


def _cmd_validate(args) -> int:
    config = ScenarioConfig.from_json(args.config)
    model = load_model(config)
    diags = validate(model)
    for d in diags:
        print(d)
    errors = [d for d in diags if d.severity == "error"]
    print(f"{len(errors)} errors, {len(diags) - len(errors)} warnings")
    return EXIT_CONFIG if errors else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pittrans", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="run one scenario")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("compare", help="run several scenarios and print a comparison table")
    p.add_argument("--config", required=True, nargs="+")
    p.add_argument("--out", help="also write the table here")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("gen-synthetic", help="write a synthetic block model")
    p.add_argument("--spec", help="synthetic deposit JSON; defaults when omitted")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_synthetic)

    p = sub.add_parser("validate", help="check a scenario's block model")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"pittrans: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConsistencyError as exc:
        print(f"pittrans: internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
