"""Open-pit outline optimisation above a potential underground mine.

The pit and the underground stopes are modelled as one weighted digraph
and solved exactly as a maximum-closure (minimum-cut) problem.
"""

from .block_model import (BlockIndex, BlockModel, BlockModelError, GridSpec, PitAttributes,
                          UndergroundAttributes, depth_of_level, load_block_model, validate,
                          write_block_model)
from .economics import (EconomicParams, VertexWeights, build_vertex_weights, conventional_weight,
                        pit_weight, ug_opportunity_weight)
from .estimator import ConsistencyError, TransitionOptimizer
from .interpret import (SummaryReport, TransitionOutcome, extract_outcome, summarize,
                        verify_crown_thickness)
from .precedence import (ArcSet, CrownGroup, CrownShapeTemplate, CrownSpec, OffsetTemplate,
                         SlopeSpec, build_b_arcs, build_c_arcs, build_d_arcs,
                         build_slope_template, generate_flat_level_groups)
from .solver import (ClosureProblem, ClosureSolution, assemble_problem, brute_force_max_closure,
                     solve_max_closure)

__version__ = "0.1.0"

__all__ = [
    "ArcSet", "BlockIndex", "BlockModel", "BlockModelError", "ClosureProblem", "ClosureSolution",
    "ConsistencyError", "CrownGroup", "CrownShapeTemplate", "CrownSpec", "EconomicParams",
    "GridSpec", "OffsetTemplate", "PitAttributes", "SlopeSpec", "SummaryReport",
    "TransitionOptimizer", "TransitionOutcome", "UndergroundAttributes", "VertexWeights",
    "assemble_problem", "brute_force_max_closure", "build_b_arcs", "build_c_arcs", "build_d_arcs",
    "build_slope_template", "build_vertex_weights", "conventional_weight", "depth_of_level",
    "extract_outcome", "generate_flat_level_groups", "load_block_model", "pit_weight",
    "solve_max_closure", "summarize", "ug_opportunity_weight", "validate",
    "verify_crown_thickness", "write_block_model",
]
