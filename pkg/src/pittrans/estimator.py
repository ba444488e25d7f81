"""Scikit-learn style front end for the full optimisation pipeline."""

from __future__ import annotations

import time

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .block_model import BlockModel
from .economics import EconomicParams, build_vertex_weights
from .interpret import extract_outcome, summarize, verify_crown_thickness
from .precedence import (ArcSet, CrownShapeTemplate, CrownSpec, SlopeSpec, build_b_arcs,
                         build_c_arcs, build_d_arcs, build_slope_template,
                         generate_flat_level_groups, load_crown_shape)
from .solver import assemble_problem, is_closed, solve_max_closure
from .validation import CROWN_MODES, WEIGHT_MODE, check_block_indices, check_block_model, check_mode

LABELS = np.array([".", "P", "C", "U", "u"])


class ConsistencyError(RuntimeError):
    """A solved run violates closedness or the crown-pillar requirement."""


class TransitionOptimizer(BaseEstimator):
    """Optimal pit outline above a potential underground mine.

    Parameters
    ----------
    mode : {"pit-only", "conventional", "dual-identity", "crown-simple", "crown-shaped"}
        Which arc families and weights to use. ``conventional`` folds the
        underground opportunity cost into the pit weights; the other
        underground-aware modes keep a second vertex per stope.
    slope_degrees : float
        Overall pit slope, from horizontal.
    template_levels : int
        How many levels up the slope template reaches.
    crown_thickness : int or None
        Crown pillar thickness in levels; required by the crown modes.
    crown_shape : "flat-levels", path or CrownShapeTemplate
        Crown top shape for ``crown-shaped``.
    ug_discount : float
        Scale applied to underground value, in (0, 1].

    Attributes
    ----------
    weights_, arcs_, problem_, vertex_map_, solution_ : pipeline stages
    outcome_ : TransitionOutcome
    report_ : SummaryReport
    labels_ : ndarray of shape (nz, ny, nx)
        One of ``P`` (pit), ``C`` (crown pillar), ``U`` (available stope),
        ``u`` (lost stope outside the crown) or ``.`` per cell.
    timings_ : dict
    """

    def __init__(self, mode="crown-shaped", slope_degrees=45.0, template_levels=5,
                 crown_thickness=None, crown_shape="flat-levels", ug_discount=1.0):
        self.mode = mode
        self.slope_degrees = slope_degrees
        self.template_levels = template_levels
        self.crown_thickness = crown_thickness
        self.crown_shape = crown_shape
        self.ug_discount = ug_discount

    def _crown_template(self, model) -> CrownShapeTemplate:
        if isinstance(self.crown_shape, CrownShapeTemplate):
            return self.crown_shape
        if self.crown_shape == "flat-levels":
            return generate_flat_level_groups(model)
        return load_crown_shape(self.crown_shape)

    def _build_arcs(self, model: BlockModel) -> ArcSet:
        slope = SlopeSpec(float(self.slope_degrees), int(self.template_levels))
        b = build_b_arcs(model, build_slope_template(slope, model.grid))
        empty = np.empty((0, 2), np.int64)
        c = d = empty
        if self.mode == "dual-identity":
            c = build_c_arcs(model, 0)
        elif self.mode in CROWN_MODES:
            c = build_c_arcs(model, self.crown_.thickness_levels)
            if self.mode == "crown-shaped":
                d = build_d_arcs(self._crown_template(model), model)
        return ArcSet(b, c, d)

    def fit(self, X: BlockModel, y=None):
        """Build the digraph for ``X`` and solve it."""
        model = check_block_model(X)
        check_mode(self.mode)
        params = EconomicParams(float(self.ug_discount))
        self.crown_ = None
        if self.mode in CROWN_MODES:
            if self.crown_thickness is None:
                raise ValueError(f"mode {self.mode!r} needs crown_thickness")
            self.crown_ = CrownSpec(int(self.crown_thickness))
            self.crown_.check_grid(model.grid)

        t0 = time.perf_counter()
        weight_mode = WEIGHT_MODE[self.mode]
        self.weights_ = build_vertex_weights(model, params, weight_mode)
        self.arcs_ = self._build_arcs(model)
        self.problem_, self.vertex_map_ = assemble_problem(self.weights_, self.arcs_, model)
        t1 = time.perf_counter()
        self.solution_ = solve_max_closure(self.problem_)
        t2 = time.perf_counter()

        if not is_closed(self.solution_.mask, self.problem_.arcs):
            raise ConsistencyError("solver returned a set that is not closed")
        self.outcome_ = extract_outcome(self.solution_, self.vertex_map_, model, weight_mode)
        if self.crown_ is not None:
            bad = verify_crown_thickness(self.outcome_, self.crown_, model)
            if bad:
                raise ConsistencyError(f"{len(bad)} stopes violate the crown thickness, first {bad[0]}")
        self.timings_ = {"build_seconds": t1 - t0, "solve_seconds": t2 - t1}
        self.report_ = summarize(self.outcome_, model, self.weights_, self.timings_,
                                 self.arcs_.counts, self.problem_.n, self.mode)
        if self.report_.objective != self.solution_.objective:
            raise ConsistencyError("report objective disagrees with the solver")
        self.labels_ = self._label_grid()
        self.n_features_in_ = 3
        return self

    def _label_grid(self) -> np.ndarray:
        o = self.outcome_
        codes = np.zeros(o.pit_mask.shape, np.int8)
        codes[o.ug_available_mask] = 3
        codes[o.ug_unavailable_mask] = 4
        codes[o.crown_mask] = 2
        codes[o.pit_mask] = 1
        return LABELS[codes]

    def predict(self, X) -> np.ndarray:
        """Labels for block indices ``X`` of shape ``(n, 3)``."""
        check_is_fitted(self, "labels_")
        idx = check_block_indices(X, self.vertex_map_.grid)
        return self.labels_[idx[:, 2], idx[:, 1], idx[:, 0]]

    def fit_predict(self, X: BlockModel, y=None) -> np.ndarray:
        return self.fit(X).labels_

    def score(self, X=None, y=None) -> float:
        """Closure objective of the fitted run, in dollars."""
        check_is_fitted(self, "report_")
        return self.report_.objective / 100
