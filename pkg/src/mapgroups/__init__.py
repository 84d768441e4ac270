"""Mapping groups into matrix Lie groups, handled through logarithmic derivatives.

A smooth map f from a domain into a matrix group is stored by its left
logarithmic derivative f^{-1} df, a matrix-valued 1-form. Maps are recovered by
solving the evolution equation along paths. Periods around loops decide
whether a form integrates to a global map. Abelian targets reduce to lattice
periods and component classes.
"""

from mapgroups._backend import BACKEND
from mapgroups.calculus import (
    BasedMapElement,
    FullMapElement,
    SampledMap,
    evaluate,
    gauge_action,
    inverse,
    log_derivative_from_samples,
    multiply,
    sample_map,
)
from mapgroups.errors import (
    AmbiguityError,
    EvaluationError,
    MapGroupError,
    NumericBlowupError,
    ParseError,
    SchemaError,
)
from mapgroups.evolution import evol, transport
from mapgroups.forms import ChartForm, ComplexForm, RealIntervalForm, ZeroForm, behnke_stein_basis
from mapgroups.groups import (
    AbelianQuotient,
    GeneralLinear,
    GroupElement,
    Lattice,
    SpecialLinear,
    exp_lattice_group,
    is_in_exp_image,
)
from mapgroups.paths import Arc, Circle, Interval, PlaneChart, PuncturedPlane, Segment, loop_basis
from mapgroups.smith import AbelianPresentation, discreteness_report, hom_rank, smith_normal_form
from mapgroups.topology import component_class, period, period_vector

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AbelianPresentation",
    "AbelianQuotient",
    "AmbiguityError",
    "Arc",
    "BasedMapElement",
    "ChartForm",
    "Circle",
    "ComplexForm",
    "EvaluationError",
    "FullMapElement",
    "GeneralLinear",
    "GroupElement",
    "Interval",
    "Lattice",
    "MapGroupError",
    "NumericBlowupError",
    "ParseError",
    "PlaneChart",
    "PuncturedPlane",
    "RealIntervalForm",
    "SampledMap",
    "SchemaError",
    "Segment",
    "SpecialLinear",
    "ZeroForm",
    "behnke_stein_basis",
    "component_class",
    "discreteness_report",
    "evaluate",
    "evol",
    "exp_lattice_group",
    "gauge_action",
    "hom_rank",
    "inverse",
    "is_in_exp_image",
    "log_derivative_from_samples",
    "loop_basis",
    "multiply",
    "period",
    "period_vector",
    "sample_map",
    "smith_normal_form",
    "transport",
]
