"""fracpath: occupation measures, Riesz energies, variability and compositions,
generalized Stieltjes integrals and Berman-type inequalities on sampled paths."""

__version__ = "0.1.0"

from .core import (
    CADLAG,
    PIECEWISE_LINEAR,
    DiscreteMeasure,
    EstimateReport,
    SampledPath,
    TimeWindow,
    empty_measure,
    path_diameter,
    restrict,
)
from .pathgen import GeneratorSpec, empirical_holder_exponent, generate

__all__ = [
    "CADLAG",
    "PIECEWISE_LINEAR",
    "DiscreteMeasure",
    "EstimateReport",
    "GeneratorSpec",
    "SampledPath",
    "TimeWindow",
    "empirical_holder_exponent",
    "empty_measure",
    "generate",
    "path_diameter",
    "restrict",
]
