"""LUCI-diagram scheduling of surface-code syndrome extraction on defective lattices.

The pipeline runs lattice -> gauge -> shapes -> heuristic -> ilpmodel ->
solver -> analysis; ``luciopt.cli`` wires it to files.  The scikit-learn
wrapper lives in ``luciopt.estimator`` and is not imported here.
"""

from .lattice import DropoutConfig, PatchSpec, build_patch, mid_cycle_operators, sample_dropout
from .gauge import GaugeCode, build_gauge_code, code_distance
from .shapes import Shape, build_catalog, enumerate_shapes
from .heuristic import DiagramError, Instance, LuciDiagram, default_diagram, validate_diagram
from .ilpmodel import IlpModel, Objective, build_model, objective_terms
from .solver import Solution, SolveParams, feasibility, solve
from .analysis import (compile_circuit, detectors, export_stim, measurement_frequency_stats,
                       min_weight_paths, volume_stats)

__version__ = "0.1.0"

__all__ = [
    "DropoutConfig", "PatchSpec", "build_patch", "mid_cycle_operators", "sample_dropout",
    "GaugeCode", "build_gauge_code", "code_distance",
    "Shape", "build_catalog", "enumerate_shapes",
    "DiagramError", "Instance", "LuciDiagram", "default_diagram", "validate_diagram",
    "IlpModel", "Objective", "build_model", "objective_terms",
    "Solution", "SolveParams", "feasibility", "solve",
    "compile_circuit", "detectors", "export_stim", "measurement_frequency_stats",
    "min_weight_paths", "volume_stats",
]
