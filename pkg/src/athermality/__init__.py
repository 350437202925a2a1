"""Athermality: convertibility deciders and resource rates for quantum
thermodynamic states."""

from . import conversion, divergences, linalg, states, symmetry, types_engine
from .conversion import (
    ConversionVerdict,
    Decision,
    build_Q,
    conversion_distance_to_quasiclassical,
    covariant_convertible,
    gpc_convertible_qubit,
    gpc_feasible,
    pure_parent,
    relative_majorization,
    same_diagonal_gpc,
)
from .divergences import (
    coherence,
    cost_single_shot_gpo,
    distill_single_shot,
    dmax,
    dmax_eps_classical,
    dmin_eps_classical,
    relative_entropy,
)
from .states import AthermalityState, HamiltonianSpec, gibbs_state, golden_unit, tensor
from .symmetry import bohr_analysis, is_covariant, pinch, relatively_nondegenerate
from .types_engine import (
    TypeVector,
    chi_state,
    coherence_growth,
    distill_rate_estimate,
    enumerate_types,
    pure_cost_per_copy,
    slar_budget,
    slar_reference,
)

__version__ = "0.1.0"

__all__ = [
    "AthermalityState",
    "ConversionVerdict",
    "Decision",
    "HamiltonianSpec",
    "TypeVector",
    "bohr_analysis",
    "build_Q",
    "chi_state",
    "coherence",
    "coherence_growth",
    "conversion",
    "conversion_distance_to_quasiclassical",
    "cost_single_shot_gpo",
    "covariant_convertible",
    "distill_rate_estimate",
    "distill_single_shot",
    "divergences",
    "dmax",
    "dmax_eps_classical",
    "dmin_eps_classical",
    "enumerate_types",
    "gibbs_state",
    "golden_unit",
    "gpc_convertible_qubit",
    "gpc_feasible",
    "is_covariant",
    "linalg",
    "pinch",
    "pure_cost_per_copy",
    "pure_parent",
    "relative_entropy",
    "relative_majorization",
    "relatively_nondegenerate",
    "same_diagonal_gpc",
    "slar_budget",
    "slar_reference",
    "states",
    "symmetry",
    "tensor",
    "types_engine",
]
