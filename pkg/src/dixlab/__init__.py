"""Averaging sets, central selections and closure properties on fibered
matrix-algebra models of unital C*-algebras."""

from .algebra import (Base, Block, Conflict, Element, FiberedAlgebra, IdealDesc, f_trace, jdp,
                      jwc, lift, matrix_algebra, matrix_element, x_set, y_set)
from .averaging import (EucpOperator, MixingChain, MixingOperator, apply, blockwise_scalarize,
                        compose, descent_to_center, eucp_from_state, state_for_value, verify,
                        weyl_twirl)
from .catalog import fixture, random_algebra, random_element
from .convex import ConvexRegion, center_minimax, hausdorff, intersect
from .io import emit_spec, load_spec, parse_spec
from .membership import (in_cq, in_dix, in_dix_bar, in_mag, in_mag_bar, magajna_distance,
                         validate_certificate)
from .numrange import numerical_range
from .psi import envelopes, psi, psi_r
from .render import render
from .selection import SelectionProblem, dist_to_center, feasible, min_max_step
from .structure import check_dixadd, check_dixmult, check_magclosed, span_identities

__all__ = [
    "Base",
    "Block",
    "Conflict",
    "Element",
    "FiberedAlgebra",
    "IdealDesc",
    "f_trace",
    "jdp",
    "jwc",
    "lift",
    "matrix_algebra",
    "matrix_element",
    "x_set",
    "y_set",
    "EucpOperator",
    "MixingChain",
    "MixingOperator",
    "apply",
    "blockwise_scalarize",
    "compose",
    "descent_to_center",
    "eucp_from_state",
    "state_for_value",
    "verify",
    "weyl_twirl",
    "fixture",
    "random_algebra",
    "random_element",
    "ConvexRegion",
    "center_minimax",
    "hausdorff",
    "intersect",
    "emit_spec",
    "load_spec",
    "parse_spec",
    "in_cq",
    "in_dix",
    "in_dix_bar",
    "in_mag",
    "in_mag_bar",
    "magajna_distance",
    "validate_certificate",
    "numerical_range",
    "envelopes",
    "psi",
    "psi_r",
    "render",
    "SelectionProblem",
    "dist_to_center",
    "feasible",
    "min_max_step",
    "check_dixadd",
    "check_dixmult",
    "check_magclosed",
    "span_identities",
]

__version__ = "0.1.0"
