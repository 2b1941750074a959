"""Intertwining maps between the Kirchhoff Laplacian on an equilateral graph
and the transition operator of the underlying discrete graph."""
from .discrete import (
    EigDecomp,
    spectral_projector,
    sym_eigendecomposition,
    transition_operator,
    weighted_inner,
    weighted_norm,
    weighted_opnorm,
)
from .dots import (
    DotArrayModel,
    dot_intertwiner,
    dot_spectrum,
    dot_verify,
    load_dot_model,
)
from .errors import InputError, IntertwineError, NumericalError
from .gamma import (
    EdgeWave,
    edgewave_inner,
    gamma_adjoint_apply,
    gamma_apply,
    weyl_identity_residual,
)
from .graph import Graph, builtin_graph, dump_graph, load_graph, random_connected_graph
from .intertwiner import (
    IntertwinerMap,
    band_eigensystem,
    krein_correction_apply,
    phi_eigen_sum,
    phi_riemann_sum,
    stieltjes_table,
    verify_interval,
)
from .oracle import (
    FemSystem,
    assemble_fem,
    dot_oracle_spectrum,
    oracle_compare,
    oracle_resolvent_apply,
    oracle_spectrum,
)
from .report import Check, VerificationReport
from .weyl import band_inverse, scalar_maps, sigma_distance, weyl_matrix

__version__ = "0.1.0"

__all__ = [
    "Check",
    "DotArrayModel",
    "EdgeWave",
    "EigDecomp",
    "FemSystem",
    "Graph",
    "InputError",
    "IntertwineError",
    "IntertwinerMap",
    "NumericalError",
    "VerificationReport",
    "assemble_fem",
    "band_eigensystem",
    "band_inverse",
    "builtin_graph",
    "dot_intertwiner",
    "dot_oracle_spectrum",
    "dot_spectrum",
    "dot_verify",
    "dump_graph",
    "edgewave_inner",
    "gamma_adjoint_apply",
    "gamma_apply",
    "krein_correction_apply",
    "load_dot_model",
    "load_graph",
    "oracle_compare",
    "oracle_resolvent_apply",
    "oracle_spectrum",
    "phi_eigen_sum",
    "phi_riemann_sum",
    "random_connected_graph",
    "scalar_maps",
    "sigma_distance",
    "spectral_projector",
    "stieltjes_table",
    "sym_eigendecomposition",
    "transition_operator",
    "verify_interval",
    "weighted_inner",
    "weighted_norm",
    "weighted_opnorm",
    "weyl_identity_residual",
    "weyl_matrix",
]
