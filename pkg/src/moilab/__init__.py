"""moilab: functional calculus for tuples of non-commuting Hermitian matrices.

Finite-spectrum operator functions are finite sums over spectral atoms, so
f(A), f(A, B) and f(A, B, C) are defined for arbitrary symbols.  On top of
that substrate the package provides divided-difference perturbation
identities, Littlewood-Paley band decompositions with Besov-norm upper
bound surrogates, and a family of operator triples whose Schatten-norm
response to a rank-one perturbation grows like sqrt(N) while every
smoothness surrogate of the driving function stays bounded.
"""

__version__ = "0.1.0"

from .besov import (
    BandAboveNyquistError,
    BesovBreakdown,
    GridFunction,
    NonpositiveArgumentError,
    band_piece,
    besov_upper_bound,
    partition_check,
    psi_reference,
    psi_reference_grid,
    tensor_bound_kappa,
    window_w,
)
from .counterexample import (
    CounterexampleInstance,
    ExperimentRecord,
    InvalidEpsilonError,
    NotUnitaryError,
    build_instance,
    dft_unitary,
    epsilon_scaling_run,
    eta,
    lipschitz_rank_bound_check,
    orthonormal_realization,
    phi_symbol,
    rank_estimate_check_pairs,
    verify_growth,
)
from .linalg import (
    DimensionMismatchError,
    EigensolverError,
    HermitianOperator,
    NotHermitianError,
    NotSquareError,
    SpectralAtom,
    SpectralMeasure,
    SvdError,
    hermitian_from_matrix,
    rank_one,
    schatten_norm,
    singular_values,
    spectral_measure,
    spectral_measure_from_projections,
    zero_operator,
)
from .moi import (
    DividedDifference2,
    apply_function_pair,
    apply_function_single,
    apply_function_triple,
    argument_perturbation,
    double_operator_integral,
    first_argument_perturbation,
    perturbation_via_divided_difference,
    triple_operator_integral,
)

__all__ = [
    "BandAboveNyquistError",
    "BesovBreakdown",
    "CounterexampleInstance",
    "DimensionMismatchError",
    "DividedDifference2",
    "EigensolverError",
    "ExperimentRecord",
    "GridFunction",
    "HermitianOperator",
    "InvalidEpsilonError",
    "NonpositiveArgumentError",
    "NotHermitianError",
    "NotSquareError",
    "NotUnitaryError",
    "SpectralAtom",
    "SpectralMeasure",
    "SvdError",
    "apply_function_pair",
    "apply_function_single",
    "apply_function_triple",
    "argument_perturbation",
    "band_piece",
    "besov_upper_bound",
    "build_instance",
    "dft_unitary",
    "double_operator_integral",
    "epsilon_scaling_run",
    "eta",
    "first_argument_perturbation",
    "hermitian_from_matrix",
    "lipschitz_rank_bound_check",
    "orthonormal_realization",
    "partition_check",
    "perturbation_via_divided_difference",
    "phi_symbol",
    "psi_reference",
    "psi_reference_grid",
    "rank_estimate_check_pairs",
    "rank_one",
    "schatten_norm",
    "singular_values",
    "spectral_measure",
    "spectral_measure_from_projections",
    "tensor_bound_kappa",
    "triple_operator_integral",
    "verify_growth",
    "window_w",
    "zero_operator",
]
