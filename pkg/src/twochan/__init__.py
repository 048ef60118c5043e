"""Decoupling of two-channel block Hamiltonians.

A Hermitian block operator [[A1, B], [B^*, A2]] induces, in each channel, an
eigenvalue problem with an energy-dependent potential. This package solves
the nonlinear operator equation that removes the energy dependence: a
contraction fixed-point iteration finds the off-diagonal coupling block q,
from which energy-independent channel Hamiltonians, a block-diagonalizing
similarity transform, its unitary refinement, and biorthogonal eigensystems
are constructed. A verification layer measures every claimed identity
against explicit tolerances and a CLI wraps generation, solving,
verification, and parameter sweeps.
"""

from .errors import (
    ConvergenceFailureError,
    DivergedError,
    EmptySpectrumError,
    InadmissibleError,
    IncompleteEigensystemError,
    InstanceFormatError,
    InvalidParamsError,
    NonRealSpectrumError,
    NotConvergedError,
    NotHermitianError,
    ResolventSingularError,
    SingularMatrixError,
    TwoChanError,
)
from .linalg import (
    HermitianEig,
    hermitian_eig,
    hermitian_sqrt_pair,
    hilbert_schmidt_norm,
    operator_norm,
    solve_linear,
    sorted_match_error,
    spectral_distance,
)
from .model import (
    GapReport,
    TwoChannelHamiltonian,
    assemble_full,
    effective_potential,
    gap_report,
    generate_instance,
    other_channel,
)
from .io import (
    SweepSpec,
    decode_matrix,
    decode_vector,
    dumps_stable,
    encode_matrix,
    encode_vector,
    instance_digest,
    instance_from_dict,
    instance_to_dict,
    read_instance,
    read_matrix_document,
    read_sweep_spec,
    write_eigenvalues_document,
    write_instance,
    write_matrix_document,
)
from .riccati import (
    RiccatiSolution,
    SolverConfig,
    admissibility_bound,
    check_admissibility,
    conjugate_solution,
    fixed_point_map,
    riccati_residual,
    solution_from_q,
    solve,
)
from .decouple import (
    DecoupledChannel,
    DecouplingTransform,
    InvariantSubspace,
    build_channel,
    build_transform,
    eigenpair_solves_original,
    invariant_subspace,
    verify_basic_equation,
)
from .verify import (
    CheckResult,
    SpectralReport,
    ToleranceProfile,
    check_biorthogonality,
    check_completeness,
    full_report,
    render_report,
)

__version__ = "0.1.0"

__all__ = [
    "TwoChanError",
    "InvalidParamsError",
    "InstanceFormatError",
    "NotHermitianError",
    "SingularMatrixError",
    "EmptySpectrumError",
    "ConvergenceFailureError",
    "ResolventSingularError",
    "InadmissibleError",
    "NotConvergedError",
    "DivergedError",
    "NonRealSpectrumError",
    "IncompleteEigensystemError",
    "HermitianEig",
    "hermitian_eig",
    "hermitian_sqrt_pair",
    "hilbert_schmidt_norm",
    "operator_norm",
    "solve_linear",
    "sorted_match_error",
    "spectral_distance",
    "GapReport",
    "TwoChannelHamiltonian",
    "assemble_full",
    "effective_potential",
    "gap_report",
    "generate_instance",
    "other_channel",
    "SweepSpec",
    "decode_matrix",
    "decode_vector",
    "dumps_stable",
    "encode_matrix",
    "encode_vector",
    "instance_digest",
    "instance_from_dict",
    "instance_to_dict",
    "read_instance",
    "read_matrix_document",
    "read_sweep_spec",
    "write_eigenvalues_document",
    "write_instance",
    "write_matrix_document",
    "RiccatiSolution",
    "SolverConfig",
    "admissibility_bound",
    "check_admissibility",
    "conjugate_solution",
    "fixed_point_map",
    "riccati_residual",
    "solution_from_q",
    "solve",
    "DecoupledChannel",
    "DecouplingTransform",
    "InvariantSubspace",
    "build_channel",
    "build_transform",
    "eigenpair_solves_original",
    "invariant_subspace",
    "verify_basic_equation",
    "CheckResult",
    "SpectralReport",
    "ToleranceProfile",
    "check_biorthogonality",
    "check_completeness",
    "full_report",
    "render_report",
    "__version__",
]
