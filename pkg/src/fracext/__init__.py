"""Spectral fractional Laplacian of order s in (1, 2) via the polyharmonic extension.

The package combines an exact spectral oracle ``u = L^{-s} f`` built on
Dirichlet eigenpairs, the Bessel kernel of the extension, its exponential
decay, and a C1 cubic Hermite tensor finite element solver on the truncated
cylinder ``(0, 1) x (0, Y)``.
"""

from .errors import (
    BesselUnderflowWarning,
    ContractError,
    DomainError,
    NumericError,
    SmallTruncationWarning,
)
from .specialfn import bessel_k, bessel_k_scaled, gamma
from .spectral import (
    EigenBasis,
    FracOrder,
    SpectralFunction,
    apply_power,
    eigen_interval,
    eigen_square,
    format_spectral,
    hs_norm,
    make_frac_order,
    oracle_solve,
    parse_spectral,
)
from .extension import (
    DecayTable,
    decay_integral,
    extension_solution,
    flux_check,
    kernel_ode_residual,
    mode_tail_integral,
    psi,
    psi_derivatives,
    truncation_report,
)
from .meshing import CylinderMesh, Partition1D, graded_partition, uniform_partition
from .hermite import (
    HermiteSpace1D,
    TensorSystem,
    assemble,
    assemble_factors,
    basis_matrix,
    clamped_space,
    dump_coo,
    extension_space,
    factor_matrices_x,
    factor_matrices_y,
    hermite_eval,
    hinged_space,
    load_vector,
    mode_operator,
    spectral_x_factors,
)
from .solvers import CylinderSolution, TraceFunction, mode_solve, solve_spd, solve_tensor, trace
from .analysis import (
    ConvergenceRecord,
    Study,
    StudyPoint,
    eoc_column,
    fit_slope,
    run_study,
    solve_problem,
    trace_error,
    trace_hs_error,
    truncated_energy,
)

__version__ = "0.1.0"
