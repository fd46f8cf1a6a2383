"""Regularization diagnostics for Krylov solvers on discrete ill-posed problems.

The package generates test problems with controlled singular value decay,
runs LSQR and its relatives on one reorthogonalized Golub-Kahan
bidiagonalization, and measures how closely the Krylov subspace follows
the dominant right singular subspace.
"""

from .bidiag import BidiagState, lanczos_bidiag, ritz_values, verify_relations
from .errors import NumericalError, RegdiagError, ValidationError
from .problems import (Geometric, IllPosedProblem, NoisyProblem, PowerLaw, SyntheticSpec,
                       add_noise, gen_deriv2, gen_shaw, gen_synthetic, make_problem)
from .solvers import (SolutionSeries, cgls_series, cgme_series, filter_factors,
                      filtered_solution, lsmr_series, lsqr_series, semi_convergence)
from .subspace import (SubspaceDiagnostics, diagnose, estimate_delta_moderate,
                       estimate_delta_severe, estimate_lagrange_moderate,
                       estimate_lagrange_severe, explicit_krylov_basis, lagrange_factors,
                       ritz_condition_check, sin_theta_exact)
from .svdtools import (SvdFactors, compute_svd, picard_data, tikhonov_solve, transition_index,
                       tsvd_error_curve, tsvd_solve)

__all__ = [
    "BidiagState", "Geometric", "IllPosedProblem", "NoisyProblem", "NumericalError",
    "PowerLaw", "RegdiagError", "SolutionSeries", "SubspaceDiagnostics", "SvdFactors",
    "SyntheticSpec", "ValidationError", "add_noise", "cgls_series", "cgme_series",
    "compute_svd", "diagnose", "estimate_delta_moderate", "estimate_delta_severe",
    "estimate_lagrange_moderate", "estimate_lagrange_severe", "explicit_krylov_basis",
    "filter_factors", "filtered_solution", "gen_deriv2", "gen_shaw", "gen_synthetic",
    "lagrange_factors", "lanczos_bidiag", "lsmr_series", "lsqr_series", "make_problem",
    "picard_data", "ritz_condition_check", "ritz_values", "semi_convergence",
    "sin_theta_exact", "tikhonov_solve", "transition_index", "tsvd_error_curve", "tsvd_solve",
    "verify_relations",
]

__version__ = "0.1.0"
