"""Exact low-rank Tucker completion of third-order tensors.

Pipeline: uniform sampling with replacement, second-moment spectral
initialization of the factor subspaces, incoherence trimming, and gradient
descent over a product of Grassmannians with a penalized objective and
geodesic line search.  A simulation harness reproduces the recovery phase
transition in the sampling ratio.
"""

from .completion import (
    DescentConfig,
    SolveReport,
    SolveState,
    coherence_penalty,
    fit_objective,
    grassmann_descent,
    line_search,
    riemannian_gradient,
    solve_core,
)
from .experiments import (
    CellStats,
    GroundTruth,
    SweepResult,
    TrialRecord,
    generate_odeco,
    perturbed_init_trial,
    run_trial,
    sweep,
)
from .grassmann import (
    TripleFrame,
    coherence,
    geodesic,
    proj_distance,
    tangent_project,
    trim,
    triple_distance,
)
from .observations import ObservationSet, evaluate_tucker_at, project_omega, sample_uniform
from .spectral import (
    SecondMomentEstimate,
    initialize,
    second_moment_estimate,
    top_eigenspace,
)
from .tensor_ops import (
    condition_number,
    inner,
    multilinear_product,
    multilinear_ranks,
    norm,
    refold,
    spectral_lower_bound,
    unfold,
)

__version__ = "0.1.0"

__all__ = [
    "CellStats",
    "DescentConfig",
    "GroundTruth",
    "ObservationSet",
    "SecondMomentEstimate",
    "SolveReport",
    "SolveState",
    "SweepResult",
    "TrialRecord",
    "TripleFrame",
    "coherence",
    "coherence_penalty",
    "condition_number",
    "evaluate_tucker_at",
    "fit_objective",
    "generate_odeco",
    "geodesic",
    "grassmann_descent",
    "initialize",
    "inner",
    "line_search",
    "multilinear_product",
    "multilinear_ranks",
    "norm",
    "perturbed_init_trial",
    "proj_distance",
    "project_omega",
    "refold",
    "riemannian_gradient",
    "run_trial",
    "sample_uniform",
    "second_moment_estimate",
    "solve_core",
    "spectral_lower_bound",
    "sweep",
    "tangent_project",
    "top_eigenspace",
    "trim",
    "triple_distance",
    "unfold",
]
