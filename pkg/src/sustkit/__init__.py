"""sustkit: sustainability-index machinery.

Closed-form index families verified exactly against their PDE models,
Riemann-Stieltjes sums and variation for weight functions, an explicit
finite-difference solver for the diffusion-type model, weighted index
evaluation with (alpha, beta) fitting, and the recycled-pavement case
study.
"""

from .diffusion import (
    ConvergenceResult,
    NonFiniteFieldError,
    ScalarField,
    ScenarioSpec,
    StabilityError,
    convergence_study,
    field_to_csv,
    field_to_json,
    manufactured_exponential,
    manufactured_quadratic,
    run_scenario,
    scenario_from_json,
    stable_dt,
    step_explicit,
)
from .index import (
    SEVEN_VARIABLES,
    FitResult,
    IndexInputs,
    Interval,
    PsiRangeWarning,
    RankDeficiencyError,
    dHdt_interval,
    fit_alpha_beta,
    index_seven_ab,
    index_value,
    read_observations,
    read_observations_csv,
    read_observations_json,
    weight_from_function,
)
from .pavement import (
    MixDesign,
    MixTableError,
    VariableRange,
    load_mix_table,
    reduction_table,
    run_demo_figures,
    thickness_reduction,
)
from .polynomials import (
    FAMILY_VARIANTS,
    ZERO_TOL,
    SolutionFamily,
    SparsePolynomial,
    build_solution,
    diffusion_residual,
    interaction_residual,
    verify_solution_families,
)
from .riemann_stieltjes import (
    DomainMismatchError,
    NonConvergenceError,
    NonFiniteValueError,
    TaggedPartition,
    VariationBoundReport,
    WeightFunction,
    make_uniform_partition,
    rs_integrate,
    rs_sum,
    total_variation,
    variation_lower_bound_check,
    variation_sup,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceResult",
    "DomainMismatchError",
    "FAMILY_VARIANTS",
    "FitResult",
    "IndexInputs",
    "Interval",
    "MixDesign",
    "MixTableError",
    "NonConvergenceError",
    "NonFiniteFieldError",
    "NonFiniteValueError",
    "PsiRangeWarning",
    "RankDeficiencyError",
    "SEVEN_VARIABLES",
    "ScalarField",
    "ScenarioSpec",
    "SolutionFamily",
    "SparsePolynomial",
    "StabilityError",
    "TaggedPartition",
    "VariableRange",
    "VariationBoundReport",
    "WeightFunction",
    "ZERO_TOL",
    "build_solution",
    "convergence_study",
    "dHdt_interval",
    "diffusion_residual",
    "field_to_csv",
    "field_to_json",
    "fit_alpha_beta",
    "index_seven_ab",
    "index_value",
    "interaction_residual",
    "load_mix_table",
    "make_uniform_partition",
    "manufactured_exponential",
    "manufactured_quadratic",
    "read_observations",
    "read_observations_csv",
    "read_observations_json",
    "reduction_table",
    "rs_integrate",
    "rs_sum",
    "run_demo_figures",
    "run_scenario",
    "scenario_from_json",
    "stable_dt",
    "step_explicit",
    "thickness_reduction",
    "total_variation",
    "variation_lower_bound_check",
    "variation_sup",
    "verify_solution_families",
    "weight_from_function",
]
