"""conelab: convex-cone algebra, heavy-tailed sampling, and desk-scale
verification of large-deviation limits for partial sums."""

__version__ = "0.1.0"

from .cone import (
    ConeStructure,
    CoordinateThreshold,
    CorrelationThreshold,
    DirectionPredicate,
    FullSphere,
    PolarEvent,
    SupportThreshold,
    direction,
    event_member,
    norm,
)
from .axioms import AxiomReport, axiom_suite
from .cones import (
    FinitePointSet,
    convex_bodies_cone,
    functions_cone,
    max_cone,
    union_cone,
)
from .geometry import (
    DirectionGrid,
    Polytope,
    circle_grid,
    hausdorff_distance,
    icosphere_grid,
    lp_support_distance,
    polytope,
    polytope_minkowski_sum,
    support_function,
)
from .gridfn import GridFunction, gf_add, gf_inner, gf_metric, gf_norm, gf_scale, hat_function
from .regvar import (
    Constant,
    KaramataQuery,
    LogPower,
    PowerSchedule,
    RegVarSpec,
    SpectralSpec,
    a_n,
    gamma_n,
    karamata_limit,
    karamata_ratio,
    mu_polar,
    sample_element,
    sample_radial,
    sigma_estimate,
    tail_prob,
    truncated_moment_ratio,
    validate_regime,
    wilson_interval,
)
from .experiments import (
    CenteringSpec,
    EstimateRow,
    ExperimentConfig,
    RunResult,
    centering_A_n,
    embed,
    embedded_difference,
    estimate_event_prob,
    exact_max_cone_prob,
    partial_sum,
    shifted_event_member,
    single_big_jump_diag,
    sumconv_check,
    theorem1_run,
    theorem2_run,
)
