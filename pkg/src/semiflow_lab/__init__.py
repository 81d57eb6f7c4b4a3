"""Numerical laboratory for holomorphic semiflows on the unit disc, the
cocycles and weighted composition semigroups they induce, Blaschke-product
interpolation diagnostics and Bloch-norm strong-continuity experiments."""

from .analytic import (
    AnalyticFn,
    BlaschkeFn,
    Compose,
    Constant,
    Exp,
    GridSpec,
    Identity,
    Log,
    Mobius,
    Polynomial,
    Power,
    Product,
    Quotient,
    Sum,
    TaylorSeries,
    bloch_norm_grid,
    fn_from_json,
    h2_norm,
    hp_norm_boundary,
    taylor,
)
from .blaschke import (
    BlaschkeProduct,
    InterpolationReport,
    PseudoDisc,
    b_factor,
    blaschke_condition_sum,
    blaschke_derivative,
    blaschke_eval,
    gpv_bound_check,
    interpolation_delta,
    pseudo_distance,
    radial_zeros,
    truncation_error_bound,
)
from .cocycles import (
    BlochGridNorm,
    Coboundary,
    H2Norm,
    Weight,
    WeightedSemigroup,
    apply_generator,
    apply_weighted,
    check_cocycle_identity,
    coboundary_eval,
    coboundary_similarity_check,
    cocycle_eval,
    generator_consistency,
    transfer_conjugation_check,
    transfer_generator,
    weight_generator_fd,
    weighted_z_derivative,
)
from .errors import (
    BisectionError,
    CaseMismatch,
    ConfigError,
    DepthExceeded,
    DomainError,
    EscapeError,
    HypothesisError,
    InterpolationError,
    InverseError,
    ModelError,
    MultiplicityError,
    NoConvergence,
    QuadratureError,
    SemiflowError,
    SingularityError,
)
from .flows import (
    Automorphism,
    ConformalMap,
    FlowModel,
    GeneratorSpec,
    KoenigsSpiral,
    KoenigsTranslate,
    NewtonInverse,
    OdeFlow,
    RotatedFlow,
    Trajectory,
    advance,
    automorphism_fixed_points,
    boundary_orbit,
    cayley_map,
    check_semigroup,
    classify_automorphism,
    flow_from_json,
    flow_trace,
    flow_z_derivative,
    generator_fd,
    identity_map,
    koenigs_flow,
    mobius_map,
    ode_flow,
    reflected_cayley_map,
)
from .gap import (
    GapConstruction,
    GapReport,
    SeparabilityReport,
    bloch_gap,
    build_test_function,
    construct_case1,
    construct_case2,
    separability_witness,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
