"""conefix: fixed points of contraction mappings in cone metric spaces.

Vector-valued metrics ordered by a cone in a finite-dimensional or
grid-sampled Banach space; sampled certificates for the contraction
condition d(TSx, RSy) <= a d(Tx, Ry); Picard iteration with geometric
image-space error envelopes, localization to a ball, power-map and
multi-start variants; and a TOML scenario harness with a bundled
reproduction suite.
"""

from .cone_metric import (
    ConeMetricSpace,
    DriftTracker,
    SequenceDiagnostics,
    check_metric_axioms,
    diagnose_sequence,
    distance,
    drift_escape,
    exp_space,
    metric_vector,
    product_space,
    scalar_distance,
)
from .errors import (
    BallInvariantError,
    ConefixError,
    DomainEscapeError,
    EvaluationError,
    ExpressionSyntaxError,
    LayoutMismatchError,
    PreconditionError,
    UnknownIdentifierError,
    ValidationError,
)
from .expressions import eval_array, eval_node, parse_expression, unparse
from .harness import (
    BUNDLED_SCENARIOS,
    EXIT_BY_STATUS,
    Scenario,
    ScenarioOutcome,
    build_space,
    build_triple,
    format_table,
    load_scenario,
    reproduce,
    run_scenario,
    scenario_from_dict,
    serialize_scenario,
)
from .mappings import (
    BUILTIN_MAPS,
    FamilyClassification,
    IteratedMap,
    MapTriple,
    ModulusEstimate,
    ProbeResult,
    RealMap,
    SubsequentialProbe,
    builtin_map,
    classify_family,
    estimate_tr_modulus,
    modulus_certificate_holds,
    parse_map,
    probe_injectivity,
    probe_subsequential_convergence,
    probe_triple,
    sample_pairs,
)
from .ordered_space import (
    CandidateSet,
    ConeAxiomReport,
    Layout,
    OrderCone,
    SpaceElement,
    estimate_normal_constant,
    in_cone,
    leq,
    nonneg_grid,
    norm,
    orthant,
    snap_zero,
    strictly_less,
    verify_cone_axioms,
    zeros_like,
)
from .solver import (
    BallCheck,
    IterationTrace,
    SolveConfig,
    SolveResult,
    SolveStatus,
    UniquenessReport,
    error_bound,
    picard,
    solve,
    solve_localized,
    solve_power,
    verify_uniqueness,
)

__version__ = "0.1.0"
