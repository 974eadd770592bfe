"""Network creation game toolkit: exact costs, equilibrium verifiers, and
structural certificates for the sum-distance link-buying game."""

__version__ = "0.1.0"

from .errors import (
    FormatError,
    InvalidDeviationError,
    InvalidProfileError,
    LimitExceededError,
    NcgError,
    RejectionLimitError,
)
from .game import (
    EXHAUSTIVE_OPT_LIMIT,
    INF,
    DistanceTable,
    Game,
    Graph,
    OwnedGraph,
    StrategyProfile,
    all_pairs_distances,
    build_graph,
    optimal_social_cost,
    player_cost,
    price_ratio,
    social_cost,
    star_clique_bound,
)
from .deviations import (
    BEST_RESPONSE_LIMIT,
    DEVIATION_CLASSES,
    Deviation,
    DeviationDelta,
    DynamicsTrace,
    EquilibriumReport,
    best_response,
    best_response_dynamics,
    buy_delta_bound,
    exact_delta,
    sell_buy_delta,
    verify_equilibrium,
)
from .structure import (
    BiconnectivityDecomposition,
    LayerProfile,
    UniformityCertificate,
    WindowInequalityResult,
    biconnectivity,
    check_window_inequality,
    component_diameter,
    graph_power,
    hanging_tree,
    is_distance_uniform,
    layers,
    m_window,
    nonbridge_outdegree,
    r_window,
    r_window_by_index,
    uniformity_certificate,
    window_radius,
)
from .asets import (
    ASetFamily,
    a_set_family,
    check_crossing_remark,
    crossings,
    family_m_value,
    independence_number,
    max_component_diameter,
    prop2_bound,
    removal_distance_increase,
    wei_bound,
)
from .constructions import (
    ConstructionSpec,
    clique_of_stars,
    clique_profile,
    cycle_profile,
    enumerate_graphs,
    enumerate_profiles,
    make,
    path_profile,
    pruefer_decode,
    random_biconnected,
    random_profile,
    star_profile,
    tree_from_pruefer,
)
from .reports import (
    DegreeBoundReport,
    StructureChecksReport,
    analyze_profile,
    biconnected_structure_checks,
    degree_bound_report,
    hard_failures,
)
from .search import (
    ExperimentConfig,
    ResultRecord,
    SweepResult,
    enumerate_equilibria,
    hunt_equilibria,
    is_isomorphic,
    isomorphism_classes,
    prefilter_witness,
    read_records,
    record_from_json,
    theorem_sweep,
    write_records,
)
from .formats import (
    load_profile,
    parse_profile_json,
    parse_profile_text,
    parse_rational,
    profile_id,
    profile_to_json_dict,
    profile_to_text,
)
