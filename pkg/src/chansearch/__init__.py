"""Global versus local path search in random-state channel graphs.

The package builds channel graphs (notably the fully parallel family and
its series composition), samples link states under the independent
vacancy model, runs the bilateral and unilateral depth-first search
algorithms behind a locality-enforcing probe oracle, reproduces their
exact expected costs and the matching upper/lower bound curves, computes
true optimal costs by dynamic programming over information states at
small scale, and drives reproducible Monte Carlo experiments.
"""

from .analytics import (
    OffspringDistribution,
    OffspringLaw,
    PayoffDistribution,
    blocking_limit,
    blocking_probability,
    bound_global_upper,
    bound_local_lower,
    bound_local_upper,
    exact_cost_bilat,
    exact_cost_unilat,
    linking_probability,
    lower_tail,
    offspring_distribution,
    payoff_distribution,
    payoff_expectation,
    series_cost_bound,
    upper_tail,
)
from .errors import (
    DuplicateProbeError,
    InternalConsistencyError,
    LocalityViolationError,
    SizeLimitError,
)
from .experiments import TrialStats, run_monte_carlo, sweep
from .graphs import (
    ChannelGraph,
    GraphKind,
    ValidationReport,
    Violation,
    build_fully_parallel,
    build_series_composition,
    count_st_paths,
    enumerate_st_paths,
    export_graph,
    import_graph,
    validate,
)
from .optimal import (
    ConjectureReport,
    InfoState,
    OptimalResult,
    conjecture_report,
    evaluate_fixed_strategy,
    induced_strategy,
    info_state_from_statuses,
    is_terminal_state,
    optimal_expected_probes,
    statuses_from_info_state,
)
from .search import (
    ALGORITHMS,
    SearchOutcome,
    Verdict,
    allowed_modes,
    bilat_search,
    outcome_to_json,
    run_to_outcome,
    unilat_search,
)
from .sessions import (
    LocalityMode,
    ProbeSession,
    compute_accessible,
    replay_trace,
    trace_from_json,
    trace_to_json,
)
from .states import (
    LinkStatus,
    NetworkState,
    busy_frontier_cut,
    is_linked,
    link_uniforms,
    sample_state,
    state_from_idle_links,
    verify_cut_certificate,
    verify_path_certificate,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
