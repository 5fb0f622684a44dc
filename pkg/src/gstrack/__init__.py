"""Tracking time-varying graph signals with a spectral Kalman filter and
two-step adaptive sampling-budget allocation."""

from .graph_core import (
    SpectralBasis,
    WeightedGraph,
    build_laplacian,
    community_graph,
    gft,
    graph_basis,
    igft,
    random_geometric_graph,
    res_realize,
    spectral_decompose,
)
from .dynamics import (
    EvolutionModel,
    ObservationNoise,
    SignalPrior,
    evolve,
    heat_source_trajectory,
    kh_step,
    observe,
    translation_operator,
)
from .spectral_kalman import (
    FilterState,
    Prediction,
    instant_mse,
    predict,
    transition_information,
    update,
)
from .sampling_optimizer import (
    BudgetParams,
    RelaxedDecision,
    SolverOptions,
    TwoStepProblem,
    project_feasible,
    solve_relaxed,
    two_step_gradient,
    two_step_objective,
)
from .policies import (
    SamplingPlan,
    policy_greedy_instant,
    policy_info_gain,
    policy_proposed,
    policy_random,
    round_and_select,
)
from .harness import (
    ScenarioConfig,
    TraceReport,
    accumulated_error,
    build_scenario,
    load_config,
    make_config,
    nmse,
    run_scenario,
    run_sensor_scenario,
    run_social_scenario,
)

__version__ = "0.1.0"
