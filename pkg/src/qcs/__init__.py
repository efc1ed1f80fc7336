"""Finite-time distributed optimization over digraphs with integer messages.

Nodes holding integer mass/token pairs repeatedly split and randomly
route their mass, certify quantized agreement through max/min vote
flooding, and terminate on their own in finitely many steps.  The
package provides the synchronous and bounded-delay engines, the
closed-form completion bounds with an exact walk oracle, the task
scheduling and federated aggregation mappings, evaluation metrics, and
a reproducible experiment harness with a CLI.
"""

from .applications import (
    FederatedInstance,
    SchedulingInstance,
    federated_init,
    federated_recover,
    generic_init,
    generic_optimum,
    make_scheduling_recovery,
    scheduling_init,
    scheduling_recover,
    scheduling_utilizations,
)
from .async_engine import AsyncEngine, DelayModel, InFlightEntry, run_async, step_async
from .bounds import (
    bounds_report,
    completion_step_bound,
    completion_step_bound_delayed,
    initial_state_error,
    target_quotient,
    token_walk_probability,
    visit_prob_bound,
    visit_prob_bound_delayed,
    windows_for_confidence,
    windows_for_confidence_delayed,
)
from .digraph import (
    Digraph,
    TransmissionDistribution,
    diameter,
    generate_random_digraph,
    is_strongly_connected,
    transmission_distribution,
)
from .errors import (
    CapacityExceededError,
    ConfigError,
    ConservationError,
    GraphGenerationError,
    InvalidInitializationError,
    InvalidInstanceError,
    InvariantError,
    NotStronglyConnectedError,
    ProtocolError,
    QcsError,
    RoutingError,
)
from .experiments import (
    ExperimentConfig,
    parse_config,
    run_experiment,
    run_one_trial,
    run_trials,
)
from .metrics import ErrorSeries, TrajectoryRecord, TrialStats, normalized_error, trial_stats
from .protocol import (
    NodeState,
    OutboundMessage,
    VoteMessage,
    absorb,
    ceil_div,
    finalize_if_converged,
    floor_div,
    init_node,
    merge_votes,
    refresh_votes,
    split_mass,
    split_pieces,
)
from .sync_engine import RunConfig, RunOutcome, SyncEngine, run_sync, step_sync

__version__ = "0.1.0"

__all__ = [
    "AsyncEngine",
    "CapacityExceededError",
    "ConfigError",
    "ConservationError",
    "DelayModel",
    "Digraph",
    "ErrorSeries",
    "ExperimentConfig",
    "FederatedInstance",
    "GraphGenerationError",
    "InFlightEntry",
    "InvalidInitializationError",
    "InvalidInstanceError",
    "InvariantError",
    "NodeState",
    "NotStronglyConnectedError",
    "OutboundMessage",
    "ProtocolError",
    "QcsError",
    "RoutingError",
    "RunConfig",
    "RunOutcome",
    "SchedulingInstance",
    "SyncEngine",
    "TrajectoryRecord",
    "TransmissionDistribution",
    "TrialStats",
    "VoteMessage",
    "absorb",
    "bounds_report",
    "ceil_div",
    "completion_step_bound",
    "completion_step_bound_delayed",
    "diameter",
    "federated_init",
    "federated_recover",
    "finalize_if_converged",
    "floor_div",
    "generate_random_digraph",
    "generic_init",
    "generic_optimum",
    "init_node",
    "initial_state_error",
    "is_strongly_connected",
    "make_scheduling_recovery",
    "merge_votes",
    "normalized_error",
    "parse_config",
    "refresh_votes",
    "run_async",
    "run_experiment",
    "run_one_trial",
    "run_sync",
    "run_trials",
    "scheduling_init",
    "scheduling_recover",
    "scheduling_utilizations",
    "split_mass",
    "split_pieces",
    "step_async",
    "step_sync",
    "target_quotient",
    "token_walk_probability",
    "transmission_distribution",
    "trial_stats",
    "visit_prob_bound",
    "visit_prob_bound_delayed",
    "windows_for_confidence",
    "windows_for_confidence_delayed",
]
