"""Redundancy-d scheduling with scaled Bernoulli service requirements.

Event-driven simulation of cancel-on-completion replication over N
FCFS servers, an auxiliary synchronized-drain construction coupled to
it pathwise, and the analytical stability / waiting-time / synchronicity
bounds the coupling supports.
"""

from .auxiliary import (
    AuxState,
    CoupledResult,
    CoupledTrace,
    DominanceViolation,
    aux_apply_type_a,
    aux_apply_type_b1,
    aux_drain,
    run_auxiliary,
    run_coupled,
)
from .bounds import (
    BoundReport,
    Mg1Params,
    SearchBoundExceeded,
    StabilityReport,
    UnsupportedClosedFormError,
    expected_jumps_bound,
    find_k_epsilon,
    latency_upper_bound,
    latency_upper_bound_loose,
    mg1_expected_workload,
    mg1_params,
    renewal_function,
    renewal_function_mc,
    sufficient_condition,
    sync_fraction_bound,
    waiting_time_upper_bound,
)
from .config import ConfigurationError, ScenarioConfig, config_from_mapping, x_spec_from_kind
from .experiments import (
    GridSpec,
    ScanResult,
    StabilityVerdict,
    export_coupled_trace,
    grid_from_toml,
    preset,
    run_grid,
    scenario_from_toml,
    stability_scan,
    verdict,
)
from .service import (
    DistributionContractError,
    ServiceSpec,
    XSpec,
    b1_rate_factor,
    classify_job,
    expected_min_sq_x,
    expected_min_x,
    expected_min_x_mc,
    job_type_probabilities,
    sample_service,
    sample_x,
    validate_unit_mean,
)
from .simulate import SimMetrics, run_simulation, time_to_first_sync
from .streams import ArrivalEvent, EventStream, generate_coupled_stream, generate_stream
from .workload import (
    JobOutcome,
    WorkloadState,
    apply_arrival,
    drain,
    in_truncated_space,
    is_synchronized,
    ordered_indices,
    surplus,
    sync_time_in_interval,
)

__version__ = "0.1.0"

__all__ = [
    "ArrivalEvent",
    "AuxState",
    "BoundReport",
    "ConfigurationError",
    "CoupledResult",
    "CoupledTrace",
    "DistributionContractError",
    "DominanceViolation",
    "EventStream",
    "GridSpec",
    "JobOutcome",
    "Mg1Params",
    "ScanResult",
    "ScenarioConfig",
    "SearchBoundExceeded",
    "ServiceSpec",
    "SimMetrics",
    "StabilityReport",
    "StabilityVerdict",
    "UnsupportedClosedFormError",
    "WorkloadState",
    "XSpec",
    "apply_arrival",
    "aux_apply_type_a",
    "aux_apply_type_b1",
    "aux_drain",
    "b1_rate_factor",
    "classify_job",
    "config_from_mapping",
    "drain",
    "expected_jumps_bound",
    "expected_min_sq_x",
    "expected_min_x",
    "expected_min_x_mc",
    "export_coupled_trace",
    "find_k_epsilon",
    "generate_coupled_stream",
    "generate_stream",
    "grid_from_toml",
    "in_truncated_space",
    "is_synchronized",
    "job_type_probabilities",
    "latency_upper_bound",
    "latency_upper_bound_loose",
    "mg1_expected_workload",
    "mg1_params",
    "ordered_indices",
    "preset",
    "renewal_function",
    "renewal_function_mc",
    "run_auxiliary",
    "run_coupled",
    "run_grid",
    "run_simulation",
    "sample_service",
    "sample_x",
    "scenario_from_toml",
    "stability_scan",
    "sufficient_condition",
    "surplus",
    "sync_fraction_bound",
    "sync_time_in_interval",
    "time_to_first_sync",
    "validate_unit_mean",
    "verdict",
    "waiting_time_upper_bound",
]
