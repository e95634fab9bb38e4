"""Access probability for UAV-relayed vehicular sidelink: analytic model,
resource assignment strategies and a Monte Carlo validator."""

from .analytic import (
    AltitudePlan,
    AnalyticReport,
    NoFeasibleAltitude,
    average_access_prob,
    beam_access_prob,
    evaluate,
    occupation_prob,
    plan_altitude,
    q_function,
    valid_request_prob,
)
from .beamgeom import Beam, BeamCodebook, beamwidth, make_codebook, segment_length
from .mcsim import AccessReport, TrialOutcome, run_experiment, run_trial
from .rra import ResourceAllocation, allocate, beam_based_alloc, fair_alloc
from .scenario import (
    EmptyBeamMode,
    Fidelity,
    FootprintMode,
    RRAKind,
    ScenarioConfig,
    ValidationError,
    load_config,
    resource_budget,
    validate,
)

__version__ = "0.1.0"
