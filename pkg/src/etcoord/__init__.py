"""Event-triggered time coordination of cooperating vehicles.

Agents progress along individual desired trajectories, each parameterized by
a virtual time.  A decentralized second-order controller synchronizes the
virtual times and tracks a desired pace, while inter-agent communication
happens only when a locally monitored estimation error crosses a threshold.
The package provides the simulation engine, the analytic certificates that
back the design (Lyapunov pair, convergence rate, inter-event floor) and a
CLI for running and validating bundled scenarios.
"""

from ._kernels import HAVE_FAST
from .algebra import (
    GainSet,
    LyapunovCertificate,
    convergence_rate,
    disagreement_projection,
    input_bound,
    lyapunov_certificate,
    min_inter_event_interval,
    overshoot_gain,
    reduced_laplacian,
)
from .bezier import BezierTrajectory, TrajectorySet, position, velocity, virtual_target_velocity
from .coordination import (
    CoordinationErrorState,
    CoordinationState,
    alpha_bar,
    coordination_accel,
    coordination_error,
    step_coordination,
)
from .engine import (
    AgentDisturbance,
    ContractViolation,
    NumericalDivergence,
    RunResult,
    Scenario,
    SimulationAbort,
    certify,
    coordination_achieved_time,
    iss_envelope_check,
    run,
    summarize,
    zeno_report,
)
from .etc import (
    EstimatorBank,
    EstimatorState,
    EventRecord,
    PaceProfile,
    ThresholdFunction,
    check_trigger,
    estimation_error,
    fire_event,
    propagate_estimator,
)
from .graphs import Digraph, adjacency, has_spanning_tree, laplacian, neighborhood, spectrum
from .vehicle import DisturbanceWindow, PFConfig, VehicleState, inject_disturbance, pf_error, pf_step

__version__ = "0.1.0"
