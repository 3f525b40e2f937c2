"""Round-based wireless sensor network simulator.

Compares LEACH against an energy-aware protocol that puts redundant,
low-energy nodes to sleep each round and elects cluster heads with
probabilities that fall off with distance from the base station.
"""

from .config import SimulationConfig, load_config
from .coverage_planner import CoveragePlan, coverage_probability, max_sleep_count, plan_coverage, required_density
from .deployment import FieldConfig, Node, NodeState, ProbeGrid, build_probe_grid, deploy_uniform, distance, neighbors
from .errors import (
    ConfigurationError,
    DomainError,
    EmptyDeploymentError,
    GeometryError,
    InternalInvariantError,
    NotACandidateError,
    SimulationComplete,
)
from .metrics import RoundRecord, SimulationResult, energy_variance, lifetime_summary, measure_coverage
from .protocol_engine import (
    DIRECT_TO_BS,
    ClusterAssignment,
    NetworkState,
    Protocol,
    ProtocolPolicy,
    SegmentMap,
    assign_segments,
    elect_cluster_heads,
    form_clusters,
    leach_ch_probability,
    nte_score,
    run_round,
    run_simulation,
    select_sleepers,
)
from .radio_energy import RadioParams, aggregation_energy, rx_energy, tx_energy

__version__ = "0.1.0"
