"""Round loop for LEACH and the sleep-scheduling / segmented-election protocol.

Each round has a set-up phase (optional sleep selection, cluster-head election,
cluster formation) followed by ``frames_per_round`` steady-state frames in
which members report to their head, heads aggregate and forward to the base
station, and sleepers spend nothing.
"""

from __future__ import annotations

import bisect
import enum
import math
from collections.abc import Callable
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np

from .deployment import (
    FieldConfig,
    Node,
    NodeState,
    ProbeGrid,
    build_probe_grid,
    deploy_uniform,
    distance,
    distance_matrix,
)
from .errors import ConfigurationError, GeometryError, InternalInvariantError, NotACandidateError, SimulationComplete
from .metrics import CoverageIndex, RoundRecord, SimulationResult, energy_variance, lifetime_summary
from .radio_energy import RadioParams, aggregated_signals, aggregation_energy, rx_energy, tx_energy

if TYPE_CHECKING:
    from .config import SimulationConfig

# Per-segment election probabilities, closest segment first, dropping 0.05 per
# ring. The inner-0.1 variant sets segment 1 to 0.1, which breaks the "closer
# segments elect more heads" ordering and overloads heads on the segment 1/2
# boundary: first node death then comes ~30% earlier than under LEACH.
SEGMENT_PROBS_INNER_LOW = (0.1, 0.95, 0.9, 0.85, 0.8, 0.75, 0.7, 0.65, 0.6, 0.55)
DEFAULT_SEGMENT_PROBS = (1.0,) + SEGMENT_PROBS_INNER_LOW[1:]
SEGMENT_PRESETS = {"monotone": DEFAULT_SEGMENT_PROBS, "inner-0.1": SEGMENT_PROBS_INNER_LOW}

DIRECT_TO_BS = -1
MIN_AVG_DISTANCE = 1e-6


class Protocol(str, enum.Enum):
    LEACH = "leach"
    PROPOSED = "proposed"


@dataclass(frozen=True)
class ProtocolPolicy:
    kind: Protocol = Protocol.LEACH
    p_leach: float = 0.1
    segment_probs: tuple[float, ...] = DEFAULT_SEGMENT_PROBS
    d_max: float = 3.5
    max_sleep: int = 12
    frames_per_round: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", Protocol(self.kind))
        object.__setattr__(self, "segment_probs", tuple(float(p) for p in self.segment_probs))
        if not 0 < self.p_leach <= 1:
            raise ConfigurationError(f"p_leach must lie in (0, 1], got {self.p_leach}")
        if not self.segment_probs:
            raise ConfigurationError("segment_probs needs at least one segment")
        for i, p in enumerate(self.segment_probs, start=1):
            if not 0 < p <= 1:
                raise ConfigurationError(f"segment_probs[{i}] must lie in (0, 1], got {p}")
        if not self.d_max > 0:
            raise ConfigurationError(f"d_max must be positive, got {self.d_max}")
        if self.max_sleep < 0:
            raise ConfigurationError(f"max_sleep must be >= 0, got {self.max_sleep}")
        if self.frames_per_round < 1:
            raise ConfigurationError(f"frames_per_round must be >= 1, got {self.frames_per_round}")

    @property
    def k(self) -> int:
        return len(self.segment_probs)

    def ch_probability(self, node: Node) -> float:
        if self.kind is Protocol.LEACH:
            return self.p_leach
        return self.segment_probs[node.segment - 1]


@dataclass(frozen=True)
class SegmentMap:
    """Concentric equal-area rings around the base station."""

    bs_position: tuple[float, float]
    outer_radius: float
    k: int
    ring_radii: tuple[float, ...] = ()

    def __post_init__(self):
        if self.k < 1:
            raise ConfigurationError(f"segment count must be >= 1, got {self.k}")
        if not self.outer_radius > 0:
            raise ConfigurationError(f"outer radius must be positive, got {self.outer_radius}")
        if not self.ring_radii:
            radii = [self.outer_radius * math.sqrt(j / self.k) for j in range(1, self.k)]
            object.__setattr__(self, "ring_radii", (*radii, self.outer_radius))

    @classmethod
    def for_field(cls, field_: FieldConfig, k: int) -> SegmentMap:
        outer = max(distance(field_.bs_position, c) for c in field_.corners)
        return cls(bs_position=field_.bs_position, outer_radius=outer, k=k)

    def segment_of(self, point) -> int:
        d = distance(point, self.bs_position)
        idx = bisect.bisect_left(self.ring_radii, d)
        if idx >= self.k:
            raise GeometryError(f"point {point} is {d:.3f} m from the BS, beyond outer radius {self.outer_radius:.3f}")
        return idx + 1


@dataclass
class ClusterAssignment:
    heads: set[int]
    # non-head awake node id -> head id, or DIRECT_TO_BS
    membership: dict[int, int]

    def members_of(self, head: int) -> list[int]:
        return [m for m, h in self.membership.items() if h == head]

    @property
    def direct_to_bs(self) -> list[int]:
        return [m for m, h in self.membership.items() if h == DIRECT_TO_BS]


def epoch_length(p: float) -> int:
    """Rounds per rotation epoch, 1/p rounded half-up."""
    return max(1, math.floor(1.0 / p + 0.5))


def leach_ch_probability(p: float, round_: int, eligible: bool) -> float:
    if not 0 < p <= 1:
        raise ConfigurationError(f"election probability must lie in (0, 1], got {p}")
    if not eligible:
        return 0.0
    x = p * (round_ % epoch_length(p))
    if x >= 1:
        raise InternalInvariantError(f"threshold denominator vanished for p={p}, round={round_}")
    # integer rounding of 1/p can push the last-round threshold past 1
    return min(1.0, p / (1.0 - x))


def assign_segments(nodes: list[Node], segment_map: SegmentMap) -> list[Node]:
    for node in nodes:
        node.segment = segment_map.segment_of(node.position)
    return nodes


def nte_score(energy: float, neighbor_count: int, avg_neighbor_distance: float) -> float:
    """Sleep priority: more neighbors, closer neighbors, lower energy -> higher score."""
    if neighbor_count < 1:
        raise NotACandidateError("a node without neighbors cannot be a sleep candidate")
    if not energy > 0:
        raise NotACandidateError(f"energy must be positive, got {energy}")
    return neighbor_count / (energy * energy * max(avg_neighbor_distance, MIN_AVG_DISTANCE))


def select_sleepers(
    nodes: list[Node],
    d_max: float,
    max_sleep: int,
    radio_range: float,
    dist: np.ndarray | None = None,
) -> set[int]:
    """Choose which awake nodes sleep this round.

    A node is a candidate when some other node lies closer than ``d_max`` and
    it is the lower-energy member of that pair (equal energy: higher id).
    Candidates are admitted in descending NTE order while the budget lasts; a
    candidate is skipped if admitting it would leave it, or any node already
    asleep, without an awake partner closer than ``d_max``.

    ``dist`` may supply the pairwise distance matrix in ``nodes`` order.
    """
    n = len(nodes)
    if max_sleep <= 0 or n < 2:
        return set()
    if dist is None:
        dist = distance_matrix(nodes)
    ids = np.array([nd.id for nd in nodes])
    energy = np.array([nd.energy for nd in nodes])
    off_diag = ~np.eye(n, dtype=bool)
    close = (dist < d_max) & off_diag

    lower = (energy[:, None] < energy[None, :]) | (
        (energy[:, None] == energy[None, :]) & (ids[:, None] > ids[None, :])
    )
    cand = np.flatnonzero((close & lower).any(axis=1))
    if cand.size == 0:
        return set()

    in_range = (dist <= max(radio_range, d_max)) & off_diag
    scored = []
    for i in cand:
        row = in_range[i]
        count = int(row.sum())
        score = nte_score(float(energy[i]), count, float(dist[i, row].mean()))
        scored.append((-score, int(ids[i]), int(i)))
    scored.sort()

    asleep = np.zeros(n, dtype=bool)
    chosen: list[int] = []
    for _, _, i in scored:
        if len(chosen) >= max_sleep:
            break
        partners = close[i] & ~asleep
        if not partners.any():
            continue
        orphaned = False
        for s in chosen:
            if close[s, i]:
                others = close[s] & ~asleep
                others[i] = False
                if not others.any():
                    orphaned = True
                    break
        if orphaned:
            continue
        asleep[i] = True
        chosen.append(i)
    return {int(ids[i]) for i in chosen}


def refresh_eligibility(nodes: list[Node], policy: ProtocolPolicy, round_: int) -> None:
    """Make nodes eligible again at the start of their rotation epoch."""
    for node in nodes:
        if node.alive and round_ % epoch_length(policy.ch_probability(node)) == 0:
            node.ch_eligible = True


def elect_cluster_heads(
    nodes: list[Node], policy: ProtocolPolicy, round_: int, rng: np.random.Generator
) -> set[int]:
    awake = [nd for nd in nodes if nd.awake]
    refresh_eligibility(awake, policy, round_)
    draws = rng.random(len(awake))
    heads = set()
    for node, u in zip(awake, draws):
        if u < leach_ch_probability(policy.ch_probability(node), round_, node.ch_eligible):
            heads.add(node.id)
            node.ch_eligible = False
            node.rounds_as_ch += 1
    return heads


def form_clusters(awake: list[Node], heads: set[int], dist: Callable[[int, int], float] | None = None) -> ClusterAssignment:
    """Attach every awake non-head to its nearest head (ties to the lower head id)."""
    by_id = {nd.id: nd for nd in awake}
    if not heads <= by_id.keys():
        raise ConfigurationError("cluster heads must be awake nodes")
    if dist is None:
        dist = lambda a, b: distance(by_id[a].position, by_id[b].position)  # noqa: E731
    ordered_heads = sorted(heads)
    membership = {}
    for node in awake:
        if node.id in heads:
            continue
        best, best_d = DIRECT_TO_BS, math.inf
        for h in ordered_heads:
            d = dist(node.id, h)
            if d < best_d:
                best, best_d = h, d
        membership[node.id] = best
    return ClusterAssignment(heads=set(heads), membership=membership)


class NetworkState:
    """Mutable per-run state: nodes plus geometry cached for the whole run."""

    def __init__(self, nodes: list[Node], field_: FieldConfig, grid: ProbeGrid, segments: int = 1):
        if [n.id for n in nodes] != list(range(len(nodes))):
            raise ConfigurationError("node ids must be 0..n-1 in list order")
        self.nodes = nodes
        self.field = field_
        self.grid = grid
        self.segment_map = SegmentMap.for_field(field_, segments)
        assign_segments(nodes, self.segment_map)
        self.dist = distance_matrix(nodes)
        bs = np.asarray(field_.bs_position, dtype=float)
        self.d_bs = np.array([distance(n.position, bs) for n in nodes])
        self.coverage_index = CoverageIndex(nodes, grid, field_.sensing_range)
        self.initial_energy_total = math.fsum(n.energy for n in nodes)
        self.dissipated_cumulative = 0.0
        self.round = 0
        self.last_sleepers: set[int] = set()
        # ids awake during the last round's steady state (before end-of-round deaths)
        self.last_awake: set[int] = set()
        self.last_assignment: ClusterAssignment | None = None

    def awake_mask(self) -> np.ndarray:
        return np.array([n.awake for n in self.nodes])


def _frame_costs(state: NetworkState, assignment: ClusterAssignment, params: RadioParams) -> dict[int, float]:
    bits = params.packet_bits
    cost: dict[int, float] = {}
    member_count = {h: 0 for h in assignment.heads}
    for m, h in assignment.membership.items():
        if h == DIRECT_TO_BS:
            cost[m] = tx_energy(params, bits, float(state.d_bs[m]))
        else:
            cost[m] = tx_energy(params, bits, float(state.dist[m, h]))
            member_count[h] += 1
    for h, count in member_count.items():
        cost[h] = (
            count * rx_energy(params, bits)
            + aggregation_energy(params, bits, aggregated_signals(count))
            + tx_energy(params, bits, float(state.d_bs[h]))
        )
    return cost


def run_round(
    state: NetworkState,
    policy: ProtocolPolicy,
    params: RadioParams,
    rng: np.random.Generator,
    consume_energy: bool = True,
) -> RoundRecord:
    nodes = state.nodes
    alive = [n for n in nodes if n.alive]
    if not alive:
        raise SimulationComplete(f"no node alive before round {state.round + 1}")
    r = state.round

    for n in alive:
        if n.state is NodeState.SLEEPING:
            n.state = NodeState.ACTIVE
    sleepers: set[int] = set()
    if policy.kind is Protocol.PROPOSED and policy.max_sleep > 0:
        idx = [n.id for n in alive]
        sleepers = select_sleepers(
            alive, policy.d_max, policy.max_sleep, state.field.radio_range, dist=state.dist[np.ix_(idx, idx)]
        )
        for i in sleepers:
            nodes[i].state = NodeState.SLEEPING

    # sleeping nodes still cross epoch boundaries
    refresh_eligibility(alive, policy, r)
    awake = [n for n in alive if n.awake]
    heads = elect_cluster_heads(awake, policy, r, rng)
    assignment = form_clusters(awake, heads, dist=lambda a, b: state.dist[a, b])

    spent = 0.0
    if consume_energy:
        cost = _frame_costs(state, assignment, params)
        for _ in range(policy.frames_per_round):
            for i, c in cost.items():
                node = nodes[i]
                take = min(c, node.energy)
                node.energy -= take
                spent += take
        for i in cost:
            if nodes[i].energy <= 0.0:
                nodes[i].energy = 0.0
                nodes[i].state = NodeState.DEAD

    state.dissipated_cumulative += spent
    state.round += 1
    state.last_sleepers = sleepers
    state.last_awake = {n.id for n in awake}
    state.last_assignment = assignment

    alive_after = sum(1 for n in nodes if n.alive)
    return RoundRecord(
        round=state.round,
        alive=alive_after,
        sleeping=sum(1 for n in nodes if n.state is NodeState.SLEEPING),
        heads=len(heads),
        direct_to_bs=len(assignment.direct_to_bs),
        residual_energy_total=math.fsum(n.energy for n in nodes),
        dissipated_this_round=spent,
        dissipated_cumulative=state.dissipated_cumulative,
        energy_variance=energy_variance(nodes),
        coverage=state.coverage_index.fraction(state.awake_mask()),
    )


RoundObserver = Callable[[NetworkState, RoundRecord], None]


@dataclass
class RunStreams:
    """Independent RNG streams derived from one seed.

    Placement is drawn from its own stream so both protocols see the same
    deployment for a given seed.
    """

    placement: np.random.Generator
    protocol: np.random.Generator
    seed: int = 0

    @classmethod
    def from_seed(cls, seed: int) -> RunStreams:
        placement, protocol = np.random.SeedSequence(seed).spawn(2)
        return cls(np.random.default_rng(placement), np.random.default_rng(protocol), seed)


def run_simulation(
    config: SimulationConfig,
    policy: ProtocolPolicy | None = None,
    seed: int = 0,
    on_round: RoundObserver | None = None,
) -> SimulationResult:
    policy = config.policy if policy is None else policy
    streams = RunStreams.from_seed(seed)
    nodes = deploy_uniform(config.field, config.n_nodes, streams.placement, config.initial_energy)
    grid = build_probe_grid(config.field, config.grid_spacing)
    state = NetworkState(nodes, config.field, grid, segments=policy.k)
    initial_coverage = state.coverage_index.fraction(state.awake_mask())

    records: list[RoundRecord] = []
    for _ in range(config.rounds):
        if not any(n.alive for n in nodes):
            break
        rec = run_round(state, policy, config.radio, streams.protocol, consume_energy=config.consume_energy)
        records.append(rec)
        if on_round is not None:
            on_round(state, rec)

    fnd, hna = lifetime_summary(records, len(nodes))
    return SimulationResult(
        records=records,
        fnd_round=fnd,
        hna_round=hna,
        seed=seed,
        protocol=policy.kind.value,
        n_deployed=len(nodes),
        initial_energy_total=state.initial_energy_total,
        initial_coverage=initial_coverage,
    )


def with_kind(policy: ProtocolPolicy, kind: Protocol | str) -> ProtocolPolicy:
    return replace(policy, kind=Protocol(kind))
