"""Node placement, field geometry, neighbor discovery and the coverage probe grid."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, EmptyDeploymentError

INITIAL_ENERGY_J = 0.1

Point = tuple[float, float]


@dataclass(frozen=True)
class FieldConfig:
    x_min: float = 0.0
    y_min: float = 0.0
    x_max: float = 100.0
    y_max: float = 100.0
    bs_position: Point = (50.0, 50.0)
    sensing_range: float = 10.0
    radio_range: float = 10.0

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ConfigurationError(f"x_max ({self.x_max}) must exceed x_min ({self.x_min})")
        if not self.y_max > self.y_min:
            raise ConfigurationError(f"y_max ({self.y_max}) must exceed y_min ({self.y_min})")
        if not self.sensing_range > 0:
            raise ConfigurationError(f"sensing_range must be positive, got {self.sensing_range}")
        if not self.radio_range > 0:
            raise ConfigurationError(f"radio_range must be positive, got {self.radio_range}")
        if not self.contains(self.bs_position):
            raise ConfigurationError(f"bs_position {self.bs_position} lies outside the field")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def corners(self) -> list[Point]:
        return [
            (self.x_min, self.y_min),
            (self.x_max, self.y_min),
            (self.x_min, self.y_max),
            (self.x_max, self.y_max),
        ]

    def contains(self, p: Point) -> bool:
        x, y = p
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


class NodeState(enum.Enum):
    ACTIVE = "active"
    SLEEPING = "sleeping"
    DEAD = "dead"


@dataclass
class Node:
    id: int
    position: Point
    energy: float = INITIAL_ENERGY_J
    state: NodeState = NodeState.ACTIVE
    # C_i(t) in the LEACH election rule
    ch_eligible: bool = True
    rounds_as_ch: int = 0
    segment: int = 1

    @property
    def alive(self) -> bool:
        return self.state is not NodeState.DEAD

    @property
    def awake(self) -> bool:
        return self.state is NodeState.ACTIVE


@dataclass(frozen=True)
class ProbeGrid:
    points: np.ndarray = field(repr=False)
    spacing: float

    def __len__(self) -> int:
        return len(self.points)


def deploy_uniform(
    field: FieldConfig, n: int, seed: int | np.random.Generator, initial_energy: float = INITIAL_ENERGY_J
) -> list[Node]:
    """Place ``n`` nodes i.i.d. uniformly over the field.

    ``seed`` may be an int or an already-constructed numpy Generator; the
    latter lets a caller hand over a dedicated placement stream.
    """
    if n < 1:
        raise EmptyDeploymentError(f"cannot deploy {n} nodes")
    if not initial_energy > 0:
        raise ConfigurationError(f"initial energy must be positive, got {initial_energy}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    xs = rng.uniform(field.x_min, field.x_max, size=n)
    ys = rng.uniform(field.y_min, field.y_max, size=n)
    return [Node(id=i, position=(float(x), float(y)), energy=initial_energy) for i, (x, y) in enumerate(zip(xs, ys))]


def distance(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def positions(nodes: list[Node]) -> np.ndarray:
    return np.array([n.position for n in nodes], dtype=float).reshape(-1, 2)


def distance_matrix(nodes: list[Node]) -> np.ndarray:
    """Pairwise Euclidean distances, rows/columns in list order."""
    xy = positions(nodes)
    diff = xy[:, None, :] - xy[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def neighbors(node: Node, all_nodes: list[Node], range_: float) -> list[tuple[int, float]]:
    """Alive nodes other than ``node`` within ``range_`` meters, sorted by id."""
    if not range_ > 0:
        raise ConfigurationError(f"neighbor range must be positive, got {range_}")
    found = []
    for other in all_nodes:
        if other.id == node.id or not other.alive:
            continue
        d = distance(node.position, other.position)
        if d <= range_:
            found.append((other.id, d))
    found.sort(key=lambda item: item[0])
    return found


def build_probe_grid(field: FieldConfig, spacing: float = 5.0) -> ProbeGrid:
    """Regular square lattice over the field, corners included.

    The default 5 m spacing gives the 21 x 21 = 441 points used for coverage
    measurements on a 100 m x 100 m field.
    """
    if not spacing > 0:
        raise ConfigurationError(f"grid spacing must be positive, got {spacing}")
    steps = []
    for extent in (field.width, field.height):
        k = extent / spacing
        if abs(k - round(k)) > 1e-9 * max(1.0, k):
            raise ConfigurationError(f"grid spacing {spacing} does not divide field extent {extent}")
        steps.append(int(round(k)))
    xs = field.x_min + spacing * np.arange(steps[0] + 1)
    ys = field.y_min + spacing * np.arange(steps[1] + 1)
    # pin the far edge exactly to avoid accumulated rounding
    xs[-1], ys[-1] = field.x_max, field.y_max
    gx, gy = np.meshgrid(xs, ys, indexing="xy")
    return ProbeGrid(points=np.column_stack([gx.ravel(), gy.ravel()]), spacing=float(spacing))
