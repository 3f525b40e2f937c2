"""Per-round measurements and whole-run lifetime summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .deployment import Node, ProbeGrid, positions
from .errors import DomainError

CSV_HEADER = (
    "round,alive,sleeping,heads,direct_to_bs,residual_energy_j,"
    "dissipated_round_j,dissipated_cum_j,energy_variance_j2,coverage"
)


def _fmt(x: float) -> str:
    return f"{x:.9g}"


@dataclass(frozen=True)
class RoundRecord:
    round: int
    alive: int
    sleeping: int
    heads: int
    direct_to_bs: int
    residual_energy_total: float
    dissipated_this_round: float
    dissipated_cumulative: float
    energy_variance: float
    coverage: float

    def to_csv_row(self) -> str:
        return ",".join(
            [
                str(self.round),
                str(self.alive),
                str(self.sleeping),
                str(self.heads),
                str(self.direct_to_bs),
                _fmt(self.residual_energy_total),
                _fmt(self.dissipated_this_round),
                _fmt(self.dissipated_cumulative),
                _fmt(self.energy_variance),
                _fmt(self.coverage),
            ]
        )


@dataclass
class SimulationResult:
    records: list[RoundRecord]
    fnd_round: int | None
    hna_round: int | None
    seed: int
    protocol: str
    n_deployed: int = 0
    initial_energy_total: float = 0.0
    # coverage of the full deployment before round 1
    initial_coverage: float = 0.0

    def footer(self) -> str:
        fnd = "none" if self.fnd_round is None else self.fnd_round
        hna = "none" if self.hna_round is None else self.hna_round
        return f"# fnd={fnd} hna={hna} seed={self.seed} protocol={self.protocol}"

    def to_csv(self) -> str:
        lines = [CSV_HEADER, *(r.to_csv_row() for r in self.records), self.footer()]
        return "\n".join(lines) + "\n"

    def mean_coverage(self, first: int = 1, last: int | None = None) -> float:
        """Mean coverage over rounds ``first..last``.

        Rounds past the end of the run (every node dead) count as zero
        coverage, so runs of different length compare over the same window.
        """
        if last is None:
            last = self.records[-1].round if self.records else first - 1
        if last < first:
            return float("nan")
        total = sum(r.coverage for r in self.records if first <= r.round <= last)
        return total / (last - first + 1)

    @property
    def measured_duty_fraction(self) -> float:
        """Awake node-rounds over alive node-rounds, to compare with the planner's assumed duty."""
        alive = sum(r.alive for r in self.records)
        return (alive - sum(r.sleeping for r in self.records)) / alive if alive else float("nan")

    @property
    def final_dissipation(self) -> float:
        return self.records[-1].dissipated_cumulative if self.records else 0.0


class CoverageIndex:
    """Precomputed probe/node disk-membership matrix for repeated coverage queries.

    Node positions are fixed for a run, so the geometry is evaluated once and
    each round only masks columns by the awake set.
    """

    def __init__(self, nodes: list[Node], grid: ProbeGrid, sensing_range: float):
        if len(grid) == 0:
            raise DomainError("probe grid is empty")
        xy = positions(nodes)
        diff = grid.points[:, None, :] - xy[None, :, :]
        self.covers = np.hypot(diff[..., 0], diff[..., 1]) <= sensing_range
        self.n_points = len(grid)

    def fraction(self, awake_mask: np.ndarray) -> float:
        if not awake_mask.any():
            return 0.0
        covered = self.covers[:, awake_mask].any(axis=1)
        return int(covered.sum()) / self.n_points


def measure_coverage(nodes: list[Node], grid: ProbeGrid, sensing_range: float) -> float:
    """Fraction of probe points within ``sensing_range`` of an awake, alive node."""
    if len(grid) == 0:
        raise DomainError("probe grid is empty")
    awake = [n for n in nodes if n.awake]
    if not awake:
        return 0.0
    return CoverageIndex(awake, grid, sensing_range).fraction(np.ones(len(awake), dtype=bool))


def energy_variance(nodes: list[Node]) -> float:
    """Population variance of residual energy over every deployed node (dead = 0 J)."""
    if not nodes:
        raise DomainError("energy variance of an empty node list")
    energies = np.array([n.energy for n in nodes])
    if np.all(energies == energies[0]):
        return 0.0
    return float(np.var(energies))


def lifetime_summary(records: list[RoundRecord], n_deployed: int) -> tuple[int | None, int | None]:
    """Return (FND, HNA): first round with a death, first round with fewer than ceil(N/2) alive."""
    half = math.ceil(n_deployed / 2)
    fnd = hna = None
    for rec in records:
        if fnd is None and rec.alive < n_deployed:
            fnd = rec.round
        if hna is None and rec.alive < half:
            hna = rec.round
            break
    return fnd, hna
