"""Analytic Boolean-disk coverage model for a Poisson field of sensors.

A point is covered when at least one awake sensor lies within the sensing
range r. With node density lam and each node awake a fraction ``duty`` of the
rounds, the covered probability is ``1 - exp(-lam * pi * r**2 * duty)``; the
functions below evaluate that and invert it to size the per-round sleep budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

DEFAULT_DUTY_FRACTION = 0.53
DEFAULT_TARGET_COVERAGE = 0.9


def _check_duty(duty: float) -> None:
    if not 0 < duty <= 1:
        raise DomainError(f"duty fraction must lie in (0, 1], got {duty}")


def coverage_probability(density: float, range_: float, duty: float = 1.0) -> float:
    if density < 0:
        raise DomainError(f"density must be non-negative, got {density}")
    if not range_ > 0:
        raise DomainError(f"sensing range must be positive, got {range_}")
    _check_duty(duty)
    # expm1 keeps precision for tiny exponents
    return -math.expm1(-density * math.pi * range_**2 * duty)


def required_density(target: float, range_: float, duty: float = DEFAULT_DUTY_FRACTION) -> float:
    """Lowest density (nodes/m^2) reaching ``target`` coverage."""
    if not 0 < target < 1:
        raise DomainError(f"target coverage must lie in (0, 1), got {target}")
    if not range_ > 0:
        raise DomainError(f"sensing range must be positive, got {range_}")
    _check_duty(duty)
    return -math.log1p(-target) / (math.pi * range_**2 * duty)


def _required_nodes(density: float, area: float, rounding: str) -> int:
    exact = density * area
    if rounding == "ceil":
        return math.ceil(exact)
    if rounding == "floor":
        return math.floor(exact)
    raise ValueError(f"rounding must be 'floor' or 'ceil', got {rounding!r}")


def max_sleep_count(
    total_nodes: int,
    field_area: float,
    target: float = DEFAULT_TARGET_COVERAGE,
    range_: float = 10.0,
    duty: float = DEFAULT_DUTY_FRACTION,
    rounding: str = "floor",
) -> int:
    """How many nodes may sleep per round without dropping below ``target``.

    ``rounding="floor"`` truncates the required node count (138.28 -> 138,
    which yields 12 sleepers out of 150); ``"ceil"`` is the conservative
    reading (139 -> 11).
    """
    if total_nodes < 1:
        raise DomainError(f"total_nodes must be >= 1, got {total_nodes}")
    if not field_area > 0:
        raise DomainError(f"field_area must be positive, got {field_area}")
    needed = _required_nodes(required_density(target, range_, duty), field_area, rounding)
    return max(0, total_nodes - needed)


@dataclass(frozen=True)
class CoveragePlan:
    target_coverage: float
    sensing_range: float
    duty_fraction: float
    total_nodes: int
    field_area: float
    required_density: float
    required_nodes: int  # ceil(density * area)
    required_nodes_floor: int
    max_sleep: int  # from the floored count, the value used by max_sleep=auto
    max_sleep_ceil: int

    def describe(self) -> str:
        return "\n".join(
            [
                f"target_coverage      {self.target_coverage:g}",
                f"sensing_range_m      {self.sensing_range:g}",
                f"duty_fraction        {self.duty_fraction:g}",
                f"field_area_m2        {self.field_area:g}",
                f"required_density     {self.required_density:.6f} nodes/m^2",
                f"exact_nodes          {self.required_density * self.field_area:.2f}",
                f"required_nodes_floor {self.required_nodes_floor}",
                f"required_nodes_ceil  {self.required_nodes}",
                f"total_nodes          {self.total_nodes}",
                f"max_sleep_floor      {self.max_sleep}",
                f"max_sleep_ceil       {self.max_sleep_ceil}",
            ]
        )


def plan_coverage(
    total_nodes: int,
    field_area: float,
    target: float = DEFAULT_TARGET_COVERAGE,
    range_: float = 10.0,
    duty: float = DEFAULT_DUTY_FRACTION,
) -> CoveragePlan:
    density = required_density(target, range_, duty)
    return CoveragePlan(
        target_coverage=target,
        sensing_range=range_,
        duty_fraction=duty,
        total_nodes=total_nodes,
        field_area=field_area,
        required_density=density,
        required_nodes=_required_nodes(density, field_area, "ceil"),
        required_nodes_floor=_required_nodes(density, field_area, "floor"),
        max_sleep=max_sleep_count(total_nodes, field_area, target, range_, duty, "floor"),
        max_sleep_ceil=max_sleep_count(total_nodes, field_area, target, range_, duty, "ceil"),
    )
