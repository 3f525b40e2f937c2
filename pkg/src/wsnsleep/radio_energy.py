"""First-order radio energy model.

Transmitting l bits over d meters costs l*E_elec for the electronics plus an
amplifier term l*eps*d**n, with n = 2 (free space, eps_fs) below the crossover
distance d0 and n = 4 (multipath, eps_mp) from d0 on. Receiving costs only the
electronics; a cluster head additionally pays E_DA per bit per aggregated signal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigurationError, DomainError

BITS_PER_BYTE = 8


@dataclass(frozen=True)
class RadioParams:
    e_elec: float = 50e-9  # J/bit
    eps_fs: float = 10e-12  # J/bit/m^2
    eps_mp: float = 0.0013e-12  # J/bit/m^4
    d0: float = 87.7  # m
    e_da: float = 5e-9  # J/bit/signal
    packet_bits: int = 500 * BITS_PER_BYTE

    def __post_init__(self):
        for name in ("e_elec", "eps_fs", "eps_mp", "d0", "e_da", "packet_bits"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)}")
        crossover = math.sqrt(self.eps_fs / self.eps_mp)
        if abs(self.d0 - crossover) > 0.01 * crossover:
            raise ConfigurationError(
                f"d0={self.d0} m is inconsistent with sqrt(eps_fs/eps_mp)={crossover:.3f} m (1% tolerance)"
            )

    @classmethod
    def from_packet_bytes(cls, packet_bytes: int, **kwargs) -> RadioParams:
        return cls(packet_bits=int(packet_bytes) * BITS_PER_BYTE, **kwargs)


def tx_energy(params: RadioParams, bits: int, d: float) -> float:
    if bits < 0 or d < 0:
        raise DomainError(f"tx_energy needs bits >= 0 and d >= 0, got bits={bits}, d={d}")
    if d < params.d0:
        return bits * params.e_elec + bits * params.eps_fs * d * d
    return bits * params.e_elec + bits * params.eps_mp * d**4


def rx_energy(params: RadioParams, bits: int) -> float:
    if bits < 0:
        raise DomainError(f"rx_energy needs bits >= 0, got {bits}")
    return bits * params.e_elec


def aggregation_energy(params: RadioParams, bits: int, signals: int) -> float:
    if bits < 0 or signals < 0:
        raise DomainError(f"aggregation_energy needs non-negative inputs, got bits={bits}, signals={signals}")
    return signals * bits * params.e_da


def aggregated_signals(member_count: int) -> int:
    """Signals a cluster head fuses: one per member plus its own reading."""
    return member_count + 1
