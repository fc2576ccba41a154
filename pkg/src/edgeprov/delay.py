"""Closed-form delay models for local and edge processing.

Data sizes are in bytes, speeds in bytes/s, link rates in bits/s.  The
bits<->bytes factor is applied by callers that convert a request's data size
into a transmission payload.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable

from .errors import DomainError

BITS_PER_BYTE = 8


@dataclass(frozen=True)
class DelayBreakdown:
    transmission: float = 0.0
    storage: float = 0.0
    processing: float = 0.0
    waiting: float = 0.0

    def __post_init__(self):
        for name in ("transmission", "storage", "processing", "waiting"):
            v = getattr(self, name)
            if not v >= 0:
                raise DomainError(f"{name} delay must be >= 0, got {v}")

    @property
    def total(self) -> float:
        return edge_total_delay(self)


@dataclass
class ChannelSpec:
    """Uplink channel shared by the users of one node.

    ``tx_power`` and ``gain`` are indexed by user; ``gain`` holds |h|, the
    received power of user u is ``tx_power[u] * gain[u] ** 2``.
    """

    bandwidth: float
    noise_variance: float
    tx_power: Dict[int, float] = field(default_factory=dict)
    gain: Dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise DomainError("bandwidth must be > 0")
        if self.noise_variance <= 0:
            raise DomainError("noise variance must be > 0")
        if any(p < 0 for p in self.tx_power.values()):
            raise DomainError("transmit powers must be >= 0")
        if any(g < 0 for g in self.gain.values()):
            raise DomainError("channel gains must be >= 0")

    def received_power(self, user: int) -> float:
        return self.tx_power.get(user, 0.0) * self.gain.get(user, 0.0) ** 2


def local_processing_delay(data_size: float, compute_rate: float) -> float:
    if compute_rate <= 0:
        raise DomainError(f"compute rate must be > 0, got {compute_rate}")
    return data_size / compute_rate


def storage_delay(data_size: float, idx_w: int, idx_r: int, write_speed: float, read_speed: float) -> float:
    if idx_w not in (0, 1) or idx_r not in (0, 1):
        raise DomainError(f"read/write indices must be binary, got w={idx_w} r={idx_r}")
    if write_speed <= 0 or read_speed <= 0:
        raise DomainError("storage speeds must be > 0")
    return data_size * (idx_w / write_speed + idx_r / read_speed)


def local_total_delay(data_size, compute_rate, idx_w=0, idx_r=0, write_speed=1.0, read_speed=1.0) -> float:
    # no transmission and no queueing on the user's own equipment
    return local_processing_delay(data_size, compute_rate) + storage_delay(
        data_size, idx_w, idx_r, write_speed, read_speed)


def link_rate(spec: ChannelSpec, user: int, interferers: Iterable[int] = ()) -> float:
    """Shannon rate of ``user`` towards its node, in bits/s."""
    interference = math.fsum(spec.received_power(v) for v in interferers if v != user)
    sinr = spec.received_power(user) / (spec.noise_variance + interference)
    return spec.bandwidth * math.log2(1.0 + sinr)


def transmission_delay(payload_bits: float, rate: float) -> float:
    if rate <= 0:
        raise DomainError(f"link rate must be > 0 (unreachable link), got {rate}")
    return payload_bits / rate


def edge_total_delay(parts: DelayBreakdown) -> float:
    for v in (parts.transmission, parts.storage, parts.processing, parts.waiting):
        if v < 0:
            raise DomainError("delay components must be >= 0")
    return parts.transmission + parts.storage + parts.processing + parts.waiting
