"""Core data model: resources, services, containers, devices, nodes, requests.

All resource amounts are integers in base units (cycles/s, bytes, bytes,
bits/s) so that container create/destroy cycles never drift.  Subtask shares
are multiples of ``1/SHARE_QUANTUM``; service amounts must be divisible by
``SHARE_QUANTUM`` so every per-device consumption stays integral.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Optional, Sequence

from .errors import ConfigurationError, DomainError, InvariantError

SHARE_QUANTUM = 64


class ResourceKind(enum.Enum):
    PROCESSING = "processing"
    STORAGE = "storage"
    MEMORY = "memory"
    NETWORKING = "networking"


KINDS = (ResourceKind.PROCESSING, ResourceKind.STORAGE, ResourceKind.MEMORY, ResourceKind.NETWORKING)
_FIELDS = tuple(k.value for k in KINDS)
_new = object.__new__
_setattr = object.__setattr__


@dataclass(frozen=True)
class ResourceVector:
    """Amounts of the four resource kinds, in base units."""

    processing: int = 0
    storage: int = 0
    memory: int = 0
    networking: int = 0

    def __post_init__(self):
        for name, v in zip(_FIELDS, self.as_tuple()):
            if type(v) is not int:
                if isinstance(v, bool) or not isinstance(v, int):
                    raise DomainError(f"{name} must be an integer amount, got {v!r}")
            if v < 0:
                raise DomainError(f"{name} must be >= 0, got {v}")

    @classmethod
    def _unchecked(cls, p, s, m, n) -> "ResourceVector":
        # results of closed operations on valid vectors skip re-validation
        obj = _new(cls)
        _setattr(obj, "__dict__", {"processing": p, "storage": s, "memory": m, "networking": n})
        return obj

    @classmethod
    def zero(cls) -> "ResourceVector":
        return cls()

    @classmethod
    def from_tuple(cls, values: Sequence[int]) -> "ResourceVector":
        p, s, m, n = values
        return cls(int(p), int(s), int(m), int(n))

    def as_tuple(self):
        return (self.processing, self.storage, self.memory, self.networking)

    def __iter__(self) -> Iterator[int]:
        return iter(self.as_tuple())

    def __getitem__(self, kind: ResourceKind) -> int:
        return getattr(self, kind.value)

    def __add__(self, other: "ResourceVector") -> "ResourceVector":
        return ResourceVector._unchecked(self.processing + other.processing, self.storage + other.storage,
                                         self.memory + other.memory, self.networking + other.networking)

    def __sub__(self, other: "ResourceVector") -> "ResourceVector":
        p = self.processing - other.processing
        s = self.storage - other.storage
        m = self.memory - other.memory
        n = self.networking - other.networking
        if p < 0 or s < 0 or m < 0 or n < 0:
            raise InvariantError(f"subtraction would go negative: {self} - {other}")
        return ResourceVector._unchecked(p, s, m, n)

    def scaled(self, units: int) -> "ResourceVector":
        """Scale by ``units / SHARE_QUANTUM``; exact when self is divisible."""
        if not 0 <= units <= SHARE_QUANTUM:
            raise DomainError(f"share units must lie in [0, {SHARE_QUANTUM}]")
        q = SHARE_QUANTUM
        return ResourceVector._unchecked(self.processing * units // q, self.storage * units // q,
                                         self.memory * units // q, self.networking * units // q)

    def fits_in(self, other: "ResourceVector") -> bool:
        return (self.processing <= other.processing and self.storage <= other.storage
                and self.memory <= other.memory and self.networking <= other.networking)

    def is_zero(self) -> bool:
        return not any(self.as_tuple())


def vsum(vectors: Iterable[ResourceVector]) -> ResourceVector:
    acc = [0, 0, 0, 0]
    for v in vectors:
        for i, x in enumerate(v.as_tuple()):
            acc[i] += x
    return ResourceVector(*acc)


@dataclass(frozen=True)
class Service:
    id: str
    amounts: ResourceVector
    required: tuple = None
    # default I/O behaviour of requests for this service
    read_probability: float = 1.0
    write_probability: float = 0.0

    def __post_init__(self):
        derived = tuple(int(v > 0) for v in self.amounts.as_tuple())
        if self.required is None:
            object.__setattr__(self, "required", derived)
        else:
            req = tuple(int(r) for r in self.required)
            if len(req) != 4 or any(r not in (0, 1) for r in req):
                raise ConfigurationError(f"service {self.id}: required must be four 0/1 flags")
            for r, v, k in zip(req, self.amounts.as_tuple(), KINDS):
                if v > 0 and not r:
                    raise ConfigurationError(f"service {self.id}: {k.value} amount set but not required")
                if r and v == 0:
                    raise ConfigurationError(f"service {self.id}: {k.value} required but amount is 0")
            object.__setattr__(self, "required", req)
        if self.amounts.is_zero():
            raise ConfigurationError(f"service {self.id} requires no resources")
        for v, k in zip(self.amounts.as_tuple(), KINDS):
            if v % SHARE_QUANTUM:
                raise ConfigurationError(
                    f"service {self.id}: {k.value} amount {v} is not divisible by {SHARE_QUANTUM}")


_container_ids = itertools.count()


@dataclass
class Container:
    id: int
    service: str
    consumption: ResourceVector
    created_at: int
    share: float = 1.0
    request_id: Optional[int] = None
    # "supervisor" for placements made by the node supervisor, "background"
    # for load the supervisor did not place itself
    owner: str = "supervisor"

    def __post_init__(self):
        if not 0.0 < self.share <= 1.0:
            raise DomainError(f"container share must lie in (0, 1], got {self.share}")


def new_container_id() -> int:
    return next(_container_ids)


@dataclass
class EdgeDevice:
    id: str
    capacity: ResourceVector
    write_speed: float
    read_speed: float
    compute_rate: float
    cores: int = 1
    frequency_hz: int = 0
    family: str = "generic"
    architecture: str = "x86_64"
    containers: List[Container] = field(default_factory=list)

    def __post_init__(self):
        if self.write_speed <= 0 or self.read_speed <= 0 or self.compute_rate <= 0:
            raise DomainError(f"device {self.id}: speeds and compute rate must be > 0")
        if self.cores < 1:
            raise DomainError(f"device {self.id}: cores must be >= 1")
        if not self.frequency_hz:
            self.frequency_hz = self.capacity.processing // self.cores
        if self.cores * self.frequency_hz != self.capacity.processing:
            raise DomainError(
                f"device {self.id}: processing capacity must equal cores x frequency")
        self._used = vsum(c.consumption for c in self.containers)
        if not self._used.fits_in(self.capacity):
            raise InvariantError(f"device {self.id} starts over capacity")

    @property
    def used(self) -> ResourceVector:
        return self._used

    def add_container(self, container: Container) -> None:
        used = self._used + container.consumption
        if not used.fits_in(self.capacity):
            raise InvariantError(
                f"container {container.id} would exceed capacity of device {self.id}")
        self.containers.append(container)
        self._used = used

    def remove_container(self, container_id: int) -> Container:
        for i, c in enumerate(self.containers):
            if c.id == container_id:
                del self.containers[i]
                self._used = self._used - c.consumption
                return c
        raise InvariantError(f"container {container_id} is not running on device {self.id}")

    def utilization(self) -> tuple:
        """Allocated fraction of each kind, in (P, S, M, N) order."""
        return tuple(u / c if c else 0.0 for u, c in zip(self._used.as_tuple(), self.capacity.as_tuple()))


@dataclass
class EdgeNode:
    id: str
    devices: List[EdgeDevice]
    supervisor_state: dict = field(default_factory=dict)

    def __post_init__(self):
        ids = [d.id for d in self.devices]
        if len(set(ids)) != len(ids):
            raise ConfigurationError(f"node {self.id}: duplicate device ids {ids}")

    def device(self, device_id: str) -> EdgeDevice:
        for d in self.devices:
            if d.id == device_id:
                return d
        raise KeyError(device_id)


@dataclass(frozen=True)
class Request:
    id: int
    user: int
    data_size: int
    service: str
    timeout: int
    needs_read: int = 1
    needs_write: int = 0
    arrival_slot: int = 0

    def __post_init__(self):
        if self.data_size <= 0:
            raise DomainError("request data size must be > 0")
        if self.timeout <= 0:
            raise DomainError("request timeout must be > 0")
        if self.needs_read not in (0, 1) or self.needs_write not in (0, 1):
            raise DomainError("read/write indices must be binary")


class AssociationMatrix:
    """Binary user -> node association; each row has exactly one 1."""

    def __init__(self, rows: List[List[int]]):
        self.rows = rows

    def node_of(self, user: int) -> int:
        return self.rows[user].index(1)

    def is_valid(self) -> bool:
        return all(sum(r) == 1 and set(r) <= {0, 1} for r in self.rows)

    def __len__(self):
        return len(self.rows)


def validate_capacity(device: EdgeDevice) -> bool:
    total = vsum(c.consumption for c in device.containers)
    return total.fits_in(device.capacity)


def residual(device: EdgeDevice) -> ResourceVector:
    total = vsum(c.consumption for c in device.containers)
    if not total.fits_in(device.capacity):
        raise InvariantError(f"device {device.id} violates its capacity constraint")
    return device.capacity - total


def associate(users: Sequence, nodes: Sequence) -> AssociationMatrix:
    """Round-robin association: user ``u`` goes to node ``u mod len(nodes)``."""
    if not nodes:
        raise ConfigurationError("cannot associate users without at least one node")
    m = len(nodes)
    rows = []
    for u in range(len(users)):
        row = [0] * m
        row[u % m] = 1
        rows.append(row)
    return AssociationMatrix(rows)
