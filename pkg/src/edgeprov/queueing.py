"""Actual and virtual queue dynamics and the drift-plus-penalty objective.

Q counts requests in the node (waiting or in service).  Each device k has a
virtual queue Z_k fed by its penalty ``y_k = p_k - p_avg`` where ``p_k`` is
the device's allocated fraction averaged over the four resource kinds.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence

from . import kernels
from .errors import DomainError

queue_step = kernels.queue_step
virtual_queue_step = kernels.virtual_queue_step
lyapunov = kernels.lyapunov
dpp_objective = kernels.dpp_objective


@dataclass
class QueueState:
    Q: float = 0.0
    # history[0] is the initial backlog, history[t] the arrivals of slot t-1
    history: List[float] = field(default_factory=lambda: [0.0])
    t: int = 0

    def __post_init__(self):
        if self.Q < 0:
            raise DomainError("queue backlog must be >= 0")
        if self.history == [0.0] and self.Q:
            self.history = [float(self.Q)]

    def step(self, a: float, b: float) -> float:
        self.Q = queue_step(self.Q, a, b)
        self.history.append(float(a))
        self.t += 1
        return self.Q


@dataclass
class VirtualQueueState:
    Z: Dict[str, float]
    t: int = 0

    def __post_init__(self):
        if any(z < 0 for z in self.Z.values()):
            raise DomainError("virtual queues must be >= 0")

    def step(self, ys: Dict[str, float]) -> None:
        for k in self.Z:
            self.Z[k] = virtual_queue_step(self.Z[k], ys.get(k, 0.0))
        self.t += 1


@dataclass(frozen=True)
class PenaltyConfig:
    p_avg: Dict[str, float]
    V: float = 10.0

    def __post_init__(self):
        if self.V < 0:
            raise DomainError("V must be >= 0")
        if any(p < 0 for p in self.p_avg.values()):
            raise DomainError("p_avg must be >= 0")


@dataclass(frozen=True)
class SlotOutcome:
    a: float
    b: float
    y0: float
    y: Dict[str, float]

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise DomainError("arrivals and services must be >= 0")

    def check_bounds(self, y0_min: float, y0_max: float) -> bool:
        return y0_min <= self.y0 <= y0_max


def penalty(p: float, p_avg: float) -> float:
    if p < 0:
        raise DomainError(f"resource loss must be >= 0, got {p}")
    return p - p_avg


def time_average(series: Sequence[float]) -> float:
    if len(series) == 0:
        raise DomainError("time average of an empty series")
    return sum(series) / len(series)


def tail_violation_rate(series: Sequence[float], bound: float) -> float:
    """Fraction of slots whose recorded pre-service backlog exceeds ``bound``."""
    if bound < 0:
        raise DomainError("tail bound must be >= 0")
    if len(series) == 0:
        return 0.0
    return sum(1 for q in series if q > bound) / len(series)


def stability_ratio(series: Sequence[float]) -> float:
    """Mean of the last quartile of ``series`` divided by the run length."""
    n = len(series)
    if n < 2:
        raise DomainError("stability check needs at least two samples")
    tail = series[n - max(1, n // 4):]
    return (sum(tail) / len(tail)) / n


def stability_check(series: Sequence[float], eps: float = 1e-3) -> bool:
    # boundary is inclusive: a backlog pinned at eps * t counts as stable
    return stability_ratio(series) <= eps
