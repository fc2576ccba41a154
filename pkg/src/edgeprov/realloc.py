"""Workload-threshold trigger deciding when to refresh device snapshots."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .domain import KINDS, EdgeDevice, EdgeNode, ResourceKind
from .errors import DomainError

PAPER_VERBATIM = "paper-verbatim"
CONSUMED = "consumed"
LOAD_SEMANTICS = (PAPER_VERBATIM, CONSUMED)


@dataclass
class LoadParams:
    rate_norm: float = 0.8
    rate_th: float = 0.5
    # device id -> four per-kind maxima; missing devices use their capacity
    l_max: Dict[str, tuple] = field(default_factory=dict)
    load_semantics: str = CONSUMED

    def __post_init__(self):
        for name in ("rate_norm", "rate_th"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v}")
        for dev, values in self.l_max.items():
            if len(values) != 4 or any(v <= 0 for v in values):
                raise DomainError(f"L_max of device {dev} must be four positive values")
        if self.load_semantics not in LOAD_SEMANTICS:
            raise DomainError(f"unknown load semantics {self.load_semantics!r}")

    def max_load(self, device: EdgeDevice, kind: ResourceKind) -> float:
        idx = KINDS.index(kind)
        if device.id in self.l_max:
            return self.l_max[device.id][idx]
        return device.capacity.as_tuple()[idx]


def workload(device: EdgeDevice, kind: ResourceKind) -> int:
    """Capacity of ``kind`` minus what the device's containers consume."""
    idx = KINDS.index(kind)
    return device.capacity.as_tuple()[idx] - device.used.as_tuple()[idx]


def normal_load(l_max: float, rate_norm: float) -> float:
    if not 0.0 <= rate_norm <= 1.0:
        raise DomainError(f"rate_norm must lie in [0, 1], got {rate_norm}")
    return l_max * rate_norm


def threshold(rate_th: float, rate_norm: float, containers: int, l_max: float) -> float:
    return rate_th * (1.0 - rate_norm) * containers * l_max


def should_reallocate(l_curr: float, l_norm: float, l_th: float) -> bool:
    return l_curr > l_norm + l_th


def current_load(device: EdgeDevice, kind: ResourceKind, semantics: str = CONSUMED) -> int:
    w = workload(device, kind)
    if semantics == PAPER_VERBATIM:
        return w
    return device.capacity.as_tuple()[KINDS.index(kind)] - w


def fires(device: EdgeDevice, params: LoadParams) -> List[ResourceKind]:
    """Resource kinds whose current load crosses the reallocation threshold."""
    k = len(device.containers)
    cap = device.capacity.as_tuple()
    used = device.used.as_tuple()
    l_max_all = params.l_max.get(device.id, cap)
    verbatim = params.load_semantics == PAPER_VERBATIM
    out = []
    for i, kind in enumerate(KINDS):
        l_max = l_max_all[i]
        l_norm = normal_load(l_max, params.rate_norm)
        l_th = threshold(params.rate_th, params.rate_norm, k, l_max)
        residual = cap[i] - used[i]
        l_curr = residual if verbatim else cap[i] - residual
        if should_reallocate(l_curr, l_norm, l_th):
            out.append(kind)
    return out


def scan(node: EdgeNode, params: LoadParams) -> List[str]:
    """Ids of devices on which at least one kind fires, in node order."""
    return [d.id for d in node.devices if fires(d, params)]
