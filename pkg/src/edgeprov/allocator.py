"""Drift-plus-penalty allocation of requests onto the devices of a node.

A request either goes straight to the first device whose residual resources
hold the whole service, or candidate schemes (single-device placements and
proportional splits over the devices with most residual processing) are
scored with ``V*y0 + Q*(a-b) + sum_k Z_k*y_k`` and the minimizer is kept.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import kernels
from .delay import BITS_PER_BYTE, DelayBreakdown, storage_delay, transmission_delay
from .domain import (KINDS, SHARE_QUANTUM, Container, EdgeDevice, EdgeNode, Request,
                     ResourceVector, Service, new_container_id)
from .errors import (ConfigurationError, ContractViolation, InvariantError, NoSchemeError)
from .queueing import SlotOutcome


@dataclass(frozen=True)
class DeviceView:
    """What the supervisor believes about one device."""

    id: str
    capacity: ResourceVector
    residual: ResourceVector
    compute_rate: float
    read_speed: float
    write_speed: float
    taken_at: int = 0


@dataclass
class ResourceState:
    devices: List[DeviceView]

    def __post_init__(self):
        for d in self.devices:
            if not d.residual.fits_in(d.capacity):
                raise InvariantError(f"residual of {d.id} exceeds its capacity")
        self._index = {d.id: i for i, d in enumerate(self.devices)}

    def index(self, device_id: str) -> int:
        return self._index[device_id]

    def view(self, device_id: str) -> DeviceView:
        return self.devices[self._index[device_id]]

    @classmethod
    def from_node(cls, node: EdgeNode, slot: int = 0) -> "ResourceState":
        return cls([DeviceView(d.id, d.capacity, d.capacity - d.used, d.compute_rate,
                               d.read_speed, d.write_speed, slot) for d in node.devices])

    def with_allocation(self, scheme: "AllocationScheme") -> "ResourceState":
        devices = list(self.devices)
        for p in scheme.placements:
            i = self._index[p.device_id]
            v = devices[i]
            devices[i] = DeviceView(v.id, v.capacity, v.residual - p.amounts, v.compute_rate,
                                    v.read_speed, v.write_speed, v.taken_at)
        return ResourceState(devices)


@dataclass(frozen=True)
class Placement:
    device_id: str
    units: int
    amounts: ResourceVector

    @property
    def share(self) -> float:
        return self.units / SHARE_QUANTUM


@dataclass(frozen=True)
class AllocationScheme:
    request_id: int
    placements: Tuple[Placement, ...]

    def __post_init__(self):
        if not self.placements:
            raise ContractViolation("a scheme needs at least one placement")
        if any(p.units <= 0 for p in self.placements):
            raise ContractViolation("every placement needs a share > 0")
        if sum(p.units for p in self.placements) != SHARE_QUANTUM:
            raise ContractViolation("placement shares must sum to exactly 1")
        ids = [p.device_id for p in self.placements]
        if len(set(ids)) != len(ids):
            raise ContractViolation("a scheme may use each device once")

    @property
    def device_ids(self) -> Tuple[str, ...]:
        return tuple(p.device_id for p in self.placements)

    @classmethod
    def build(cls, request_id: int, service: Service, units: Sequence[Tuple[str, int]]):
        return cls(request_id, tuple(Placement(d, u, service.amounts.scaled(u)) for d, u in units))


@dataclass(frozen=True)
class Evaluation:
    scheme: AllocationScheme
    outcome: SlotOutcome
    delay: DelayBreakdown
    objective: float
    service_slots: int


@dataclass
class SlotContext:
    """Per-slot inputs to the objective that do not depend on the scheme."""

    slot: int = 0
    V: float = 10.0
    Q: float = 0.0
    arrivals: float = 0.0
    Z: Dict[str, float] = field(default_factory=dict)
    p_avg: Dict[str, float] = field(default_factory=dict)
    slot_length: float = 1.0
    # uplink rate of each user in bits/s
    link_rates: Dict[int, float] = field(default_factory=dict)
    response_fraction: float = 0.05
    C: float = 0.0
    candidate_limit: int = 8


def split_units(weights: Sequence[int]) -> List[int]:
    """Quantized shares proportional to ``weights``; each >= 1, total SHARE_QUANTUM."""
    m = len(weights)
    if m == 0 or m > SHARE_QUANTUM:
        raise ContractViolation(f"cannot split over {m} devices")
    total = sum(weights)
    if total <= 0 or len(set(weights)) == 1:
        ideal = [SHARE_QUANTUM / m] * m
    else:
        ideal = [SHARE_QUANTUM * w / total for w in weights]
    units = [max(1, int(math.floor(x))) for x in ideal]
    # largest remainder first; earlier devices win ties
    order = sorted(range(m), key=lambda i: (-(ideal[i] - math.floor(ideal[i])), i))
    diff = SHARE_QUANTUM - sum(units)
    j = 0
    while diff > 0:
        units[order[j % m]] += 1
        diff -= 1
        j += 1
    while diff < 0:
        # only reachable when the max(1, .) floor bumped tiny shares
        i = max(range(m), key=lambda k: (units[k], -k))
        units[i] -= 1
        diff += 1
    return units


def enumerate_candidates(request: Request, service: Service, state: ResourceState,
                         limit: int = 8) -> List[AllocationScheme]:
    if limit < 1:
        raise ContractViolation("candidate limit must be >= 1")
    out = {}
    amounts = service.amounts
    for d in state.devices:
        if amounts.fits_in(d.residual):
            s = AllocationScheme.build(request.id, service, [(d.id, SHARE_QUANTUM)])
            out[s.placements] = s
    ranked = sorted(state.devices, key=lambda d: (-d.residual.processing, state.index(d.id)))
    for m in range(2, min(limit, len(state.devices)) + 1):
        chosen = sorted(ranked[:m], key=lambda d: state.index(d.id))
        units = split_units([d.residual.processing for d in chosen])
        if all(amounts.scaled(u).fits_in(d.residual) for d, u in zip(chosen, units)):
            s = AllocationScheme.build(request.id, service, list(zip((d.id for d in chosen), units)))
            out.setdefault(s.placements, s)
    return sorted(out.values(), key=lambda s: (len(s.placements),
                                               tuple(state.index(i) for i in s.device_ids)))


def normalized_load(view: DeviceView) -> float:
    """Allocated fraction of the device, averaged over the four kinds."""
    return _load(view.capacity, view.residual)


def _load(cap: ResourceVector, res: ResourceVector) -> float:
    acc = 0.0
    for c, r in ((cap.processing, res.processing), (cap.storage, res.storage),
                 (cap.memory, res.memory), (cap.networking, res.networking)):
        if c:
            acc += (c - r) / c
    return acc / len(KINDS)


def predict_delay(request: Request, scheme: AllocationScheme, state: ResourceState,
                  ctx: SlotContext) -> Tuple[DelayBreakdown, int]:
    """Predicted breakdown and the number of slots the containers stay busy."""
    worst = None
    for p in scheme.placements:
        v = state.view(p.device_id)
        data = p.share * request.data_size
        sto = storage_delay(data, request.needs_write, request.needs_read, v.write_speed, v.read_speed)
        proc = data / v.compute_rate
        if worst is None or sto + proc > worst[0] + worst[1]:
            worst = (sto, proc)
    rate = ctx.link_rates.get(request.user)
    if rate is None:
        trans = 0.0
    else:
        bits = request.data_size * BITS_PER_BYTE
        trans = transmission_delay(bits, rate) + transmission_delay(bits * ctx.response_fraction, rate)
    waiting = max(0, ctx.slot - request.arrival_slot) * ctx.slot_length
    busy = max(1, math.ceil((worst[0] + worst[1]) / ctx.slot_length))
    return DelayBreakdown(trans, worst[0], worst[1], waiting), busy


def _check_feasible(scheme: AllocationScheme, state: ResourceState) -> None:
    for p in scheme.placements:
        try:
            v = state.view(p.device_id)
        except KeyError:
            raise ContractViolation(f"scheme uses unknown device {p.device_id}") from None
        if not p.amounts.fits_in(v.residual):
            raise ContractViolation(f"scheme does not fit device {p.device_id}")


def _terms(request, scheme, state, ctx):
    _check_feasible(scheme, state)
    delay, busy = predict_delay(request, scheme, state, ctx)
    taken = {p.device_id: p.amounts for p in scheme.placements}
    loads = {}
    for v in state.devices:
        a = taken.get(v.id)
        loads[v.id] = _load(v.capacity, v.residual - a if a is not None else v.residual)
    ys = [loads[v.id] - ctx.p_avg.get(v.id, 0.0) for v in state.devices]
    y0 = 0.0
    for i in scheme.device_ids:
        y0 += loads[i]
    b = 1.0 / busy
    outcome = SlotOutcome(a=ctx.arrivals, b=b, y0=y0, y=dict(zip(loads, ys)))
    return outcome, delay, busy, ys


def evaluate_scheme(request: Request, scheme: AllocationScheme, state: ResourceState,
                    ctx: SlotContext) -> Evaluation:
    outcome, delay, busy, ys = _terms(request, scheme, state, ctx)
    zs = [ctx.Z.get(v.id, 0.0) for v in state.devices]
    obj = kernels.dpp_objective(ctx.V, outcome.y0, [ctx.Q], [ctx.arrivals], [outcome.b], zs, ys)
    return Evaluation(scheme, outcome, delay, obj, busy)


def evaluate_all(request: Request, schemes: Sequence[AllocationScheme], state: ResourceState,
                 ctx: SlotContext) -> List[Evaluation]:
    """Batch form of :func:`evaluate_scheme` through the scoring kernel."""
    if not schemes:
        return []
    parts = [_terms(request, s, state, ctx) for s in schemes]
    zs = [ctx.Z.get(v.id, 0.0) for v in state.devices]
    objs = kernels.score_candidates(ctx.V, [ctx.Q], [ctx.arrivals],
                                    [[p[0].b] for p in parts], [p[0].y0 for p in parts],
                                    zs, [p[3] for p in parts])
    return [Evaluation(s, p[0], p[1], o, p[2]) for s, p, o in zip(schemes, parts, objs)]


def select_index(objectives: Sequence[float], placements: Sequence[int],
                 first_device: Sequence[int], C: float = 0.0) -> int:
    """Index of the chosen candidate.

    Candidates within ``C`` of the minimum are eligible; among them the
    fewest placements win, then the lower objective, then the lower first
    device.
    """
    if not objectives:
        raise NoSchemeError("no candidate scheme to select from")
    if C < 0:
        raise ContractViolation("C must be >= 0")
    best = min(objectives)
    eligible = [i for i, o in enumerate(objectives) if o <= best + C]
    return min(eligible, key=lambda i: (placements[i], objectives[i], first_device[i], i))


def select_scheme(evaluations: Sequence[Evaluation], state: ResourceState, C: float = 0.0) -> Evaluation:
    i = select_index([e.objective for e in evaluations],
                     [len(e.scheme.placements) for e in evaluations],
                     [state.index(e.scheme.device_ids[0]) for e in evaluations], C)
    return evaluations[i]


@dataclass(frozen=True)
class Decision:
    kind: str  # "direct", "scheduled" or "deferred"
    evaluation: Optional[Evaluation] = None
    # for deferrals: "no-fit" when no candidate fits the residuals at all,
    # "timeout" when every fitting candidate is too slow for this request
    reason: str = ""

    @property
    def scheme(self) -> Optional[AllocationScheme]:
        return None if self.evaluation is None else self.evaluation.scheme


DEFERRED = Decision("deferred", reason="no-fit")
DEFERRED_TIMEOUT = Decision("deferred", reason="timeout")


def lrr_handle_request(request: Request, services: Dict[str, Service], state: ResourceState,
                       ctx: SlotContext) -> Decision:
    try:
        service = services[request.service]
    except KeyError:
        raise ConfigurationError(f"unknown service id {request.service!r}") from None
    for d in state.devices:
        if service.amounts.fits_in(d.residual):
            scheme = AllocationScheme.build(request.id, service, [(d.id, SHARE_QUANTUM)])
            return Decision("direct", evaluate_scheme(request, scheme, state, ctx))
    candidates = enumerate_candidates(request, service, state, ctx.candidate_limit)
    evals = evaluate_all(request, candidates, state, ctx)
    budget = request.timeout * ctx.slot_length
    if not evals:
        return DEFERRED
    evals = [e for e in evals if e.delay.total <= budget]
    if not evals:
        return DEFERRED_TIMEOUT
    return Decision("scheduled", select_scheme(evals, state, ctx.C))


def instantiate(scheme: AllocationScheme, node: EdgeNode, slot: int, service_id: str) -> List[Tuple[str, Container]]:
    """Create the scheme's containers; all or nothing.

    Raises InvariantError when a placement does not fit the device's real
    residual resources (the supervisor's view was out of date).
    """
    devices = [node.device(p.device_id) for p in scheme.placements]
    for dev, p in zip(devices, scheme.placements):
        if not (dev.used + p.amounts).fits_in(dev.capacity):
            raise InvariantError(f"placement on {dev.id} would exceed its capacity")
    out = []
    for dev, p in zip(devices, scheme.placements):
        c = Container(new_container_id(), service_id, p.amounts, slot, p.share, scheme.request_id)
        dev.add_container(c)
        out.append((dev.id, c))
    return out


def complete_subtasks(containers: Sequence[Tuple[str, Container]], node: EdgeNode) -> None:
    """Destroy every container of a finished request."""
    for device_id, c in containers:
        node.device(device_id).remove_container(c.id)
