"""Provisioning policies driven by the simulator once per slot.

Every policy owns a :class:`Supervisor` view of the node.  ``refresh`` runs
before any request of a slot is handled and reports whether the slot counts
as a reallocation event; ``decide`` places one request.
"""
from __future__ import annotations

from typing import Dict, List

from .allocator import (DEFERRED, AllocationScheme, Decision, DeviceView, ResourceState,
                        SlotContext, evaluate_scheme, lrr_handle_request)
from .domain import SHARE_QUANTUM, EdgeNode, ResourceVector, Service
from .errors import ConfigurationError
from .realloc import LoadParams, scan
from .resource_repr import Registry, supervisor_query


class Supervisor:
    """The node supervisor's knowledge: registry snapshots plus its own
    record of what it placed since."""

    def __init__(self, node: EdgeNode, max_age: int = 1):
        self.node = node
        self.registry = Registry(max_age=max_age)
        self.placed = {d.id: ResourceVector() for d in node.devices}
        self.placed_at_snapshot = {}
        self.foreign = {}
        self.queries = 0
        self._cached = self._cached_book = None
        for d in node.devices:
            self.registry.register(d)
            self.query(d.id, 0)
        self.queries = 0

    def query(self, device_id: str, slot: int):
        dev = self.node.device(device_id)
        desc = supervisor_query(self.registry, dev, slot)
        self.placed_at_snapshot[device_id] = self.placed[device_id]
        # load the supervisor did not place, as of the snapshot
        self.foreign[device_id] = dev.capacity - desc.residual() - self.placed[device_id]
        self.queries += 1
        self._cached = self._cached_book = None
        return desc

    def query_all(self, slot: int):
        for d in self.node.devices:
            self.query(d.id, slot)

    def record_placement(self, device_id: str, amounts: ResourceVector):
        self.placed[device_id] = self.placed[device_id] + amounts
        self._cached = self._cached_book = None

    def record_release(self, device_id: str, amounts: ResourceVector):
        self.placed[device_id] = self.placed[device_id] - amounts
        self._cached = self._cached_book = None

    def registry_state(self) -> ResourceState:
        """Residuals from the last snapshot, corrected by placements and
        releases the supervisor made since."""
        if self._cached is not None:
            return self._cached
        views = []
        for d in self.node.devices:
            residual = d.capacity - self.foreign[d.id] - self.placed[d.id]
            views.append(DeviceView(d.id, d.capacity, residual, d.compute_rate, d.read_speed,
                                    d.write_speed, self.registry.get(d.id).taken_at))
        self._cached = ResourceState(views)
        return self._cached

    def bookkeeping_state(self) -> ResourceState:
        """Residuals assuming only the supervisor's own placements exist."""
        if self._cached_book is None:
            self._cached_book = ResourceState([
                DeviceView(d.id, d.capacity, d.capacity - self.placed[d.id], d.compute_rate,
                           d.read_speed, d.write_speed, 0)
                for d in self.node.devices])
        return self._cached_book


class Policy:
    name = "base"

    def __init__(self, supervisor: Supervisor, services: Dict[str, Service], load: LoadParams):
        self.sup = supervisor
        self.services = services
        self.load = load

    def refresh(self, slot: int) -> bool:
        raise NotImplementedError

    def state(self) -> ResourceState:
        return self.sup.registry_state()

    def decide(self, request, state: ResourceState, ctx: SlotContext) -> Decision:
        return lrr_handle_request(request, self.services, state, ctx)


class LRRPolicy(Policy):
    """Threshold-triggered refresh; decisions from the drift-plus-penalty allocator."""

    name = "lrr"

    def refresh(self, slot):
        fired = scan(self.sup.node, self.load)
        for dev in fired:
            self.sup.query(dev, slot)
        return bool(fired)


class EverySlotPolicy(Policy):
    """Refresh every device and recompute in every slot that has requests."""

    name = "every-slot"

    def refresh(self, slot):
        self.sup.query_all(slot)
        return True


class LyapunovOnlyPolicy(Policy):
    """Same objective and trigger, but never asks devices for their state."""

    name = "lyapunov-only"

    def refresh(self, slot):
        return bool(scan(self.sup.node, self.load))

    def state(self):
        return self.sup.bookkeeping_state()


class GreedyMatchPolicy(Policy):
    """Whole request on the fitting device with most residual processing."""

    name = "greedy-match"

    def refresh(self, slot):
        self.sup.query_all(slot)
        return True

    def decide(self, request, state, ctx):
        try:
            service = self.services[request.service]
        except KeyError:
            raise ConfigurationError(f"unknown service id {request.service!r}") from None
        best = None
        for d in state.devices:
            if service.amounts.fits_in(d.residual):
                if best is None or d.residual.processing > best.residual.processing:
                    best = d
        if best is None:
            return DEFERRED
        scheme = AllocationScheme.build(request.id, service, [(best.id, SHARE_QUANTUM)])
        return Decision("direct", evaluate_scheme(request, scheme, state, ctx))


POLICIES = {p.name: p for p in (LRRPolicy, EverySlotPolicy, LyapunovOnlyPolicy, GreedyMatchPolicy)}


def make_policy(name: str, supervisor: Supervisor, services, load: LoadParams) -> Policy:
    try:
        cls = POLICIES[name]
    except KeyError:
        raise ConfigurationError(f"unknown policy {name!r}; known: {', '.join(POLICIES)}") from None
    return cls(supervisor, services, load)
