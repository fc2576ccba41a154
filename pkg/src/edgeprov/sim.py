"""Discrete-time simulator of one edge node and its supervisor.

Slot micro-order: background load changes; trigger check and snapshot
refresh (in slots with requests in the node or arriving); admission of
deferred then new requests; utilisation and penalty bookkeeping; completions;
timeout drops; queue update.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Dict, List, Optional

import numpy as np

from . import kernels
from .allocator import SlotContext, complete_subtasks, instantiate
from .delay import ChannelSpec, link_rate
from .domain import (KINDS, Container, EdgeDevice, EdgeNode, Request, ResourceVector, Service,
                     associate, new_container_id, validate_capacity)
from .errors import ConfigurationError, InvariantError
from .policies import POLICIES, Supervisor, make_policy
from .presets import DEFAULT_CHANNEL, SERVICE_PRESETS, preset
from .queueing import stability_check, tail_violation_rate
from .realloc import LOAD_SEMANTICS, LoadParams

USAGE_RESOLUTION = 10 ** 6


@dataclass
class SimConfig:
    slots: int = 1000
    seed: int = 0
    arrival_rate: float = 1.0
    V: float = 10.0
    rate_norm: float = 0.8
    rate_th: float = 0.5
    slot_length: float = 1.0
    devices: object = "table2"
    services: object = "default"
    channel: Optional[dict] = None
    users: int = 4
    policy: str = "lrr"
    candidate_limit: int = 8
    C: float = 0.0
    response_fraction: float = 0.05
    load_semantics: str = "consumed"
    p_avg: float = 0.5
    data_size_min: int = 4_000_000
    data_size_max: int = 16_000_000
    timeout_min: int = 10
    timeout_max: int = 30
    tail_bound: Optional[float] = None
    # scripted load the supervisor did not place: dicts with device, start,
    # end (exclusive) and any of processing/storage/memory/networking
    background: list = field(default_factory=list)

    def validate(self) -> None:
        if self.slots < 1:
            raise ConfigurationError("slots must be >= 1")
        if self.arrival_rate < 0:
            raise ConfigurationError("arrival_rate must be >= 0")
        if self.V < 0:
            raise ConfigurationError("V must be >= 0")
        if self.slot_length <= 0:
            raise ConfigurationError("slot_length must be > 0")
        if self.policy not in POLICIES:
            raise ConfigurationError(f"unknown policy {self.policy!r}; known: {', '.join(POLICIES)}")
        if self.load_semantics not in LOAD_SEMANTICS:
            raise ConfigurationError(f"load_semantics must be one of {LOAD_SEMANTICS}")
        if self.candidate_limit < 1:
            raise ConfigurationError("candidate_limit must be >= 1")
        if self.C < 0:
            raise ConfigurationError("C must be >= 0")
        if not 0 < self.data_size_min <= self.data_size_max:
            raise ConfigurationError("need 0 < data_size_min <= data_size_max")
        if not 0 < self.timeout_min <= self.timeout_max:
            raise ConfigurationError("need 0 < timeout_min <= timeout_max")
        if self.users < 1:
            raise ConfigurationError("users must be >= 1")
        if not 0 <= self.response_fraction:
            raise ConfigurationError("response_fraction must be >= 0")
        for name in ("rate_norm", "rate_th"):
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigurationError(f"{name} must lie in [0, 1]")


def build_devices(cfg: SimConfig) -> List[EdgeDevice]:
    if isinstance(cfg.devices, str):
        try:
            specs = preset(cfg.devices)
        except KeyError as exc:
            raise ConfigurationError(exc.args[0]) from None
    else:
        specs = cfg.devices
    out = []
    for s in specs:
        cores = int(s.get("cores", 1))
        freq = int(s["frequency_hz"])
        cap = ResourceVector(cores * freq, int(s["storage"]), int(s["memory"]), int(s["networking"]))
        out.append(EdgeDevice(
            id=str(s["id"]), capacity=cap, write_speed=float(s["write_speed"]),
            read_speed=float(s["read_speed"]), compute_rate=float(s["compute_rate"]),
            cores=cores, frequency_hz=freq, family=s.get("family", "generic"),
            architecture=s.get("architecture", "x86_64")))
    if not out:
        raise ConfigurationError("a node needs at least one device")
    return out


def build_services(cfg: SimConfig) -> Dict[str, Service]:
    specs = cfg.services if cfg.services is not None else "default"
    if isinstance(specs, str):
        try:
            specs = SERVICE_PRESETS[specs]
        except KeyError:
            raise ConfigurationError(f"unknown service preset {specs!r}; known: "
                                     f"{', '.join(sorted(SERVICE_PRESETS))}") from None
    out = {}
    for s in specs:
        amounts = ResourceVector(int(s.get("processing", 0)), int(s.get("storage", 0)),
                                 int(s.get("memory", 0)), int(s.get("networking", 0)))
        svc = Service(str(s["id"]), amounts, read_probability=float(s.get("read_probability", 1.0)),
                      write_probability=float(s.get("write_probability", 0.0)))
        if svc.id in out:
            raise ConfigurationError(f"duplicate service id {svc.id}")
        out[svc.id] = svc
    if not out:
        raise ConfigurationError("at least one service is required")
    return out


def build_channel(cfg: SimConfig) -> ChannelSpec:
    ch = dict(DEFAULT_CHANNEL)
    ch.update(cfg.channel or {})
    gains = list(ch["gains_sq"])
    power = ch["tx_power_w"]
    return ChannelSpec(
        bandwidth=float(ch["bandwidth_hz"]), noise_variance=float(ch["noise_w"]),
        tx_power={u: float(power[u] if isinstance(power, list) else power) for u in range(cfg.users)},
        gain={u: math.sqrt(float(gains[u % len(gains)])) for u in range(cfg.users)})


def _check_usage_grid(devices, services, background):
    # cpu usage travels with six decimals; processing amounts must land on
    # that grid for snapshots to reproduce residuals exactly
    from .domain import SHARE_QUANTUM
    for d in devices:
        step = d.capacity.processing // USAGE_RESOLUTION
        if d.capacity.processing % USAGE_RESOLUTION:
            raise ConfigurationError(f"device {d.id}: processing capacity must be a multiple of 10^6")
        for s in services.values():
            if (s.amounts.processing // SHARE_QUANTUM) % step:
                raise ConfigurationError(
                    f"service {s.id}: processing amount / {SHARE_QUANTUM} must be a multiple of "
                    f"{step} cycles/s to be representable on device {d.id}")
        for b in background:
            if b["device"] == d.id and int(b.get("processing", 0)) % step:
                raise ConfigurationError(
                    f"background load on {d.id}: processing must be a multiple of {step}")


class RequestFactory:
    """Draws i.i.d. requests: uniform service, user, size and timeout."""

    def __init__(self, services: Dict[str, Service], rng, users: int = 4,
                 data_size=(4_000_000, 16_000_000), timeout=(10, 30)):
        self.services = services
        self.ids = list(services)
        self.rng = rng
        self.users = users
        self.data_size = data_size
        self.timeout = timeout
        self.next_id = 0

    def draw(self, slot: int) -> Request:
        rng = self.rng
        svc = self.services[self.ids[int(rng.integers(len(self.ids)))]]
        r = Request(
            id=self.next_id, user=int(rng.integers(self.users)),
            data_size=int(rng.integers(self.data_size[0], self.data_size[1] + 1)),
            service=svc.id, timeout=int(rng.integers(self.timeout[0], self.timeout[1] + 1)),
            needs_read=int(rng.random() < svc.read_probability),
            needs_write=int(rng.random() < svc.write_probability),
            arrival_slot=slot)
        self.next_id += 1
        return r


def _default_services() -> Dict[str, Service]:
    return build_services(SimConfig())


def generate_arrivals(rate: float, seed: int, slots: int, services=None, users: int = 4,
                      data_size=(4_000_000, 16_000_000), timeout=(10, 30)) -> List[List[Request]]:
    """Poisson request batches per slot; attributes drawn i.i.d. from ``seed``."""
    if rate < 0:
        raise ConfigurationError("arrival rate must be >= 0")
    rng = np.random.default_rng(seed)
    factory = RequestFactory(services or _default_services(), rng, users, data_size, timeout)
    counts = rng.poisson(rate, size=slots) if rate > 0 else np.zeros(slots, dtype=int)
    return [[factory.draw(t) for _ in range(int(counts[t]))] for t in range(slots)]


class ClosedLoopSource:
    """Keeps ``population`` requests in the node: every departure is replaced
    in the next slot.  Used to measure saturation throughput."""

    def __init__(self, population: int, factory: RequestFactory):
        if population < 1:
            raise ConfigurationError("population must be >= 1")
        self.population = population
        self.factory = factory

    def batch(self, slot: int, in_system: int) -> List[Request]:
        return [self.factory.draw(slot) for _ in range(max(0, self.population - in_system))]


@dataclass
class CompletedRequest:
    request_id: int
    arrival_slot: int
    start_slot: int
    finish_slot: int
    transmission: float
    storage: float
    processing: float
    waiting: float
    placements: int

    @property
    def total(self) -> float:
        return self.transmission + self.storage + self.processing + self.waiting


@dataclass
class Metrics:
    device_ids: List[str]
    Q: List[float] = field(default_factory=list)
    a: List[int] = field(default_factory=list)
    b: List[int] = field(default_factory=list)
    completed_per_slot: List[int] = field(default_factory=list)
    dropped_per_slot: List[int] = field(default_factory=list)
    y0: List[float] = field(default_factory=list)
    Z: List[tuple] = field(default_factory=list)
    utilization: List[tuple] = field(default_factory=list)
    realloc: List[int] = field(default_factory=list)
    completed: List[CompletedRequest] = field(default_factory=list)
    arrivals_total: int = 0
    dropped: int = 0
    deferred: int = 0
    overcommit_attempts: int = 0
    queries: int = 0
    splits: int = 0
    final_Q: float = 0.0
    tail_bound: float = 0.0

    @property
    def avg_latency(self) -> float:
        if not self.completed:
            return 0.0
        return math.fsum(c.total for c in self.completed) / len(self.completed)

    @property
    def avg_queue(self) -> float:
        return math.fsum(self.Q) / len(self.Q) if self.Q else 0.0

    @property
    def avg_y0(self) -> float:
        return math.fsum(self.y0) / len(self.y0) if self.y0 else 0.0

    @property
    def tail_violation(self) -> float:
        return tail_violation_rate(self.Q, self.tail_bound)

    @property
    def reallocations(self) -> int:
        return sum(self.realloc)

    def avg_utilization(self) -> Dict[str, float]:
        out = {}
        n = len(self.utilization)
        for j, dev in enumerate(self.device_ids):
            for k, kind in enumerate(KINDS):
                key = f"util_{dev}_{kind.value}"
                out[key] = math.fsum(u[j][k] for u in self.utilization) / n if n else 0.0
        return out

    def stable(self, eps: float = 1e-3) -> bool:
        return stability_check(self.Q + [self.final_Q], eps)


@dataclass
class _Job:
    request: Request
    containers: list
    start: int
    finish: int
    delay: object
    placements: int


def _expected_busy_slots(cfg, devices):
    mean_d = 0.5 * (cfg.data_size_min + cfg.data_size_max)
    rate = min(d.compute_rate for d in devices)
    return max(1, math.ceil(mean_d / rate / cfg.slot_length))


def run(cfg: SimConfig, arrivals=None) -> Metrics:
    """Simulate ``cfg``; ``arrivals`` overrides the Poisson stream with fixed
    batches or a :class:`ClosedLoopSource`."""
    cfg.validate()
    devices = build_devices(cfg)
    services = build_services(cfg)
    channel = build_channel(cfg)
    _check_usage_grid(devices, services, cfg.background)
    for b in cfg.background:
        if b["device"] not in {d.id for d in devices}:
            raise ConfigurationError(f"background load names unknown device {b['device']!r}")
    node = EdgeNode("EN1", devices)
    assoc = associate(list(range(cfg.users)), [node])
    if not assoc.is_valid():
        raise InvariantError("association matrix is not valid")
    if arrivals is None:
        arrivals = generate_arrivals(cfg.arrival_rate, cfg.seed, cfg.slots, services, cfg.users,
                                     (cfg.data_size_min, cfg.data_size_max),
                                     (cfg.timeout_min, cfg.timeout_max))
    source = arrivals if isinstance(arrivals, ClosedLoopSource) else None
    for batch in ([] if source else arrivals):
        for r in batch:
            if r.service not in services:
                raise ConfigurationError(f"unknown service id {r.service!r}")

    sup = Supervisor(node)
    load = LoadParams(cfg.rate_norm, cfg.rate_th, load_semantics=cfg.load_semantics)
    policy = make_policy(cfg.policy, sup, services, load)
    p_avg = {d.id: cfg.p_avg for d in devices}
    Z = {d.id: 0.0 for d in devices}
    Q = 0.0
    y0_max = float(len(devices))
    timeout_mean = 0.5 * (cfg.timeout_min + cfg.timeout_max)
    m = Metrics([d.id for d in devices])
    m.tail_bound = (cfg.tail_bound if cfg.tail_bound is not None
                    else timeout_mean / _expected_busy_slots(cfg, devices))

    pending: List[Request] = []
    running: Dict[int, List[_Job]] = {}
    background_running = {}
    n_running = 0
    no_fit = {}
    rate_cache = {}

    for t in range(cfg.slots):
        for i, b in enumerate(cfg.background):
            if b.get("end") is not None and b["end"] == t and i in background_running:
                dev_id, c = background_running.pop(i)
                node.device(dev_id).remove_container(c.id)
            if b["start"] == t:
                c = Container(new_container_id(), "background",
                              ResourceVector(int(b.get("processing", 0)), int(b.get("storage", 0)),
                                             int(b.get("memory", 0)), int(b.get("networking", 0))),
                              t, owner="background")
                dev = node.device(b["device"])
                if (dev.used + c.consumption).fits_in(dev.capacity):
                    dev.add_container(c)
                    background_running[i] = (dev.id, c)

        if source is not None:
            new = source.batch(t, len(pending) + n_running)
        else:
            new = arrivals[t] if t < len(arrivals) else []
        a_t = len(new)
        m.arrivals_total += a_t
        m.Q.append(Q)
        if Q != len(pending) + n_running:
            raise InvariantError(f"slot {t}: queue {Q} != requests in node {len(pending) + n_running}")
        pending.extend(new)

        fired = False
        touched = set()
        if pending or n_running:
            fired = policy.refresh(t)
        if pending:
            state = policy.state()
            senders = frozenset(r.user for r in new)
            rates = rate_cache.get(senders)
            if rates is None:
                rates = {u: link_rate(channel, u, senders - {u}) for u in range(cfg.users)}
                rate_cache[senders] = rates
            ctx = SlotContext(slot=t, V=cfg.V, Q=Q, arrivals=float(a_t), Z=dict(Z), p_avg=p_avg,
                              slot_length=cfg.slot_length, link_rates=rates,
                              response_fraction=cfg.response_fraction, C=cfg.C,
                              candidate_limit=cfg.candidate_limit)
            still = []
            # a no-fit verdict stays valid while the supervisor's view is the
            # very same object: nothing was placed, released or refreshed
            blocked = {svc for svc, seen in no_fit.items() if seen is state}
            for r in pending:
                # residuals only shrink within a slot: a service with no
                # feasible placement stays infeasible for the rest of it
                if r.service in blocked:
                    still.append(r)
                    continue
                decision = policy.decide(r, state, ctx)
                if decision.kind == "deferred":
                    if decision.reason == "no-fit":
                        blocked.add(r.service)
                        no_fit[r.service] = state
                    still.append(r)
                    continue
                ev = decision.evaluation
                try:
                    containers = instantiate(ev.scheme, node, t, r.service)
                except InvariantError:
                    m.overcommit_attempts += 1
                    still.append(r)
                    continue
                for p in ev.scheme.placements:
                    sup.record_placement(p.device_id, p.amounts)
                    touched.add(p.device_id)
                state = state.with_allocation(ev.scheme)
                if len(ev.scheme.placements) > 1:
                    m.splits += 1
                finish = t + ev.service_slots - 1
                running.setdefault(finish, []).append(
                    _Job(r, containers, t, finish, ev.delay, len(ev.scheme.placements)))
                n_running += 1
            pending = still
        m.realloc.append(int(fired))

        loads = {}
        util_row = []
        for d in devices:
            u = d.utilization()
            util_row.append(u)
            loads[d.id] = sum(u) / len(u)
        m.utilization.append(tuple(util_row))
        y0 = 0.0
        for d in devices:
            if d.id in touched:
                y0 += loads[d.id]
        if not 0.0 <= y0 <= y0_max:
            raise InvariantError(f"slot {t}: y0={y0} outside [0, {y0_max}]")
        m.y0.append(y0)

        done = 0
        for job in running.pop(t, []):
            complete_subtasks(job.containers, node)
            for dev_id, c in job.containers:
                sup.record_release(dev_id, c.consumption)
            d = job.delay
            m.completed.append(CompletedRequest(job.request.id, job.request.arrival_slot, job.start,
                                                t, d.transmission, d.storage, d.processing,
                                                d.waiting, job.placements))
            done += 1
        n_running -= done

        kept = []
        drops = 0
        for r in pending:
            if t + 1 - r.arrival_slot > r.timeout:
                drops += 1
            else:
                kept.append(r)
        pending = kept
        m.dropped += drops

        for d in devices:
            if not validate_capacity(d):
                raise InvariantError(f"slot {t}: device {d.id} over capacity")

        b_t = done + drops
        m.a.append(a_t)
        m.b.append(b_t)
        m.completed_per_slot.append(done)
        m.dropped_per_slot.append(drops)
        Q = kernels.queue_step(Q, a_t, b_t)
        for d in devices:
            Z[d.id] = kernels.virtual_queue_step(Z[d.id], loads[d.id] - p_avg[d.id])
        m.Z.append(tuple(Z[d.id] for d in devices))

    m.final_Q = Q
    m.deferred = len(pending) + n_running
    m.queries = sup.queries
    if len(m.completed) + m.deferred + m.dropped != m.arrivals_total:
        raise InvariantError("request accounting does not balance")
    return m


def measure_service_capacity(cfg: SimConfig, slots: int = 2000, population: Optional[int] = None) -> float:
    """Saturation throughput of ``cfg.policy`` in requests per slot.

    A closed loop keeps the node backlogged with no timeouts, so completions
    follow the configured service mix instead of favouring easy requests.
    """
    never = slots + 1
    probe = replace(cfg, slots=slots, background=[], timeout_min=never, timeout_max=never)
    devices = build_devices(probe)
    pop = population if population is not None else 8 * len(devices)
    factory = RequestFactory(build_services(probe), np.random.default_rng(cfg.seed), probe.users,
                             (probe.data_size_min, probe.data_size_max), (never, never))
    m = run(probe, ClosedLoopSource(pop, factory))
    half = slots // 2
    return sum(m.completed_per_slot[half:]) / (slots - half)


def config_fields() -> List[str]:
    return [f.name for f in fields(SimConfig)]
