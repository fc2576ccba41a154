"""Resource representation: device descriptors, their XML codec, and the
supervisor's registry of snapshots.

Document layout (UTF-8)::

    <resources device="ED1" slot="12">
      <cpu><family/><architecture/><cores/><frequency_hz/><usage/></cpu>
      <memory><total_bytes/><available_bytes/></memory>
      <storage><total_bytes/><available_bytes/><read_bps/><write_bps/></storage>
      <network><capacity_bps/><available_bps/></network>
    </resources>

Counts, byte amounts and rates are integers; ``usage`` is a decimal with at
most six fractional digits.  ``read_bps``/``write_bps`` are storage speeds in
bytes per second, ``*_bps`` under ``network`` are bits per second.  Unknown
elements are ignored on parse.
"""
from __future__ import annotations

import threading
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Dict, Optional

from .domain import EdgeDevice, ResourceVector
from .errors import (DescriptorValidationError, MissingElementError, UnknownDeviceError,
                     XMLParseError)

USAGE_DIGITS = 6


@dataclass(frozen=True)
class CpuInfo:
    family: str
    architecture: str
    cores: int
    frequency_hz: int
    usage: float

    def __post_init__(self):
        object.__setattr__(self, "usage", round(float(self.usage), USAGE_DIGITS) + 0.0)

    @property
    def capacity(self) -> int:
        return self.cores * self.frequency_hz


@dataclass(frozen=True)
class MemoryInfo:
    total: int
    available: int


@dataclass(frozen=True)
class StorageInfo:
    total: int
    available: int
    read_speed: int
    write_speed: int


@dataclass(frozen=True)
class NetworkInfo:
    capacity: int
    available: int


@dataclass(frozen=True)
class ResourceDescriptor:
    device_id: str
    cpu: CpuInfo
    memory: MemoryInfo
    storage: StorageInfo
    network: NetworkInfo
    taken_at: int

    def __post_init__(self):
        validate_descriptor(self)

    def residual(self) -> ResourceVector:
        """Available amounts as a resource vector (P, S, M, N)."""
        cap = self.cpu.capacity
        used = round(self.cpu.usage * cap)
        return ResourceVector(cap - used, self.storage.available, self.memory.available,
                              self.network.available)


def validate_descriptor(d: ResourceDescriptor) -> None:
    c = d.cpu
    if c.cores < 1:
        raise DescriptorValidationError(f"{d.device_id}: cores must be >= 1")
    if c.frequency_hz <= 0:
        raise DescriptorValidationError(f"{d.device_id}: frequency must be > 0")
    if not 0.0 <= c.usage <= 1.0:
        raise DescriptorValidationError(f"{d.device_id}: cpu usage {c.usage} outside [0, 1]")
    for name, total, avail in (("memory", d.memory.total, d.memory.available),
                               ("storage", d.storage.total, d.storage.available),
                               ("network", d.network.capacity, d.network.available)):
        if total < 0 or avail < 0:
            raise DescriptorValidationError(f"{d.device_id}: negative {name} amount")
        if avail > total:
            raise DescriptorValidationError(
                f"{d.device_id}: {name} available {avail} exceeds total {total}")
    if d.storage.read_speed <= 0 or d.storage.write_speed <= 0:
        raise DescriptorValidationError(f"{d.device_id}: storage speeds must be > 0")
    if d.taken_at < 0:
        raise DescriptorValidationError(f"{d.device_id}: negative slot")


def snapshot(device: EdgeDevice, slot: int) -> ResourceDescriptor:
    """Simulated probe of ``device``: static properties plus current residuals."""
    cap = device.capacity
    used = device.used
    usage = used.processing / cap.processing if cap.processing else 0.0
    return ResourceDescriptor(
        device_id=device.id,
        cpu=CpuInfo(device.family, device.architecture, device.cores, device.frequency_hz, usage),
        memory=MemoryInfo(cap.memory, cap.memory - used.memory),
        storage=StorageInfo(cap.storage, cap.storage - used.storage,
                            int(round(device.read_speed)), int(round(device.write_speed))),
        network=NetworkInfo(cap.networking, cap.networking - used.networking),
        taken_at=slot,
    )


def _fmt_fraction(x: float) -> str:
    s = f"{x:.{USAGE_DIGITS}f}".rstrip("0").rstrip(".")
    return "0" if s in ("", "-0") else s


def _sub(parent, tag, text):
    el = ET.SubElement(parent, tag)
    el.text = text
    return el


def to_xml(d: ResourceDescriptor) -> str:
    root = ET.Element("resources", {"device": d.device_id, "slot": str(d.taken_at)})
    cpu = ET.SubElement(root, "cpu")
    _sub(cpu, "family", d.cpu.family)
    _sub(cpu, "architecture", d.cpu.architecture)
    _sub(cpu, "cores", str(d.cpu.cores))
    _sub(cpu, "frequency_hz", str(d.cpu.frequency_hz))
    _sub(cpu, "usage", _fmt_fraction(d.cpu.usage))
    mem = ET.SubElement(root, "memory")
    _sub(mem, "total_bytes", str(d.memory.total))
    _sub(mem, "available_bytes", str(d.memory.available))
    sto = ET.SubElement(root, "storage")
    _sub(sto, "total_bytes", str(d.storage.total))
    _sub(sto, "available_bytes", str(d.storage.available))
    _sub(sto, "read_bps", str(d.storage.read_speed))
    _sub(sto, "write_bps", str(d.storage.write_speed))
    net = ET.SubElement(root, "network")
    _sub(net, "capacity_bps", str(d.network.capacity))
    _sub(net, "available_bps", str(d.network.available))
    body = ET.tostring(root, encoding="unicode")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + body + "\n"


def _byte_offset(data: bytes, line: int, column: int) -> int:
    lines = data.split(b"\n")
    return sum(len(l) + 1 for l in lines[:max(line - 1, 0)]) + column


def _child(parent, tag, path):
    el = parent.find(tag)
    if el is None:
        raise MissingElementError(f"missing required element <{path}/{tag}>")
    return el


def _text(parent, tag, path) -> str:
    el = _child(parent, tag, path)
    return (el.text or "").strip()


def _int(parent, tag, path) -> int:
    raw = _text(parent, tag, path)
    try:
        if not raw.lstrip("-").isdigit():
            raise ValueError
        return int(raw)
    except ValueError:
        raise DescriptorValidationError(f"<{path}/{tag}> must be an integer, got {raw!r}") from None


def _fraction(parent, tag, path) -> float:
    raw = _text(parent, tag, path)
    try:
        return float(raw)
    except ValueError:
        raise DescriptorValidationError(f"<{path}/{tag}> must be a decimal, got {raw!r}") from None


def from_xml(text) -> ResourceDescriptor:
    data = text.encode("utf-8") if isinstance(text, str) else bytes(text)
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, column = exc.position
        raise XMLParseError(f"malformed resource document: {exc}",
                            offset=_byte_offset(data, line, column)) from None
    if root.tag != "resources":
        raise MissingElementError(f"root element must be <resources>, got <{root.tag}>")
    device_id = root.get("device")
    slot = root.get("slot")
    if device_id is None or slot is None:
        raise MissingElementError("<resources> needs 'device' and 'slot' attributes")
    try:
        taken_at = int(slot)
    except ValueError:
        raise DescriptorValidationError(f"slot attribute must be an integer, got {slot!r}") from None
    cpu = _child(root, "cpu", "resources")
    mem = _child(root, "memory", "resources")
    sto = _child(root, "storage", "resources")
    net = _child(root, "network", "resources")
    return ResourceDescriptor(
        device_id=device_id,
        cpu=CpuInfo(_text(cpu, "family", "cpu"), _text(cpu, "architecture", "cpu"),
                    _int(cpu, "cores", "cpu"), _int(cpu, "frequency_hz", "cpu"),
                    _fraction(cpu, "usage", "cpu")),
        memory=MemoryInfo(_int(mem, "total_bytes", "memory"), _int(mem, "available_bytes", "memory")),
        storage=StorageInfo(_int(sto, "total_bytes", "storage"), _int(sto, "available_bytes", "storage"),
                            _int(sto, "read_bps", "storage"), _int(sto, "write_bps", "storage")),
        network=NetworkInfo(_int(net, "capacity_bps", "network"), _int(net, "available_bps", "network")),
        taken_at=taken_at,
    )


@dataclass
class Registry:
    """Latest descriptor per registered device.

    Readers may run concurrently; updates take an exclusive lock.
    """

    max_age: int = 1
    descriptors: Dict[str, ResourceDescriptor] = field(default_factory=dict)
    devices: Dict[str, EdgeDevice] = field(default_factory=dict)

    def __post_init__(self):
        self._lock = threading.Lock()

    def register(self, device: EdgeDevice) -> None:
        self.devices[device.id] = device

    def get(self, device_id: str) -> Optional[ResourceDescriptor]:
        return self.descriptors.get(device_id)

    def update(self, descriptor: ResourceDescriptor) -> None:
        with self._lock:
            prev = self.descriptors.get(descriptor.device_id)
            if prev is not None and descriptor.taken_at < prev.taken_at:
                raise DescriptorValidationError(
                    f"{descriptor.device_id}: snapshot from slot {descriptor.taken_at} is older "
                    f"than the registered one from slot {prev.taken_at}")
            self.descriptors[descriptor.device_id] = descriptor

    def is_stale(self, device_id: str, slot: int) -> bool:
        d = self.descriptors.get(device_id)
        return d is None or slot - d.taken_at > self.max_age


def supervisor_query(registry: Registry, device: EdgeDevice, slot: int) -> ResourceDescriptor:
    """Ask ``device`` for its resources; the answer travels as XML."""
    if device.id not in registry.devices:
        raise UnknownDeviceError(device.id)
    doc = to_xml(snapshot(device, slot))
    descriptor = from_xml(doc)
    registry.update(descriptor)
    return descriptor
