"""Named device presets and the default service catalogue."""
from __future__ import annotations

GiB = 2 ** 30
MiB = 2 ** 20
GHZ = 2_500_000_000
# cycles needed per byte of request data; sets the per-container rate f_P
CYCLES_PER_BYTE = 500

HDD = {"read_speed": 160_000_000, "write_speed": 120_000_000}
SSD = {"read_speed": 520_000_000, "write_speed": 480_000_000}


def _device(dev_id, cores, memory, storage, disk, network=1_000_000_000, family="Intel(R) Xeon(R)"):
    return {
        "id": dev_id,
        "cores": cores,
        "frequency_hz": GHZ,
        "memory": memory,
        "storage": storage,
        "networking": network,
        "compute_rate": GHZ / CYCLES_PER_BYTE,
        "family": family,
        "architecture": "x86_64",
        **disk,
    }


# three heterogeneous devices of one edge node, 2.5 GHz cores
PRESETS = {
    "table2": [
        _device("ED1", 2, 2 * GiB, 20 * GiB, HDD),
        _device("ED2", 4, 2 * GiB, 30 * GiB, SSD),
        _device("ED3", 2, 4 * GiB, 20 * GiB, HDD),
    ],
    "single": [
        _device("ED1", 4, 4 * GiB, 30 * GiB, SSD),
    ],
}

PRESET_NOTES = {
    "table2": "3 devices at 2.5 GHz: ED1 2 GiB/2 cores/20 GiB HDD, ED2 2 GiB/4 cores/30 GiB SSD, "
              "ED3 4 GiB/2 cores/20 GiB HDD; 1 Gbit/s NICs",
    "single": "one 4-core 2.5 GHz device, 4 GiB memory, 30 GiB SSD",
}

DEFAULT_SERVICES = [
    {"id": "detect", "processing": 1_280_000_000, "storage": 256 * MiB, "memory": 512 * MiB,
     "networking": 16_000_000, "read_probability": 1.0, "write_probability": 0.0},
    {"id": "recognize", "processing": 2_560_000_000, "storage": 512 * MiB, "memory": 1 * GiB,
     "networking": 32_000_000, "read_probability": 1.0, "write_probability": 0.5},
    # only the 4-core device holds it whole; elsewhere it must be split
    {"id": "analyze", "processing": 7_680_000_000, "storage": 512 * MiB, "memory": 1 * GiB,
     "networking": 32_000_000, "read_probability": 1.0, "write_probability": 0.5},
]

# every request exceeds any single table2 device, so each one is split
SPLIT_BOUND_SERVICES = [
    {"id": "bulk", "processing": 12_000_000_000, "storage": 512 * MiB, "memory": 1 * GiB,
     "networking": 32_000_000, "read_probability": 1.0, "write_probability": 0.5},
]

SERVICE_PRESETS = {"default": DEFAULT_SERVICES, "split-bound": SPLIT_BOUND_SERVICES}

DEFAULT_CHANNEL = {
    "bandwidth_hz": 20e6,
    "noise_w": 1e-13,
    "tx_power_w": 0.2,
    # |h|^2 of each user towards the node
    "gains_sq": [1e-11, 8e-12, 6e-12, 5e-12],
}


def preset(name: str):
    try:
        return [dict(d) for d in PRESETS[name]]
    except KeyError:
        raise KeyError(f"unknown device preset {name!r}; known: {', '.join(sorted(PRESETS))}") from None
