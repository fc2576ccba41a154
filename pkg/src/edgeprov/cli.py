"""Experiment runner: ``edgeprov run`` and ``edgeprov presets``.

A config file is YAML.  Top-level keys are simulation fields (see
:class:`edgeprov.sim.SimConfig`) plus four experiment keys::

    slots: 2000
    V: 10
    devices: table2          # preset name or a list of device mappings
    sweep:                   # cross product of these axes
      V: [0, 50, 100]
      policy: [lrr, greedy-match]
    seeds: [0, 1, 2]
    out: results
    max_runs: 10000

Each run writes ``<out>/<run_id>.csv`` with one row per slot; every run adds
a row to ``<out>/summary.csv``.
"""
from __future__ import annotations

import argparse
import csv
import difflib
import io
import itertools
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Dict, List, Optional, Sequence, Tuple

import yaml

from .domain import KINDS
from .errors import ConfigurationError, EdgeProvError
from .presets import PRESET_NOTES, PRESETS, SERVICE_PRESETS
from .sim import Metrics, SimConfig, run

EXPERIMENT_KEYS = ("sweep", "seeds", "out", "max_runs")
DEFAULT_MAX_RUNS = 10_000

_INT = (int,)
_NUM = (int, float)
# accepted YAML types per simulation field
FIELD_TYPES = {
    "slots": _INT, "seed": _INT, "arrival_rate": _NUM, "V": _NUM, "rate_norm": _NUM,
    "rate_th": _NUM, "slot_length": _NUM, "devices": (str, list), "services": (str, list),
    "channel": (dict,), "users": _INT, "policy": (str,), "candidate_limit": _INT, "C": _NUM,
    "response_fraction": _NUM, "load_semantics": (str,), "p_avg": _NUM,
    "data_size_min": _INT, "data_size_max": _INT, "timeout_min": _INT, "timeout_max": _INT,
    "tail_bound": _NUM + (type(None),), "background": (list,),
}

SUMMARY_METRICS = ("avg_latency_s", "avg_queue", "tail_violation", "reallocations", "completed",
                   "dropped", "deferred", "overcommit_attempts", "avg_y0", "queries")


@dataclass
class ExperimentSpec:
    base: SimConfig = field(default_factory=SimConfig)
    sweep: List[Tuple[str, list]] = field(default_factory=list)
    seeds: List[int] = field(default_factory=lambda: [0])
    out: str = "results"
    max_runs: int = DEFAULT_MAX_RUNS

    def validate(self) -> None:
        names = {f.name for f in fields(SimConfig)}
        for name, values in self.sweep:
            if name not in names:
                raise ConfigurationError(f"sweep axis {name!r} is not a simulation field{_hint(name, names)}")
            if name == "seed":
                raise ConfigurationError("sweep over seeds with the top-level 'seeds' key")
            if not values:
                raise ConfigurationError(f"sweep axis {name!r} has no values")
        if not self.seeds:
            raise ConfigurationError("at least one seed is required")
        if self.n_runs() > self.max_runs:
            raise ConfigurationError(f"sweep expands to {self.n_runs()} runs, above the cap of {self.max_runs}")

    def n_runs(self) -> int:
        n = len(self.seeds)
        for _, values in self.sweep:
            n *= len(values)
        return n

    def runs(self) -> List[Tuple[str, Dict[str, object], SimConfig]]:
        """(run id, swept values, config) for every point and seed, in a fixed order."""
        names = [n for n, _ in self.sweep]
        out = []
        for combo in itertools.product(*(v for _, v in self.sweep)):
            params = dict(zip(names, combo))
            for seed in self.seeds:
                cfg = replace(self.base, seed=seed, **params)
                out.append((f"run{len(out):05d}", params, cfg))
        return out


def _hint(key: str, valid) -> str:
    close = difflib.get_close_matches(key, list(valid), n=1, cutoff=0.5)
    return f"; did you mean {close[0]!r}?" if close else ""


def _check_type(path: str, value, types) -> None:
    ok = isinstance(value, types) and not (isinstance(value, bool) and bool not in types)
    if not ok:
        want = " or ".join(t.__name__ for t in types)
        raise ConfigurationError(f"{path}: expected {want}, got {type(value).__name__} {value!r}")


def parse_config(data: Optional[dict]) -> ExperimentSpec:
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigurationError("config root must be a mapping")
    valid = set(FIELD_TYPES) | set(EXPERIMENT_KEYS)
    sim_kwargs = {}
    for key, value in data.items():
        if key not in valid:
            raise ConfigurationError(f"unknown key {key!r}{_hint(str(key), valid)}")
        if key in FIELD_TYPES:
            _check_type(key, value, FIELD_TYPES[key])
            sim_kwargs[key] = value
    spec = ExperimentSpec(base=SimConfig(**sim_kwargs))

    sweep = data.get("sweep") or {}
    _check_type("sweep", sweep, (dict,))
    for name, values in sweep.items():
        if name not in FIELD_TYPES:
            raise ConfigurationError(f"sweep.{name}: not a simulation field{_hint(str(name), FIELD_TYPES)}")
        _check_type(f"sweep.{name}", values, (list,))
        for i, v in enumerate(values):
            _check_type(f"sweep.{name}[{i}]", v, FIELD_TYPES[name])
        spec.sweep.append((name, list(values)))
    if "seeds" in data:
        _check_type("seeds", data["seeds"], (list,))
        for i, s in enumerate(data["seeds"]):
            _check_type(f"seeds[{i}]", s, _INT)
        spec.seeds = list(data["seeds"])
    elif "seed" in sim_kwargs:
        spec.seeds = [sim_kwargs["seed"]]
    if "out" in data:
        _check_type("out", data["out"], (str,))
        spec.out = data["out"]
    if "max_runs" in data:
        _check_type("max_runs", data["max_runs"], _INT)
        spec.max_runs = data["max_runs"]
    spec.base.validate()
    spec.validate()
    return spec


def load_config(path: str) -> ExperimentSpec:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"{path}: not valid YAML: {exc}") from None
    return parse_config(data)


def _num(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def slot_columns(device_ids: Sequence[str]) -> List[str]:
    cols = ["slot", "Q", "a", "b", "completed", "dropped", "y0", "realloc"]
    cols += [f"Z_{d}" for d in device_ids]
    cols += [f"util_{d}_{k.value}" for d in device_ids for k in KINDS]
    return cols


def slot_csv(m: Metrics) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(slot_columns(m.device_ids))
    for t in range(len(m.Q)):
        row = [t, m.Q[t], m.a[t], m.b[t], m.completed_per_slot[t], m.dropped_per_slot[t], m.y0[t],
               m.realloc[t], *m.Z[t]]
        for dev in m.utilization[t]:
            row.extend(dev)
        w.writerow([_num(x) for x in row])
    return buf.getvalue()


def summarize(m: Metrics) -> Dict[str, object]:
    row = {
        "avg_latency_s": m.avg_latency, "avg_queue": m.avg_queue,
        "tail_violation": m.tail_violation, "reallocations": m.reallocations,
        "completed": len(m.completed), "dropped": m.dropped, "deferred": m.deferred,
        "overcommit_attempts": m.overcommit_attempts, "avg_y0": m.avg_y0, "queries": m.queries,
    }
    row.update(m.avg_utilization())
    return row


def _execute(job):
    run_id, cfg, out_dir = job
    try:
        m = run(cfg)
    except Exception as exc:  # reported with the run id by the caller
        return run_id, None, f"{type(exc).__name__}: {exc}"
    with open(os.path.join(out_dir, f"{run_id}.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write(slot_csv(m))
    return run_id, summarize(m), None


def worker_count(n_runs: int) -> int:
    raw = os.environ.get("EDGEPROV_THREADS")
    if raw:
        try:
            cap = int(raw)
        except ValueError:
            raise ConfigurationError(f"EDGEPROV_THREADS must be an integer, got {raw!r}") from None
        if cap < 1:
            raise ConfigurationError("EDGEPROV_THREADS must be >= 1")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_runs))


def run_experiments(spec: ExperimentSpec, stdout=None) -> int:
    stdout = stdout or sys.stdout
    spec.validate()
    os.makedirs(spec.out, exist_ok=True)
    runs = spec.runs()
    jobs = [(rid, cfg, spec.out) for rid, _, cfg in runs]
    workers = worker_count(len(jobs))
    if workers == 1:
        results = [_execute(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_execute, jobs))

    axes = [n for n, _ in spec.sweep]
    rows, failed = [], []
    for (rid, params, cfg), (_, summary, err) in zip(runs, results):
        if err is not None:
            failed.append((rid, err))
            continue
        row = {"run_id": rid, **{a: params[a] for a in axes}, "seed": cfg.seed, **summary}
        rows.append(row)

    if rows:
        header = list(rows[0])
        with open(os.path.join(spec.out, "summary.csv"), "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_num(r[h]) for h in header])
        _print_table(rows, axes, stdout)
    for rid, err in failed:
        print(f"run {rid} failed: {err}", file=sys.stderr)
    return 1 if failed else 0


def _print_table(rows, axes, stdout) -> None:
    cols = ["run_id", *axes, "seed", "avg_latency_s", "avg_queue", "tail_violation", "reallocations"]
    cells = [[_short(r[c]) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    print("  ".join(c.ljust(w) for c, w in zip(cols, widths)), file=stdout)
    for row in cells:
        print("  ".join(v.ljust(w) for v, w in zip(row, widths)), file=stdout)


def _short(x) -> str:
    return f"{x:.4f}" if isinstance(x, float) else str(x)


def apply_overrides(spec: ExperimentSpec, args) -> ExperimentSpec:
    """Command-line values replace the config's and drop a sweep on the same field."""
    changes = {}
    if args.policy is not None:
        changes["policy"] = args.policy
    if args.v is not None:
        changes["V"] = args.v
    if args.slots is not None:
        changes["slots"] = args.slots
    if args.load_semantics is not None:
        changes["load_semantics"] = args.load_semantics
    if changes:
        spec.base = replace(spec.base, **changes)
        spec.sweep = [(n, v) for n, v in spec.sweep if n not in changes]
    if args.seed is not None:
        spec.seeds = [args.seed]
    if args.out is not None:
        spec.out = args.out
    spec.base.validate()
    spec.validate()
    return spec


def cmd_presets(stdout=None) -> int:
    stdout = stdout or sys.stdout
    print("device presets:", file=stdout)
    for name in sorted(PRESETS):
        print(f"  {name}: {PRESET_NOTES.get(name, '')}", file=stdout)
    print("service presets:", file=stdout)
    for name in sorted(SERVICE_PRESETS):
        ids = ", ".join(s["id"] for s in SERVICE_PRESETS[name])
        print(f"  {name}: {ids}", file=stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="edgeprov", description="Edge resource provisioning simulator")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment from a YAML config")
    r.add_argument("--config", required=True)
    r.add_argument("--seed", type=int)
    r.add_argument("--out")
    r.add_argument("--policy")
    r.add_argument("--v", type=float)
    r.add_argument("--slots", type=int)
    r.add_argument("--load-semantics", choices=("consumed", "paper-verbatim"))
    sub.add_parser("presets", help="list named device and service presets")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        return cmd_presets()
    try:
        spec = apply_overrides(load_config(args.config), args)
        return run_experiments(spec)
    except (EdgeProvError, OSError) as exc:
        print(f"edgeprov: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
