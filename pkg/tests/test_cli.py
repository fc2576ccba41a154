import csv
import os

import pytest

from edgeprov.cli import load_config, main, parse_config, run_experiments, slot_columns, worker_count
from edgeprov.errors import ConfigurationError


def write(tmp_path, text, name="c.yaml"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_empty_file_gives_defaults(tmp_path):
    spec = load_config(write(tmp_path, ""))
    b = spec.base
    assert (b.V, b.rate_norm, b.rate_th, b.C, b.slot_length, b.candidate_limit) == (10.0, 0.8, 0.5, 0.0, 1.0, 8)
    assert b.devices == "table2" and spec.n_runs() == 1


def test_v_sweep_expands_per_seed():
    spec = parse_config({"sweep": {"V": [0, 50, 100]}, "seeds": [1, 2]})
    assert spec.n_runs() == 6
    assert [cfg.V for _, _, cfg in spec.runs()] == [0, 0, 50, 50, 100, 100]


def test_misspelled_key_names_nearest_field():
    with pytest.raises(ConfigurationError, match="rate_norm"):
        parse_config({"rate_nrm": 0.5})


def test_type_errors_carry_path():
    with pytest.raises(ConfigurationError, match=r"sweep\.V\[1\]"):
        parse_config({"sweep": {"V": [1, "x"]}})
    with pytest.raises(ConfigurationError, match="slots"):
        parse_config({"slots": 1.5})
    with pytest.raises(ConfigurationError, match="seeds"):
        parse_config({"seeds": 3})


def test_run_cap_enforced():
    with pytest.raises(ConfigurationError, match="cap"):
        parse_config({"sweep": {"V": list(range(101))}, "seeds": list(range(100))})
    with pytest.raises(ConfigurationError):
        parse_config({"sweep": {"bogus": [1]}})


def test_zero_arrival_run_has_zero_summary(tmp_path):
    spec = parse_config({"slots": 10, "arrival_rate": 0.0, "out": str(tmp_path / "o")})
    assert run_experiments(spec) == 0
    rows = read_csv(tmp_path / "o" / "summary.csv")
    assert len(rows) == 1
    for k, v in rows[0].items():
        if k not in ("run_id", "seed"):
            assert float(v) == 0.0, k
    per_slot = read_csv(tmp_path / "o" / "run00000.csv")
    assert len(per_slot) == 10 and list(per_slot[0]) == slot_columns(["ED1", "ED2", "ED3"])


def _tree(root):
    out = {}
    for name in sorted(os.listdir(root)):
        with open(os.path.join(root, name), "rb") as fh:
            out[name] = fh.read()
    return out


def test_repeat_and_parallel_runs_are_byte_identical(tmp_path, monkeypatch):
    base = {"slots": 60, "arrival_rate": 1.5, "sweep": {"V": [0, 100]}, "seeds": [1, 2]}
    monkeypatch.setenv("EDGEPROV_THREADS", "1")
    run_experiments(parse_config({**base, "out": str(tmp_path / "a")}))
    run_experiments(parse_config({**base, "out": str(tmp_path / "b")}))
    monkeypatch.setenv("EDGEPROV_THREADS", "2")
    run_experiments(parse_config({**base, "out": str(tmp_path / "c")}))
    a = _tree(tmp_path / "a")
    assert a == _tree(tmp_path / "b") == _tree(tmp_path / "c")
    assert len(a) == 5


def test_threads_env(monkeypatch):
    monkeypatch.setenv("EDGEPROV_THREADS", "3")
    assert worker_count(10) == 3 and worker_count(2) == 2
    monkeypatch.setenv("EDGEPROV_THREADS", "zero")
    with pytest.raises(ConfigurationError):
        worker_count(4)


def test_failed_run_exits_nonzero_with_id(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("EDGEPROV_THREADS", "1")
    spec = parse_config({"slots": 5, "out": str(tmp_path / "o"),
                         "sweep": {"background": [[], [{"device": "EDX", "start": 0}]]}})
    assert run_experiments(spec) == 1
    assert "run00001 failed" in capsys.readouterr().err


def test_v_sweep_queue_non_decreasing(tmp_path, monkeypatch):
    monkeypatch.setenv("EDGEPROV_THREADS", "1")
    spec = parse_config({"slots": 400, "arrival_rate": 0.55, "services": "split-bound",
                         "sweep": {"V": [0, 1, 10, 50, 100]}, "seeds": [0, 1, 2],
                         "out": str(tmp_path / "o")})
    assert run_experiments(spec) == 0
    rows = read_csv(tmp_path / "o" / "summary.csv")
    means = {}
    for r in rows:
        means.setdefault(float(r["V"]), []).append(float(r["avg_queue"]))
    seq = [sum(v) / len(v) for _, v in sorted(means.items())]
    assert all(a <= b for a, b in zip(seq, seq[1:])), seq


def test_main_run_and_presets(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("EDGEPROV_THREADS", "1")
    cfg = write(tmp_path, "slots: 20\nsweep:\n  V: [0, 5]\n")
    out = str(tmp_path / "o")
    assert main(["run", "--config", cfg, "--seed", "3", "--out", out, "--v", "2",
                 "--policy", "greedy-match", "--slots", "15", "--load-semantics", "paper-verbatim"]) == 0
    rows = read_csv(os.path.join(out, "summary.csv"))
    assert len(rows) == 1 and rows[0]["seed"] == "3"
    assert len(read_csv(os.path.join(out, "run00000.csv"))) == 15
    assert main(["presets"]) == 0
    assert "table2" in capsys.readouterr().out
    assert main(["run", "--config", write(tmp_path, "rate_nrm: 1\n", "bad.yaml")]) == 2
    assert "rate_norm" in capsys.readouterr().err
