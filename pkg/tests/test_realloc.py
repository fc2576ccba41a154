import random

import pytest
from hypothesis import given, strategies as st

from edgeprov.domain import KINDS, Container, EdgeNode, new_container_id
from edgeprov.errors import DomainError
from edgeprov.realloc import (CONSUMED, PAPER_VERBATIM, LoadParams, current_load, fires,
                              normal_load, scan, should_reallocate, threshold, workload)

from conftest import device, vec

P = KINDS[0]


def _with(cons_list, cap=(10, 10, 10, 10), dev_id="D"):
    d = device(dev_id, cap)
    for cons in cons_list:
        d.add_container(Container(new_container_id(), "s", vec(*cons), 0))
    return d


def test_workload_examples():
    assert workload(_with([(4, 0, 0, 0)]), P) == 6
    assert workload(_with([]), P) == 10
    assert workload(_with([(10, 0, 0, 0)]), P) == 0


def test_normal_load_examples():
    assert normal_load(10, 0.8) == 8
    assert normal_load(10, 0) == 0
    assert normal_load(10, 1) == 10
    with pytest.raises(DomainError):
        normal_load(10, 1.2)


def test_threshold_examples():
    assert threshold(0.5, 0.8, 2, 10) == pytest.approx(2.0, abs=1e-15)
    assert threshold(0.5, 0.8, 0, 10) == 0
    assert threshold(0.5, 1.0, 3, 10) == 0


def test_should_reallocate_examples():
    assert should_reallocate(11, 8, 2)
    assert not should_reallocate(10, 8, 2)
    assert not should_reallocate(11, 8, 1e300)


def test_scan_examples():
    idle = EdgeNode("N", [device("A"), device("B")])
    assert scan(idle, LoadParams()) == []
    # memory at 95% with one container: 9.5 > 8 + 0.5*0.2*1*10 = 9
    hot = EdgeNode("N", [device("A"), _with([(0, 0, 10, 0)], dev_id="B")])
    assert scan(hot, LoadParams()) == ["B"]
    assert fires(hot.devices[1], LoadParams()) == [KINDS[2]]


def test_degenerate_rates_fire_on_any_load():
    node = EdgeNode("N", [device("A"), _with([(1, 0, 0, 0)], dev_id="B")])
    assert scan(node, LoadParams(rate_norm=0.0, rate_th=0.0)) == ["B"]


def test_load_semantics_switch():
    d = _with([(2, 0, 0, 0)])
    assert current_load(d, P, CONSUMED) == 2
    assert current_load(d, P, PAPER_VERBATIM) == 8
    # an idle device fires under the verbatim reading: residual 10 > 8
    assert fires(device(), LoadParams(load_semantics=PAPER_VERBATIM))
    assert not fires(device(), LoadParams(load_semantics=CONSUMED))


def test_params_validation():
    with pytest.raises(DomainError):
        LoadParams(rate_norm=-0.1)
    with pytest.raises(DomainError):
        LoadParams(l_max={"A": (1, 1, 1, 0)})
    with pytest.raises(DomainError):
        LoadParams(load_semantics="other")


def _random_node(rng, n_dev):
    devs = []
    for j in range(n_dev):
        cap = tuple(rng.randint(1, 100) for _ in range(4))
        d = device(f"D{j}", cap)
        for _ in range(rng.randint(0, 4)):
            cons = tuple(rng.randint(0, c) for c in cap)
            if (d.used + vec(*cons)).fits_in(d.capacity):
                d.add_container(Container(new_container_id(), "s", vec(*cons), 0))
        devs.append(d)
    return EdgeNode("N", devs)


def brute_force_scan(node, rate_norm, rate_th, l_max, semantics):
    """Direct re-evaluation of the three load formulas, no shared helpers."""
    out = []
    for d in node.devices:
        k = len(d.containers)
        cap = [d.capacity.processing, d.capacity.storage, d.capacity.memory, d.capacity.networking]
        used = [0, 0, 0, 0]
        for c in d.containers:
            for i, v in enumerate((c.consumption.processing, c.consumption.storage,
                                   c.consumption.memory, c.consumption.networking)):
                used[i] += v
        hit = False
        for i in range(4):
            lm = l_max.get(d.id, cap)[i]
            w = cap[i] - used[i]
            l_curr = w if semantics == PAPER_VERBATIM else cap[i] - w
            if l_curr > lm * rate_norm + rate_th * (1.0 - rate_norm) * k * lm:
                hit = True
        if hit:
            out.append(d.id)
    return out


def test_scan_matches_brute_force_on_random_nodes():
    rng = random.Random(11)
    for _ in range(100):
        node = _random_node(rng, rng.randint(1, 5))
        rn, rt = rng.random(), rng.random()
        lm = {d.id: tuple(rng.randint(1, 120) for _ in range(4)) for d in node.devices if rng.random() < 0.3}
        sem = rng.choice([CONSUMED, PAPER_VERBATIM])
        assert scan(node, LoadParams(rn, rt, lm, sem)) == brute_force_scan(node, rn, rt, lm, sem)


@given(st.integers(0, 10_000), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_raising_rate_th_never_adds_devices(seed, rn, t1, t2):
    node = _random_node(random.Random(seed), 4)
    lo, hi = sorted((t1, t2))
    assert set(scan(node, LoadParams(rn, hi))) <= set(scan(node, LoadParams(rn, lo)))
