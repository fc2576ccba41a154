import pytest
from hypothesis import given, strategies as st

from edgeprov.domain import (KINDS, SHARE_QUANTUM, Container, EdgeNode, Request, ResourceKind,
                             ResourceVector, Service, associate, new_container_id, residual,
                             validate_capacity)
from edgeprov.errors import ConfigurationError, DomainError, InvariantError

from conftest import device, vec


def test_kinds_fixed_order():
    assert [k.value for k in KINDS] == ["processing", "storage", "memory", "networking"]
    assert len(ResourceKind) == 4


def test_vector_rejects_negative_and_non_integer():
    with pytest.raises(DomainError):
        vec(-1)
    with pytest.raises(DomainError):
        ResourceVector(1.5, 0, 0, 0)
    with pytest.raises(DomainError):
        ResourceVector(True, 0, 0, 0)


def test_vector_subtraction_errors_instead_of_clamping():
    with pytest.raises(InvariantError):
        vec(1, 1, 1, 1) - vec(2, 0, 0, 0)
    assert vec(5, 4, 3, 2) - vec(1, 1, 1, 1) == vec(4, 3, 2, 1)


def _cont(cons):
    return Container(new_container_id(), "s", vec(*cons), 0)


def test_validate_capacity_examples():
    d = device(containers=[_cont((4, 0, 0, 0)), _cont((5, 0, 0, 0))])
    assert validate_capacity(d)
    d = device()
    d.containers.extend([_cont((6, 0, 0, 0)), _cont((5, 0, 0, 0))])
    assert not validate_capacity(d)
    assert validate_capacity(device())


def test_add_container_refuses_overcommit():
    d = device()
    d.add_container(_cont((6, 0, 0, 0)))
    with pytest.raises(InvariantError):
        d.add_container(_cont((5, 0, 0, 0)))
    assert validate_capacity(d)


def test_double_remove_is_an_invariant_error():
    d = device()
    c = _cont((1, 1, 1, 1))
    d.add_container(c)
    d.remove_container(c.id)
    with pytest.raises(InvariantError):
        d.remove_container(c.id)


def test_residual_examples():
    d = device(containers=[_cont((4, 2, 0, 0))])
    assert residual(d) == vec(6, 8, 10, 10)
    assert residual(device()) == vec(10, 10, 10, 10)
    assert residual(device(containers=[_cont((10, 10, 10, 10))])) == vec()
    bad = device()
    bad.containers.append(_cont((11, 0, 0, 0)))
    with pytest.raises(InvariantError):
        residual(bad)


def test_associate_examples():
    m = associate([0, 1, 2], ["N0"])
    assert m.rows == [[1], [1], [1]] and m.is_valid()
    m = associate([0, 1, 2, 3], ["N0", "N1"])
    assert [m.node_of(u) for u in range(4)] == [0, 1, 0, 1]
    assert all(sum(r) == 1 for r in m.rows)
    assert len(associate([], ["N0"])) == 0 and associate([], ["N0"]).is_valid()
    with pytest.raises(ConfigurationError):
        associate([0], [])


@given(st.integers(0, 50), st.integers(1, 5))
def test_association_rows_sum_to_one(users, nodes):
    m = associate(list(range(users)), list(range(nodes)))
    assert m.is_valid()


def test_service_required_flags_follow_amounts():
    s = Service("s", vec(64, 0, 128, 0))
    assert s.required == (1, 0, 1, 0)
    with pytest.raises(ConfigurationError):
        Service("s", vec(64, 0, 0, 0), required=(0, 0, 0, 0))
    with pytest.raises(ConfigurationError):
        Service("s", vec(64, 0, 0, 0), required=(1, 1, 0, 0))
    with pytest.raises(ConfigurationError):
        Service("s", vec(65, 0, 0, 0))


def test_container_share_range():
    with pytest.raises(DomainError):
        Container(1, "s", vec(), 0, share=0.0)
    with pytest.raises(DomainError):
        Container(1, "s", vec(), 0, share=1.5)


def test_request_validation():
    Request(0, 0, 1, "s", 1)
    for kwargs in ({"data_size": 0}, {"timeout": 0}, {"needs_read": 2}):
        args = dict(id=0, user=0, data_size=1, service="s", timeout=1)
        args.update(kwargs)
        with pytest.raises(DomainError):
            Request(**args)


def test_node_device_ids_unique():
    with pytest.raises(ConfigurationError):
        EdgeNode("N", [device("A"), device("A")])


def test_device_cores_times_frequency_is_processing_capacity():
    with pytest.raises(DomainError):
        from edgeprov.domain import EdgeDevice
        EdgeDevice("X", vec(10, 1, 1, 1), 1.0, 1.0, 1.0, cores=3, frequency_hz=4)


def test_scaled_is_exact_for_divisible_amounts():
    v = vec(64 * 7, 64 * 3, 0, 64)
    parts = [v.scaled(u) for u in (10, 20, 34)]
    total = parts[0] + parts[1] + parts[2]
    assert total == v
    assert v.scaled(SHARE_QUANTUM) == v


amount = st.integers(0, 10 ** 6).map(lambda x: x * 64)


@given(st.lists(st.tuples(st.booleans(), amount, amount, amount, amount), max_size=60))
def test_create_destroy_cycles_conserve_residuals(ops):
    cap = vec(*(64 * 10 ** 6 * 3,) * 4)
    d = device(cap=cap.as_tuple())
    live = []
    for add, *cons in ops:
        if add or not live:
            c = _cont(tuple(cons))
            try:
                d.add_container(c)
            except InvariantError:
                continue
            live.append(c)
        else:
            c = live.pop(0)
            d.remove_container(c.id)
        assert validate_capacity(d)
        used = vec()
        for x in live:
            used = used + x.consumption
        assert residual(d) + used == cap
        assert d.used == used
    for c in live:
        d.remove_container(c.id)
    assert residual(d) == cap
