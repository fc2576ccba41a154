import math

import pytest
from hypothesis import assume, given, strategies as st

from edgeprov.delay import (ChannelSpec, DelayBreakdown, edge_total_delay, link_rate,
                            local_processing_delay, local_total_delay, storage_delay,
                            transmission_delay)
from edgeprov.errors import DomainError

# 10*log2(2.5) and 1e6 over it, evaluated independently at 40 digits (mpmath)
RATE_SNR_1_5 = 13.21928094887362347870319429489390175865
PAYLOAD_OVER_RATE = 75647.07973660300294321053609604733719919
PAYLOAD_OVER_ROUNDED_RATE = 75646.97071705763542698932621243182316764


def rel(a, b):
    return abs(a - b) / abs(b) if b else abs(a)


def chan(bw=1.0, noise=1.0, powers=None):
    powers = powers or {}
    return ChannelSpec(bw, noise, tx_power={u: p for u, p in powers.items()},
                       gain={u: 1.0 for u in powers})


def test_local_processing_examples():
    assert local_processing_delay(10, 2) == 5.0
    assert local_processing_delay(0, 2) == 0.0
    assert local_processing_delay(2.5e9, 2.5e9) == 1.0
    with pytest.raises(DomainError):
        local_processing_delay(1, 0)


def test_storage_examples():
    assert storage_delay(100, 1, 1, 50, 100) == 3.0
    assert storage_delay(100, 0, 0, 50, 100) == 0.0
    assert storage_delay(100, 0, 1, 50, 25) == 4.0
    with pytest.raises(DomainError):
        storage_delay(100, 2, 0, 50, 25)


def test_local_total_examples():
    assert local_total_delay(10, 2) == 5.0
    assert local_total_delay(100, 100, idx_r=1, read_speed=100) == 2.0
    assert local_total_delay(0, 3) == 0.0


def test_link_rate_examples():
    assert link_rate(chan(powers={0: 1.0}), 0) == 1.0
    assert link_rate(chan(powers={0: 0.0}), 0) == 0.0
    r = link_rate(chan(bw=10, powers={0: 3.0, 1: 1.0}), 0, [1])
    assert rel(r, RATE_SNR_1_5) <= 1e-12


def test_transmission_examples():
    assert transmission_delay(8, 2) == 4.0
    assert transmission_delay(0, 2) == 0.0
    r = link_rate(chan(bw=10, powers={0: 3.0, 1: 1.0}), 0, [1])
    assert rel(transmission_delay(1e6, r), PAYLOAD_OVER_RATE) <= 1e-12
    assert rel(transmission_delay(1e6, 13.2193), PAYLOAD_OVER_ROUNDED_RATE) <= 1e-12
    with pytest.raises(DomainError):
        transmission_delay(1, 0)


def test_edge_total_examples():
    assert edge_total_delay(DelayBreakdown(1, 2, 3, 4)) == 10.0
    assert DelayBreakdown().total == 0.0
    assert DelayBreakdown(5, 0, 0, 0).total == 5.0
    with pytest.raises(DomainError):
        DelayBreakdown(-1, 0, 0, 0)


def test_channel_spec_validation():
    with pytest.raises(DomainError):
        ChannelSpec(0, 1)
    with pytest.raises(DomainError):
        ChannelSpec(1, 0)
    with pytest.raises(DomainError):
        ChannelSpec(1, 1, tx_power={0: -1})


pos = st.floats(1e-3, 1e9, allow_nan=False)
size = st.floats(0, 1e12, allow_nan=False)


@given(size, size, pos)
def test_processing_monotone_in_size(d1, d2, f):
    lo, hi = sorted((d1, d2))
    assert local_processing_delay(lo, f) <= local_processing_delay(hi, f)


@given(size, pos, pos)
def test_processing_antitone_in_rate(d, f1, f2):
    lo, hi = sorted((f1, f2))
    assert local_processing_delay(d, hi) <= local_processing_delay(d, lo)


@given(size, size, st.integers(0, 1), st.integers(0, 1), pos, pos, pos, pos)
def test_storage_monotone(d1, d2, w, r, sw1, sw2, sr1, sr2):
    lo, hi = sorted((d1, d2))
    assert storage_delay(lo, w, r, sw1, sr1) <= storage_delay(hi, w, r, sw1, sr1)
    swl, swh = sorted((sw1, sw2))
    srl, srh = sorted((sr1, sr2))
    assert storage_delay(d1, w, r, swh, srh) <= storage_delay(d1, w, r, swl, srl)


@given(size, size, pos, pos)
def test_transmission_monotone(p1, p2, x1, x2):
    lo, hi = sorted((p1, p2))
    assert transmission_delay(lo, x1) <= transmission_delay(hi, x1)
    xl, xh = sorted((x1, x2))
    assert transmission_delay(p1, xh) <= transmission_delay(p1, xl)


@given(st.floats(1e-6, 1e3), st.floats(0, 1e3), st.floats(0, 1e3), st.floats(1e-6, 1e3))
def test_link_rate_monotone_in_interference_and_power(own, i1, i2, own2):
    lo, hi = sorted((i1, i2))
    a = link_rate(chan(powers={0: own, 1: lo}), 0, [1])
    b = link_rate(chan(powers={0: own, 1: hi}), 0, [1])
    assert b <= a
    pl, ph = sorted((own, own2))
    assert link_rate(chan(powers={0: pl, 1: i1}), 0, [1]) <= link_rate(chan(powers={0: ph, 1: i1}), 0, [1])
    assert link_rate(chan(powers={0: own}), 0) > 0


@given(*(st.integers(0, 2 ** 40).map(float) for _ in range(4)))
def test_total_is_exact_component_sum(t, s, p, w):
    assert DelayBreakdown(t, s, p, w).total == t + s + p + w
