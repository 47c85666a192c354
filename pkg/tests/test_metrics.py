import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bitload.ber import qam_ber
from bitload.channel import ChannelSpec, SnrProfile
from bitload.metrics import (
    Allocation,
    dissimilarity,
    inverse_margin,
    inverse_margin_batch,
    peak_power,
    robustness_report,
    system_margin,
    weighted_ber,
    weighted_ber_batch,
)


def test_allocation_validation():
    a = Allocation([2, 0, 4], granularity=2, cap=4)
    assert a.total == 6 and len(a) == 3 and a.tolist() == [2, 0, 4]
    assert a == Allocation(np.array([2, 0, 4]), 2, 4)
    assert hash(a) == hash(Allocation([2, 0, 4], 2, 4))
    for bad in ([1, 2], [-2, 0], [6, 0]):
        with pytest.raises(ValueError):
            Allocation(bad, granularity=2, cap=4)
    with pytest.raises(ValueError):
        Allocation([1.5])
    with pytest.raises(ValueError):
        a.bits[0] = 0


def test_margin_examples():
    snr = [15.0, 7.0, 1.0]
    # gaps: 15/(2^2-1)=5, 7/(2^1-1)=7; unloaded channel ignored
    assert inverse_margin([2, 1, 0], snr) == pytest.approx(1 / 5)
    assert system_margin([2, 1, 0], snr) == pytest.approx(10 * math.log10(5))
    with pytest.raises(ValueError):
        inverse_margin([0, 0, 0], snr)


def test_weighted_ber_examples():
    s1, s2 = 30.0, 400.0
    assert weighted_ber([3], [s1]) == pytest.approx(qam_ber(3, s1))
    assert weighted_ber([1, 1], [s1, s1]) == pytest.approx(qam_ber(1, s1))
    assert weighted_ber([2, 4], [s1, s2]) == pytest.approx(
        (2 * qam_ber(2, s1) + 4 * qam_ber(4, s2)) / 6)
    assert weighted_ber([2, 0], [s1, 0.0]) == pytest.approx(qam_ber(2, s1))


@given(st.lists(st.tuples(st.integers(0, 10), st.floats(1.0, 1e5)), min_size=1, max_size=8))
@settings(max_examples=200, deadline=None)
def test_weighted_ber_bounds(pairs):
    bits = np.array([b for b, _ in pairs])
    snr = np.array([s for _, s in pairs])
    if bits.sum() == 0:
        return
    w = weighted_ber(bits, snr)
    per = [qam_ber(int(b), s) for b, s in zip(bits, snr) if b > 0]
    assert 0.0 <= w <= max(per) * (1 + 1e-12)
    if len(set(int(b) for b in bits if b > 0)) == 1:
        assert w == pytest.approx(np.mean(per), rel=1e-12)


def test_batches_match_scalars():
    rng = np.random.default_rng(1)
    snr = 10 ** rng.uniform(0, 4, 6)
    bits = rng.integers(0, 8, size=(50, 6))
    bits[:, 0] = np.maximum(bits[:, 0], 1)
    inv = inverse_margin_batch(bits, snr)
    wb = weighted_ber_batch(bits, snr)
    for k in range(50):
        assert inv[k] == inverse_margin(bits[k], snr)
        assert wb[k] == pytest.approx(weighted_ber(bits[k], snr), rel=1e-15)


def test_peak_power():
    spec = ChannelSpec.full_power([1.0, 0.5], [0.1, 0.1], 2.0)
    # (2^r - 1) gamma sigma^2 / (|h|^2 P)
    assert peak_power([2, 1], [3.0, 2.0], spec) == pytest.approx(max(3 * 3 * 0.1 / 2, 1 * 2 * 0.1 / 1))


def test_report():
    rep = robustness_report([2, 0, 12], [100.0, 1.0, 50.0])
    assert rep.per_channel_gap[1] is None
    assert rep.per_channel_ber[1] == 0.0
    assert rep.validity_flag is False  # 12 bits at 17 dB is far outside the model's range
    js = rep.to_json()
    assert js["per_channel_gap_db"][1] is None
    assert js["per_channel_gap_db"][0] == pytest.approx(10 * math.log10(100 / 3))
    good = robustness_report([2, 2], [1e3, 1e3])
    assert good.validity_flag is True
    assert good.system_margin_db == pytest.approx(10 * math.log10(1e3 / 3))


@pytest.mark.parametrize("y, mu", [
    ([3, 2, 2, 2], 1.0),
    ([5, 5, 0, 0], 1.0),
    ([4, 3, 2, 1], 0.5),
    ([4, 3, 3, 0], 0.0),
])
def test_dissimilarity_examples(y, mu):
    assert dissimilarity([4, 3, 3, 0], y) == mu


def test_dissimilarity_errors_and_literal_edge_cases():
    with pytest.raises(ValueError):
        dissimilarity([0, 0], [0, 0])
    with pytest.raises(ValueError):
        dissimilarity([1, 0], [1, 0, 0])
    assert dissimilarity([0, 0], [0, 3]) == 1.0
    # the count of differing indices is divided by the larger loaded count,
    # so disjoint supports exceed 1
    assert dissimilarity([1, 0], [0, 1]) == 2.0
    assert dissimilarity([1, 1, 0], [1, 0, 2]) == 1.0


vectors = st.lists(st.integers(0, 4), min_size=4, max_size=4)


@given(vectors, vectors, vectors)
@settings(max_examples=300, deadline=None)
def test_dissimilarity_properties(x, y, z):
    if not any(x) and not any(y):
        return
    mu = dissimilarity(x, y)
    assert mu == dissimilarity(y, x)
    assert (mu == 0) == (x == y)
    if mu == 0 and (any(x) or any(z)):
        assert dissimilarity(x, z) == dissimilarity(y, z)


@given(vectors, vectors)
@settings(max_examples=300, deadline=None)
def test_full_dissimilarity_with_nested_supports(x, y):
    # with one support inside the other, mu = 1 exactly when no loaded index agrees
    xs = {i for i, v in enumerate(x) if v}
    ys = {i for i, v in enumerate(y) if v}
    if not (xs or ys) or not (xs <= ys or ys <= xs):
        return
    all_differ = all(a != b or a == b == 0 for a, b in zip(x, y))
    assert (dissimilarity(x, y) == 1) == all_differ
