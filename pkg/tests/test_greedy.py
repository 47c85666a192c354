import itertools

import numpy as np
import pytest

from bitload.ber import qam_ber
from bitload.channel import ChannelSpec, SnrProfile, rayleigh_profile
from bitload.greedy import (
    Constraints,
    ber_cost_table,
    greedy_ber,
    greedy_margin,
    greedy_min_peak_power,
)
from bitload.metrics import dissimilarity, inverse_margin, peak_power, weighted_ber
from bitload.oracle import exhaustive


def test_constraints_validation():
    Constraints(10, 2, 14)
    for args in ((3, 2, 14), (4, 2, 15), (4, 0, 4), (-1, 1, 4), (2.5, 1, 4)):
        with pytest.raises(ValueError):
            Constraints(*args)
    with pytest.raises(ValueError):
        Constraints(9, 1, 4).check(2)


def test_margin_equal_snr_splits():
    alloc, trace = greedy_margin(SnrProfile([10.0, 10.0]), Constraints(2, 1, 4))
    assert alloc.tolist() == [1, 1]
    assert trace.channels == [0, 1]


def test_margin_strong_channel_takes_both():
    # 3/4 < 1/1, so the second bit also goes to channel 0
    alloc, _ = greedy_margin(SnrProfile([4.0, 1.0]), Constraints(2, 1, 4))
    assert alloc.tolist() == [2, 0]
    best = min(([2, 0], [1, 1], [0, 2]), key=lambda b: inverse_margin(b, [4.0, 1.0]))
    assert best == [2, 0]


def test_margin_hand_trace():
    alloc, trace = greedy_margin(SnrProfile([15.0, 7.0]), Constraints(3, 1, 4))
    assert trace.channels == [0, 1, 0]
    assert trace.metrics == pytest.approx([1 / 15, 1 / 7, 3 / 15])
    assert alloc.tolist() == [2, 1]
    states = [s.tolist() for s in trace.states()]
    assert states == [[0, 0], [1, 0], [1, 1], [2, 1]]


def test_cap_and_zero_snr():
    alloc, _ = greedy_margin(SnrProfile([1e6, 1.0, 0.0]), Constraints(6, 1, 4))
    assert alloc.tolist() == [4, 2, 0]
    with pytest.raises(ValueError):
        greedy_margin(SnrProfile([1.0, 0.0]), Constraints(5, 1, 4))


def test_granularity_two():
    alloc, trace = greedy_margin(SnrProfile([100.0, 10.0]), Constraints(6, 2, 6))
    assert alloc.total == 6 and all(b % 2 == 0 for b in alloc.tolist())
    assert len(trace) == 3


def test_remove_direction_matches_add():
    p = rayleigh_profile(12, 25.0, 3)
    c = Constraints(40, 1, 8)
    a, _ = greedy_margin(p, c, "add")
    b, _ = greedy_margin(p, c, "remove")
    assert a == b
    with pytest.raises(ValueError):
        greedy_margin(p, c, "sideways")


def test_start_allocation():
    p = SnrProfile([100.0, 100.0, 1.0])
    alloc, trace = greedy_margin(p, Constraints(5, 1, 4), start=[2, 0, 0])
    assert alloc.total == 5 and len(trace) == 3
    with pytest.raises(ValueError):
        greedy_margin(p, Constraints(1, 1, 4), start=[2, 0, 0])


def test_margin_objective_monotone_along_trace():
    p = rayleigh_profile(16, 30.0, 11)
    _, trace = greedy_margin(p, Constraints(80, 1, 10))
    values = [inverse_margin(s, p) for s in list(trace.states())[1:]]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_ber_single_channel():
    for metric in ("delta", "simplified"):
        alloc, _ = greedy_ber(SnrProfile([50.0]), Constraints(3, 1, 8), metric)
        assert alloc.tolist() == [3]


def test_ber_two_channel_matches_brute_force():
    snr = [100.0, 25.0]
    alloc, trace = greedy_ber(SnrProfile(snr), Constraints(2, 1, 4), "delta")
    best = min(([2, 0], [1, 1], [0, 2]), key=lambda b: weighted_ber(b, snr))
    assert alloc.tolist() == best
    assert trace.certified


def test_ber_cost_table():
    snr = np.array([30.0, 300.0])
    t = ber_cost_table(snr, Constraints(4, 2, 4))
    assert t.shape == (2, 3)
    assert t[:, 0].tolist() == [0.0, 0.0]
    assert t[1, 2] == pytest.approx(4 * qam_ber(4, 300.0))


def test_ber_metrics_agree_at_high_snr():
    # deep in the valid region the simplified step metric picks the same channels
    for seed in range(5):
        p = rayleigh_profile(64, 45.0, seed)
        c = Constraints(256, 1, 8)
        a, ta = greedy_ber(p, c, "delta")
        b, _ = greedy_ber(p, c, "simplified")
        assert ta.certified
        assert dissimilarity(a, b) == 0.0


def test_ber_certification_flag():
    _, trace = greedy_ber(SnrProfile([2.0, 2.0]), Constraints(8, 1, 4))
    assert trace.certified is False
    with pytest.raises(ValueError):
        greedy_ber(SnrProfile([2.0]), Constraints(1, 1, 4), "other")


def test_ber_objective_monotone_along_trace():
    p = rayleigh_profile(16, 30.0, 2)
    _, trace = greedy_ber(p, Constraints(80, 1, 10))
    totals = [float(np.sum(s[s > 0] * qam_ber(s[s > 0], p.snr[s > 0])))
              for s in list(trace.states())[1:]]
    assert all(b >= a for a, b in zip(totals, totals[1:]))


def test_peak_power_single_channel_and_equivalence():
    spec = ChannelSpec.full_power([2.0], [1.0], 1.0)
    assert greedy_min_peak_power([1.0], spec, Constraints(3, 1, 8)).tolist() == [3]
    spec = ChannelSpec.full_power([3.0, 1.0, 0.2], [0.1, 0.1, 0.1], 1.0)
    snr = SnrProfile(spec.gains / spec.noise_vars)
    c = Constraints(7, 1, 6)
    a = greedy_min_peak_power(np.ones(3), spec, c)
    b, _ = greedy_margin(snr, c)
    assert a == b


def test_peak_power_optimal_with_random_gaps():
    rng = np.random.default_rng(9)
    for _ in range(20):
        spec = ChannelSpec.full_power(rng.uniform(0.1, 3, 3), rng.uniform(0.05, 0.2, 3), 1.0)
        gaps = rng.uniform(1, 10, 3)
        c = Constraints(int(rng.integers(1, 10)), 1, 4)
        got = greedy_min_peak_power(gaps, spec, c)
        ref = exhaustive(SnrProfile(spec.gains), c, "peak_power", gaps=gaps, spec=spec)
        assert peak_power(got, gaps, spec) == ref.best_value
    with pytest.raises(ValueError):
        greedy_min_peak_power([1.0, -1.0, 1.0], spec, c)
