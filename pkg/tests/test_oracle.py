import itertools

import numpy as np
import pytest

from bitload.channel import SnrProfile
from bitload.greedy import Constraints
from bitload.metrics import Allocation, inverse_margin, weighted_ber
from bitload.oracle import compositions, exhaustive


def brute(n, cap, beta, total, lower=None):
    lower = lower or [0] * n
    levels = range(0, cap + 1, beta)
    return sorted(v for v in itertools.product(levels, repeat=n)
                  if sum(v) == total and all(a >= b for a, b in zip(v, lower)))


@pytest.mark.parametrize("n, cap, beta, total", [
    (3, 2, 1, 3), (4, 4, 2, 8), (2, 3, 1, 6), (5, 4, 1, 0), (3, 4, 2, 2),
])
def test_compositions_match_brute_force(n, cap, beta, total):
    got = sorted(map(tuple, compositions(n, Constraints(total, beta, cap)).tolist()))
    assert got == brute(n, cap, beta, total)


def test_compositions_lower_bounds_and_budget():
    got = sorted(map(tuple, compositions(3, Constraints(4, 1, 3), lower=[1, 0, 2]).tolist()))
    assert got == brute(3, 3, 1, 4, [1, 0, 2])
    with pytest.raises(ValueError):
        compositions(3, Constraints(4, 2, 4), lower=[1, 0, 0])
    with pytest.raises(ValueError):
        compositions(8, Constraints(10, 1, 15), budget=1000)


def test_exhaustive_margin_with_ties():
    res = exhaustive(SnrProfile([10.0, 10.0]), Constraints(1, 1, 4))
    assert res.argmins == {Allocation([1, 0], 1, 4), Allocation([0, 1], 1, 4)}
    assert res.best_value == pytest.approx(0.1)
    assert res.explored == 2


def test_exhaustive_values_are_global_minima():
    snr = [40.0, 8.0, 300.0]
    c = Constraints(7, 1, 4)
    cands = brute(3, 4, 1, 7)
    res = exhaustive(SnrProfile(snr), c, "margin_inverse")
    assert res.best_value == min(inverse_margin(v, snr) for v in cands)
    res = exhaustive(SnrProfile(snr), c, "weighted_ber")
    assert res.best_value == pytest.approx(min(weighted_ber(v, snr) for v in cands), rel=1e-14)
    assert all(weighted_ber(a, snr) == res.best_value for a in res.argmins)


def test_exhaustive_errors():
    p = SnrProfile([1.0, 2.0])
    with pytest.raises(ValueError):
        exhaustive(p, Constraints(2, 1, 4), "nonsense")
    with pytest.raises(ValueError):
        exhaustive(p, Constraints(0, 1, 4), "weighted_ber")
    with pytest.raises(ValueError):
        exhaustive(p, Constraints(2, 1, 4), "peak_power")
    with pytest.raises(ValueError):
        exhaustive(p, Constraints(10, 1, 4))
