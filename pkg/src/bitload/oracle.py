"""Exhaustive-search reference optimizer for small instances."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSpec, SnrProfile
from .greedy import Constraints
from .metrics import Allocation, inverse_margin_batch, peak_power_batch, weighted_ber_batch

__all__ = ["OracleResult", "compositions", "exhaustive"]

OBJECTIVES = ("margin_inverse", "weighted_ber", "peak_power")


@dataclass(frozen=True)
class OracleResult:
    best_value: float
    argmins: frozenset
    explored: int


def compositions(n: int, c: Constraints, lower=None, budget: int = 10**7) -> np.ndarray:
    """Every beta-granular vector in [lower, cap]^n summing to the target rate.

    Returns an array of shape (count, n).
    """
    beta = c.granularity
    top = c.cap // beta
    total = c.target_rate // beta
    lo_bits = np.zeros(n, dtype=np.int64) if lower is None else np.asarray(lower, dtype=np.int64)
    if lo_bits.shape != (n,) or np.any(lo_bits % beta):
        raise ValueError("lower bounds must be n multiples of the granularity")
    lo = lo_bits // beta
    size = int(np.prod([top - l + 1 for l in lo], dtype=float))
    if size > budget:
        raise ValueError(f"enumeration of {size} states exceeds the budget of {budget}")

    # build level-by-level, pruning partial sums that cannot reach the total
    rows = np.zeros((1, 0), dtype=np.int64)
    for i in range(n):
        levels = np.arange(lo[i], top + 1)
        rest_max = top * (n - i - 1)
        rest_min = int(lo[i + 1:].sum())
        grown = np.concatenate(
            [np.repeat(rows, levels.size, axis=0),
             np.tile(levels, rows.shape[0])[:, None]], axis=1
        )
        partial = grown.sum(axis=1)
        keep = (partial + rest_min <= total) & (partial + rest_max >= total)
        rows = grown[keep]
    return rows * beta


def exhaustive(profile: SnrProfile, c: Constraints, objective: str = "margin_inverse", *,
               gaps=None, spec: ChannelSpec | None = None, lower=None,
               budget: int = 10**7) -> OracleResult:
    """Global optimum of the objective over all feasible allocations, with every tie.

    ``peak_power`` needs ``gaps`` (SNR-gap targets) and ``spec``.  ``lower``
    restricts the search to allocations at or above a given vector.
    """
    n = profile.n
    c.check(n)
    cands = compositions(n, c, lower, budget)
    if cands.shape[0] == 0:
        raise ValueError("no feasible allocation")
    if objective == "margin_inverse":
        values = inverse_margin_batch(cands, profile.snr)
    elif objective == "weighted_ber":
        if c.target_rate == 0:
            raise ValueError("weighted BER is undefined at zero rate")
        values = weighted_ber_batch(cands, profile.snr)
    elif objective == "peak_power":
        if gaps is None or spec is None:
            raise ValueError("peak_power objective needs gaps and spec")
        values = peak_power_batch(cands, gaps, spec)
    else:
        raise ValueError(f"objective must be one of {OBJECTIVES}")
    best = values.min()
    winners = cands[values == best]
    return OracleResult(
        best_value=float(best),
        argmins=frozenset(c.allocation(w) for w in winners),
        explored=int(cands.shape[0]),
    )
