"""Integer completion of a continuous allocation.

Channels the continuous solution clipped to 0 or to the cap keep those
values.  Interior channels get floor(r_i / beta + alpha) * beta bits, with
a single offset ``alpha`` in [0, 1] chosen so that the total hits the rate
target (root of a staircase), or are floored and topped up greedily.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import ContinuousSolution
from .channel import SnrProfile
from .greedy import Constraints, greedy_ber, greedy_margin
from .metrics import Allocation

__all__ = [
    "CompletionReport",
    "staircase_rate",
    "complete_by_root",
    "complete_by_greedy",
]

# bracket width below which the staircase is treated as a single jump
ALPHA_TOL = 1e-12


@dataclass(frozen=True)
class CompletionReport:
    method: str
    iterations: int
    alpha: float | None = None
    post_fix_moves: int = 0
    residual_bits: int = 0


def _floor_units(rates, beta, alpha):
    # small slack so rates that are integers up to rounding floor to themselves
    return np.floor(np.asarray(rates, dtype=float) / beta + alpha + 1e-9).astype(np.int64)


def staircase_rate(alpha: float, interior_rates, beta: int = 1) -> int:
    """sum_i beta * floor(r_i / beta + alpha)."""
    return int(beta * _floor_units(interior_rates, beta, alpha).sum())


def _split(sol: ContinuousSolution, c: Constraints):
    rates = np.asarray(sol.rates, dtype=float)
    interior = np.zeros(rates.size, dtype=bool)
    interior[list(sol.interior_set)] = True
    base = np.where(rates >= c.cap, c.cap, 0).astype(np.int64)
    base[interior] = 0
    target = c.target_rate - int(base.sum())
    return rates, interior, base, target


def complete_by_root(sol: ContinuousSolution, c: Constraints,
                     method: str = "secant", max_iter: int = 200) -> tuple[Allocation, CompletionReport]:
    """Search alpha on the staircase g(alpha) - R' with alpha1 = 0, alpha2 = 1.

    ``method`` is ``bisection`` or ``secant`` (false position; falls back to
    a midpoint when the iterate leaves the bracket).  When equal fractional
    parts make the staircase jump over the target, the allocation at the
    lower end of the final bracket is topped up one beta step at a time on
    the channels with the largest fractional parts (lowest index first).
    """
    if method not in ("bisection", "secant"):
        raise ValueError(f"method must be 'bisection' or 'secant', not {method!r}")
    beta = c.granularity
    rates, interior, base, target = _split(sol, c)
    r_int = rates[interior]

    def g(alpha):
        return staircase_rate(alpha, r_int, beta) - target

    a1, a2 = 0.0, 1.0
    g1, g2 = g(a1), g(a2)
    alpha = a1
    iterations = 0
    if g1 == 0:
        alpha = a1
    else:
        while iterations < max_iter and a2 - a1 > ALPHA_TOL:
            iterations += 1
            if method == "secant":
                a0 = a1 - g1 * (a2 - a1) / (g2 - g1)
                if not a1 < a0 < a2:
                    a0 = 0.5 * (a1 + a2)
            else:
                a0 = 0.5 * (a1 + a2)
            g0 = g(a0)
            if g0 == 0:
                alpha = a0
                break
            if g0 < 0:
                a1, g1 = a0, g0
            else:
                a2, g2 = a0, g0
        else:
            alpha = a1

    units = np.minimum(_floor_units(r_int, beta, alpha), c.cap // beta)
    bits = base.copy()
    bits[interior] = units * beta
    moves = 0
    short = c.target_rate - int(bits.sum())
    if short:
        # top up channels still at their floor, largest fractional part first
        frac = r_int / beta - np.floor(r_int / beta + 1e-9)
        floor_units = _floor_units(r_int, beta, 0.0)
        idx = np.flatnonzero(interior)
        order = [k for k in sorted(range(r_int.size), key=lambda k: (-frac[k], idx[k]))
                 if units[k] == floor_units[k]]
        for k in order[: short // beta]:
            bits[idx[k]] += beta
            moves += 1
        if int(bits.sum()) != c.target_rate:
            raise RuntimeError("post-fix could not reach the target rate")
    return c.allocation(bits), CompletionReport(method, iterations, float(alpha), moves)


def complete_by_greedy(sol: ContinuousSolution, c: Constraints, profile: SnrProfile,
                       objective: str = "margin") -> tuple[Allocation, CompletionReport]:
    """Floor the interior rates to beta multiples and add the rest greedily.

    ``iterations`` counts greedy steps (beta bits each); ``residual_bits``
    is the number of bits the greedy had to place, i.e. |g(0)|.
    """
    beta = c.granularity
    rates, interior, base, _ = _split(sol, c)
    start = base.copy()
    start[interior] = _floor_units(rates[interior], beta, 0.0) * beta
    residual = c.target_rate - int(start.sum())
    if objective == "margin":
        alloc, trace = greedy_margin(profile, c, "add", start=start)
    elif objective == "ber":
        alloc, trace = greedy_ber(profile, c, start=start)
    else:
        raise ValueError(f"objective must be 'margin' or 'ber', not {objective!r}")
    return alloc, CompletionReport(f"greedy_{objective}", len(trace), None, 0, residual)
