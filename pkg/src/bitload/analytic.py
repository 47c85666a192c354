"""Continuous (Lagrangian) bit allocation under 0 <= r_i <= r_max.

For both objectives the stationarity condition reduces asymptotically to
lambda = 2**r_i / snr_i, so the rate of channel i at multiplier lambda is
log2(lambda snr_i) clipped to [0, r_max].  The multiplier is found with a
secant search carried out in log2(lambda) coordinates; the interior rates
are then recomputed exactly from the closed form on the interior set.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channel import SnrProfile
from .greedy import Constraints

__all__ = [
    "ContinuousSolution",
    "asymptotic_rates",
    "clipped_rates",
    "generalized_secant",
    "solve_continuous",
]

log = logging.getLogger(__name__)

SHAPES = {
    "log2": (np.log2, np.exp2),
    "identity": (lambda x: x, lambda u: u),
}


def asymptotic_rates(profile, R: float) -> np.ndarray:
    """r_i = R/n + (1/n) sum_j log2(snr_i / snr_j); unconstrained, may be negative."""
    snr = profile.snr if isinstance(profile, SnrProfile) else np.asarray(profile, dtype=float)
    if np.any(snr <= 0):
        raise ValueError("asymptotic rates need every SNR to be positive")
    logs = np.log2(snr)
    return R / snr.size + (logs - math.fsum(logs) / snr.size)


def clipped_rates(lam: float, profile, r_max: float) -> np.ndarray:
    """clip(log2(lam * snr_i), 0, r_max); zero-SNR channels get 0."""
    if not lam > 0:
        raise ValueError("multiplier must be positive")
    snr = profile.snr if isinstance(profile, SnrProfile) else np.asarray(profile, dtype=float)
    with np.errstate(divide="ignore"):
        raw = np.log2(lam) + np.log2(snr)
    return np.clip(raw, 0.0, r_max)


def generalized_secant(f: Callable[[float], float], x1: float, x2: float, *,
                       h: Callable | str = "log2", h_inv: Callable | None = None,
                       eps: float | None = None, ftol: float | None = None,
                       max_iter: int = 100, events: list | None = None) -> tuple[float, int]:
    """Root of a monotone ``f`` bracketed by ``[x1, x2]``.

    Each iterate interpolates linearly between (h(x1), f(x1)) and
    (h(x2), f(x2)) and maps the zero back through ``h_inv``, so the search
    is exact when f is affine in h(x).  ``h="identity"`` gives the ordinary
    secant (regula falsi) method.  The endpoint whose f has the same sign as
    the new value is replaced.

    Stops when f(x0) == 0, when |f(x0)| < ftol, or when two successive
    values differ by at most ``eps``.  If an iterate fails to land strictly
    inside the bracket, or repeats the previous value exactly, the next step
    is a bisection in h-space; each such event is appended to ``events``.

    Returns (root, iterations).
    """
    if isinstance(h, str):
        h, h_inv = SHAPES[h]
    elif h_inv is None:
        raise ValueError("a custom shape function needs its inverse")

    y1, y2 = f(x1), f(x2)
    if y1 == 0:
        return x1, 0
    if y2 == 0:
        return x2, 0
    if np.sign(y1) == np.sign(y2):
        raise ValueError(f"root is not bracketed: f(x1)={y1}, f(x2)={y2}")
    u1, u2 = h(x1), h(x2)
    y_prev = y1
    bisect = False
    for it in range(1, max_iter + 1):
        lo, hi = min(u1, u2), max(u1, u2)
        u0 = None if bisect else (u2 * y1 - u1 * y2) / (y1 - y2)
        if u0 is None or not lo < u0 < hi:
            if events is not None:
                events.append(("bisect", it))
            u0 = 0.5 * (u1 + u2)
        x0 = h_inv(u0)
        y = f(x0)
        if y == 0 or (ftol is not None and abs(y) < ftol):
            return x0, it
        if eps is not None and abs(y - y_prev) <= eps:
            return x0, it
        bisect = y == y_prev
        if np.sign(y) == np.sign(y1):
            u1, y1 = u0, y
        else:
            u2, y2 = u0, y
        y_prev = y
    raise RuntimeError(f"secant search did not converge in {max_iter} iterations")


@dataclass(frozen=True)
class ContinuousSolution:
    rates: np.ndarray
    lam: float
    interior_set: tuple
    interior_rate: float
    iterations: int
    cap: int
    refinements: int = 0
    exact_fallback: bool = False

    @property
    def capped_set(self) -> tuple:
        return tuple(int(i) for i in np.flatnonzero(self.rates >= self.cap))


def _rate_sum(lam, snr, r_max, R):
    return math.fsum(clipped_rates(lam, snr, r_max)) - R


def _exact_level(logs, r_max, R):
    """Root u of sum_i clip(u + logs_i, 0, r_max) = R by breakpoint search."""
    knots = np.unique(np.concatenate([-logs, r_max - logs]))
    totals = np.clip(knots[:, None] + logs[None, :], 0.0, r_max).sum(axis=1)
    k = int(np.searchsorted(totals, R))
    if k == 0:
        return float(knots[0])
    if k == knots.size:
        return float(knots[-1])
    t0, t1 = totals[k - 1], totals[k]
    return float(knots[k - 1] + (R - t0) * (knots[k] - knots[k - 1]) / (t1 - t0))


def _assemble(logs, interior, capped, r_max, share, centre=0.0):
    # interior rate = share + (log2 snr_i - centre); with equal SNRs this is exactly share
    out = np.zeros(logs.size)
    out[capped] = r_max
    out[interior] = share + (logs[interior] - centre)
    return out


def solve_continuous(profile: SnrProfile, c: Constraints, *, shape: str = "log2",
                     max_iter: int = 1000) -> ContinuousSolution:
    """Continuous rates in [0, r_max] summing to R.

    The multiplier search starts from lambda1 = 1/max snr (all rates 0) and
    lambda2 = 2**r_max / min positive snr (all rates at the cap) and stops
    once the rate error is below one bit.  Interior rates are then recomputed
    from the closed form on the interior set; channels the closed form
    pushes out of (0, r_max) are clipped and the interior set is re-solved.
    """
    snr = profile.snr
    n = snr.size
    R, r_max = c.target_rate, c.cap
    if not 0 < R < n * r_max:
        raise ValueError(f"continuous solution needs 0 < R < n*r_max, got R={R}")
    pos = snr > 0
    if R >= r_max * np.count_nonzero(pos):
        raise ValueError("target rate needs bits on zero-SNR channels")

    lam1 = 1.0 / snr.max()
    lam2 = 2.0**r_max / snr[pos].min()
    y1, y2 = _rate_sum(lam1, snr, r_max, R), _rate_sum(lam2, snr, r_max, R)
    assert y1 < 0 < y2, "bracket must straddle the root when 0 < R < n*r_max"

    events: list = []
    lam, iterations = generalized_secant(
        lambda x: _rate_sum(x, snr, r_max, R), lam1, lam2,
        h=shape, ftol=1.0, max_iter=max_iter, events=events,
    )
    if events:
        log.debug("multiplier search fell back to bisection %d time(s)", len(events))

    logs = np.full(n, -np.inf)
    logs[pos] = np.log2(snr[pos])
    rates = clipped_rates(lam, snr, r_max)
    interior = (rates > 0) & (rates < r_max)
    capped = rates >= r_max
    level = math.log2(lam)
    share, centre = level, 0.0
    refinements = 0
    for _ in range(n):
        m = int(interior.sum())
        if m == 0:
            break
        refinements += 1
        budget = R - r_max * int(capped.sum())
        share = budget / m
        ref = logs[interior][0]
        centre = ref + math.fsum(logs[interior] - ref) / m
        level = share - centre
        trial = share + (logs[interior] - centre)
        low, high = trial <= 0, trial >= r_max
        if not (low.any() or high.any()):
            break
        idx = np.flatnonzero(interior)
        interior[idx[low | high]] = False
        capped[idx[high]] = True

    out = _assemble(logs, interior, capped, r_max, share, centre)
    # KKT branch conditions at the refined multiplier, plus the rate budget
    zero = ~interior & ~capped
    consistent = (
        np.all(logs[zero] + level <= 0)
        and np.all(logs[capped] + level >= r_max)
        and np.all((out[interior] > 0) & (out[interior] < r_max))
        and abs(math.fsum(out) - R) <= 1e-9
    )
    exact_fallback = not consistent
    if exact_fallback:
        log.debug("interior refinement inconsistent, solving by breakpoint search")
        level = _exact_level(logs[pos], r_max, R)
        raw = logs + level
        interior = (raw > 0) & (raw < r_max)
        capped = raw >= r_max
        out = _assemble(logs, interior, capped, r_max, level)

    return ContinuousSolution(
        rates=out,
        lam=float(2.0**level),
        interior_set=tuple(int(i) for i in np.flatnonzero(interior)),
        interior_rate=float(R - r_max * int(capped.sum())),
        iterations=iterations,
        cap=r_max,
        refinements=refinements,
        exact_fallback=exact_fallback,
    )
