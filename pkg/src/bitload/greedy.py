"""Greedy (Fox-type) bit loading.

Each step moves ``beta`` bits on the single subchannel that is best for the
objective.  Ties go to the lowest channel index.  Channels at the cap drop
out of the candidate set.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .ber import in_convex_domain, qam_ber
from .channel import ChannelSpec, SnrProfile
from .metrics import Allocation

__all__ = [
    "Constraints",
    "GreedyTrace",
    "greedy_margin",
    "greedy_ber",
    "greedy_min_peak_power",
    "ber_cost_table",
]


@dataclass(frozen=True)
class Constraints:
    target_rate: int
    granularity: int = 1
    cap: int = 15

    def __post_init__(self):
        for name in ("target_rate", "granularity", "cap"):
            value = getattr(self, name)
            if int(value) != value:
                raise ValueError(f"{name} must be an integer")
            object.__setattr__(self, name, int(value))
        if self.granularity < 1:
            raise ValueError("granularity must be at least 1")
        if self.cap < self.granularity or self.cap % self.granularity:
            raise ValueError("cap must be a positive multiple of the granularity")
        if self.target_rate < 0 or self.target_rate % self.granularity:
            raise ValueError("target rate must be a non-negative multiple of the granularity")

    def check(self, n: int) -> None:
        if self.target_rate > n * self.cap:
            raise ValueError(
                f"target rate {self.target_rate} exceeds n*cap = {n * self.cap}"
            )

    def allocation(self, bits) -> Allocation:
        return Allocation(np.asarray(bits), self.granularity, self.cap)


@dataclass
class GreedyTrace:
    """Channels touched at each step, with the metric that selected them.

    ``step`` is +beta for bit addition and -beta for bit removal.
    ``certified`` is set by the BER greedy: True when every channel level the
    trace passes through stays in the convex BER domain.
    """

    start: np.ndarray
    step: int
    channels: list = field(default_factory=list)
    metrics: list = field(default_factory=list)
    certified: bool | None = None

    def __len__(self):
        return len(self.channels)

    def states(self) -> Iterator[np.ndarray]:
        """Yield the allocation before the first step and after every step."""
        bits = np.array(self.start, dtype=np.int64)
        yield bits.copy()
        for ch in self.channels:
            bits[ch] += self.step
            yield bits.copy()


def _start(n, c: Constraints, start, fill):
    if start is None:
        return np.full(n, fill, dtype=np.int64)
    bits = np.array(start.bits if isinstance(start, Allocation) else start, dtype=np.int64)
    if bits.shape != (n,):
        raise ValueError("start allocation has the wrong length")
    c.allocation(bits)
    return bits


def _run_add(bits, c: Constraints, cost: Callable[[int, int], float], trace: GreedyTrace):
    beta, cap = c.granularity, c.cap
    remaining = c.target_rate - int(bits.sum())
    if remaining < 0:
        raise ValueError("start allocation already exceeds the target rate")
    heap = [(cost(i, int(r)), i) for i, r in enumerate(bits) if r < cap]
    heapq.heapify(heap)
    for _ in range(remaining // beta):
        if not heap:
            raise ValueError("every channel is at the cap before the target rate")
        value, i = heapq.heappop(heap)
        if value == float("inf"):
            raise ValueError("target rate needs bits on zero-SNR channels")
        bits[i] += beta
        trace.channels.append(i)
        trace.metrics.append(value)
        if bits[i] < cap:
            heapq.heappush(heap, (cost(i, int(bits[i])), i))
    return bits


def _margin_cost(snr: np.ndarray, beta: int):
    def cost(i, r):
        if snr[i] == 0:
            return float("inf")
        return float(2 ** (r + beta) - 1) / snr[i]

    return cost


def greedy_margin(profile: SnrProfile, c: Constraints, direction: str = "add", *,
                  start=None) -> tuple[Allocation, GreedyTrace]:
    """Maximize the system margin (minimize max_i (2**r_i - 1)/snr_i).

    ``add`` starts from ``start`` (default empty) and adds bits where
    (2**(r+beta) - 1)/snr is smallest.  ``remove`` starts from ``start``
    (default every channel at the cap) and strips bits where
    (2**r - 1)/snr is largest.
    """
    snr = profile.snr
    n = snr.size
    c.check(n)
    beta = c.granularity
    if direction == "add":
        bits = _start(n, c, start, 0)
        trace = GreedyTrace(bits.copy(), beta)
        bits = _run_add(bits, c, _margin_cost(snr, beta), trace)
    elif direction == "remove":
        bits = _start(n, c, start, c.cap)
        trace = GreedyTrace(bits.copy(), -beta)
        excess = int(bits.sum()) - c.target_rate
        if excess < 0:
            raise ValueError("start allocation is below the target rate")

        def key(i, r):
            if snr[i] == 0:
                return (-float("inf"), i)
            return (-(float(2**r - 1) / snr[i]), i)

        heap = [key(i, int(r)) for i, r in enumerate(bits) if r > 0]
        heapq.heapify(heap)
        for _ in range(excess // beta):
            neg, i = heapq.heappop(heap)
            bits[i] -= beta
            trace.channels.append(i)
            trace.metrics.append(-neg)
            if bits[i] > 0:
                heapq.heappush(heap, key(i, int(bits[i])))
    else:
        raise ValueError(f"direction must be 'add' or 'remove', not {direction!r}")
    return c.allocation(bits), trace


def ber_cost_table(snr: np.ndarray, c: Constraints) -> np.ndarray:
    """table[i, k] = r ber_i(r) with r = k*beta, k = 0..cap/beta (r = 0 gives 0)."""
    levels = np.arange(c.granularity, c.cap + 1, c.granularity)
    table = np.zeros((snr.size, levels.size + 1))
    table[:, 1:] = levels * qam_ber(levels[None, :], snr[:, None])
    return table


def greedy_ber(profile: SnrProfile, c: Constraints, metric: str = "delta", *,
               start=None) -> tuple[Allocation, GreedyTrace]:
    """Minimize the weighted-mean BER.

    ``delta`` adds bits where (r+beta) ber(r+beta) - r ber(r) is smallest,
    which is the exact marginal increase of the summed bit errors.
    ``simplified`` drops the second term, which is equivalent at high SNR.
    """
    if metric not in ("delta", "simplified"):
        raise ValueError(f"metric must be 'delta' or 'simplified', not {metric!r}")
    snr = profile.snr
    n = snr.size
    c.check(n)
    beta = c.granularity
    table = ber_cost_table(snr, c)

    if metric == "delta":
        def cost(i, r):
            k = r // beta
            return float(table[i, k + 1] - table[i, k])
    else:
        def cost(i, r):
            return float(table[i, r // beta + 1])

    bits = _start(n, c, start, 0)
    trace = GreedyTrace(bits.copy(), beta)
    bits = _run_add(bits, c, cost, trace)
    # every (channel, level) the trace passed through, including the start
    start = trace.start
    visited = [(i, int(r)) for i, r in enumerate(start) if r > 0]
    level = start.copy()
    for ch in trace.channels:
        level[ch] += beta
        visited.append((ch, int(level[ch])))
    if visited:
        idx, lev = np.array(visited).T
        trace.certified = bool(np.all(in_convex_domain(lev, snr[idx])))
    else:
        trace.certified = True
    return c.allocation(bits), trace


def greedy_min_peak_power(gap_targets, spec: ChannelSpec, c: Constraints) -> Allocation:
    """Minimize the peak power fraction under per-channel SNR-gap targets.

    The power channel i needs for r bits is
    (2**r - 1) gamma_i sigma_i^2 / (|h_i|^2 P); each step loads the channel
    whose next power requirement is smallest.  ``spec.power_fractions`` is
    ignored.
    """
    gaps = np.asarray(gap_targets, dtype=float)
    if gaps.shape != (spec.n,) or np.any(gaps <= 0):
        raise ValueError("need one positive SNR-gap target per channel")
    c.check(spec.n)
    beta = c.granularity
    with np.errstate(divide="ignore"):
        scale = gaps * spec.noise_vars / (spec.gains * spec.peak_power)

    def cost(i, r):
        return float(2 ** (r + beta) - 1) * scale[i]

    bits = np.zeros(spec.n, dtype=np.int64)
    _run_add(bits, c, cost, GreedyTrace(bits.copy(), beta))
    return c.allocation(bits)
