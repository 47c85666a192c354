"""Robustness measures of a bit allocation and the dissimilarity between two.

The ``*_batch`` helpers evaluate objectives over an array of allocations
(last axis = subchannel); the scalar functions and the exhaustive oracle
both go through them, so every objective has a single definition.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ber import VALID_BER, qam_ber
from .channel import ChannelSpec, SnrProfile

__all__ = [
    "Allocation",
    "RobustnessReport",
    "inverse_margin_batch",
    "weighted_ber_batch",
    "peak_power_batch",
    "inverse_margin",
    "system_margin",
    "weighted_ber",
    "peak_power",
    "dissimilarity",
    "robustness_report",
]


@dataclass(frozen=True)
class Allocation:
    """Integer bits per subchannel, each a multiple of ``granularity`` and at most ``cap``."""

    bits: np.ndarray
    granularity: int = 1
    cap: int = 15

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 1:
            raise ValueError("an allocation is a 1-D bit vector")
        if bits.size and not np.all(np.equal(np.mod(bits, 1), 0)):
            raise ValueError("bit counts must be integers")
        bits = bits.astype(np.int64)
        if np.any(bits < 0) or np.any(bits > self.cap):
            raise ValueError(f"bit counts must lie in [0, {self.cap}]")
        if self.granularity < 1 or np.any(bits % self.granularity):
            raise ValueError(f"bit counts must be multiples of {self.granularity}")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @property
    def total(self) -> int:
        return int(self.bits.sum())

    def __len__(self):
        return self.bits.size

    def __eq__(self, other):
        if not isinstance(other, Allocation):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash(self.bits.tobytes())

    def tolist(self) -> list[int]:
        return [int(b) for b in self.bits]


def _bits(alloc) -> np.ndarray:
    return alloc.bits if isinstance(alloc, Allocation) else np.asarray(alloc, dtype=np.int64)


def _snr(profile) -> np.ndarray:
    return profile.snr if isinstance(profile, SnrProfile) else np.asarray(profile, dtype=float)


def inverse_margin_batch(bits, snr) -> np.ndarray:
    """max over loaded channels of (2**r - 1) / snr; unloaded channels contribute 0."""
    bits = np.asarray(bits)
    snr = np.asarray(snr, dtype=float)
    cost = np.exp2(bits) - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(bits > 0, cost / snr, 0.0)
    return inv.max(axis=-1)


def _ber_terms(bits, snr) -> np.ndarray:
    bits = np.asarray(bits)
    loaded = bits > 0
    safe = np.where(loaded, bits, 1)
    return np.where(loaded, bits * qam_ber(safe, np.broadcast_to(snr, bits.shape)), 0.0)


def weighted_ber_batch(bits, snr) -> np.ndarray:
    """sum_i r_i ber_i(r_i) / sum_i r_i over the last axis."""
    bits = np.asarray(bits)
    return _ber_terms(bits, snr).sum(axis=-1) / bits.sum(axis=-1)


def peak_power_batch(bits, gap_targets, spec: ChannelSpec) -> np.ndarray:
    """max_i (2**r_i - 1) gamma_i sigma_i^2 / (|h_i|^2 P): the peak power fraction needed."""
    bits = np.asarray(bits)
    scale = np.asarray(gap_targets, dtype=float) * spec.noise_vars / (spec.gains * spec.peak_power)
    with np.errstate(invalid="ignore"):
        power = np.where(bits > 0, (np.exp2(bits) - 1.0) * scale, 0.0)
    return power.max(axis=-1)


def _require_loaded(bits):
    if not np.any(bits > 0):
        raise ValueError("allocation carries no bits")


def inverse_margin(alloc, profile) -> float:
    bits = _bits(alloc)
    _require_loaded(bits)
    return float(inverse_margin_batch(bits, _snr(profile)))


def system_margin(alloc, profile) -> float:
    """Minimum SNR-gap over loaded channels, in dB."""
    return float(-10.0 * np.log10(inverse_margin(alloc, profile)))


def weighted_ber(alloc, profile) -> float:
    bits = _bits(alloc)
    _require_loaded(bits)
    return float(weighted_ber_batch(bits, _snr(profile)))


def peak_power(alloc, gap_targets, spec: ChannelSpec) -> float:
    return float(peak_power_batch(_bits(alloc), gap_targets, spec))


def dissimilarity(x, y) -> float:
    """Fraction of subchannels whose loads differ, relative to the larger loaded count.

    Undefined (ValueError) when both allocations are empty.
    """
    a, b = _bits(x), _bits(y)
    if a.shape != b.shape:
        raise ValueError("allocations have different lengths")
    loaded = max(np.count_nonzero(a), np.count_nonzero(b))
    if loaded == 0:
        raise ValueError("dissimilarity is undefined for two empty allocations")
    return np.count_nonzero(a != b) / loaded


@dataclass(frozen=True)
class RobustnessReport:
    system_margin_db: float
    weighted_ber: float
    per_channel_gap: tuple
    per_channel_ber: tuple
    validity_flag: bool

    def to_json(self) -> dict:
        def db(g):
            return None if g is None else float(10.0 * np.log10(g)) if g > 0 else None

        return {
            "system_margin_db": self.system_margin_db,
            "weighted_ber": self.weighted_ber,
            "per_channel_gap_db": [db(g) for g in self.per_channel_gap],
            "per_channel_ber": list(self.per_channel_ber),
            "validity_flag": self.validity_flag,
        }


def robustness_report(alloc, profile) -> RobustnessReport:
    """Margin, weighted BER and per-channel detail; unloaded channels get gap None, BER 0."""
    bits = _bits(alloc)
    snr = _snr(profile)
    _require_loaded(bits)
    loaded = bits > 0
    safe = np.where(loaded, bits, 1)
    gaps = snr / (np.exp2(safe) - 1.0)
    bers = np.where(loaded, qam_ber(safe, snr), 0.0)
    return RobustnessReport(
        system_margin_db=system_margin(bits, snr),
        weighted_ber=weighted_ber(bits, snr),
        per_channel_gap=tuple(float(g) if l else None for g, l in zip(gaps, loaded)),
        per_channel_ber=tuple(float(b) for b in bers),
        validity_flag=bool(np.all(bers[loaded] <= VALID_BER)),
    )
