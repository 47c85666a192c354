"""QAM bit error rate model.

The BER of a Gray-mapped rectangular QAM carrying ``r`` bits is approximated
by the leading term of its exact closed form::

    ber(r, snr) = (1/r) (2 - 1/I - 1/J) erfc( sqrt(3 snr / (I^2 + J^2 - 2)) )

with ``I = 2**floor(r/2)`` and ``J = 2**ceil(r/2)``.  For r = 1 (BPSK) and
r = 2 (4-QAM) this is the exact Gray BER.

``erfc`` is computed here rather than taken from libm so that results are
identical on every platform.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CONVEX_BER",
    "VALID_BER",
    "QamShape",
    "erfc",
    "qam_ber",
    "qam_ber_from_gap",
    "snr_gap",
    "in_convex_domain",
]

# r*ber(r) is a convex sequence below this per-channel BER
CONVEX_BER = 2e-2
# the leading-term approximation is within 1 % of the exact BER below this
VALID_BER = 5e-2

_SQRT_PI = 1.7724538509055160273
_SERIES_CUTOFF = 2.0
_SERIES_TERMS = 48
_CF_DEPTH = 160


def _erf_series(x):
    # erf(x) = 2/sqrt(pi) * x * exp(-x^2) * sum_k (2x^2)^k / (2k+1)!!
    # all terms positive, so no cancellation for |x| <= 2
    x2 = x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, _SERIES_TERMS):
        term = term * (2.0 * x2) / (2 * k + 1)
        total = total + term
    return 2.0 / _SQRT_PI * x * np.exp(-x2) * total


def _erfc_cf(x):
    # Laplace continued fraction, evaluated bottom-up:
    # erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    tail = np.zeros_like(x)
    for k in range(_CF_DEPTH, 0, -1):
        tail = (0.5 * k) / (x + tail)
    with np.errstate(under="ignore"):
        return np.exp(-x * x) / _SQRT_PI / (x + tail)


def erfc(x):
    """Complementary error function.

    Power series for erf below |x| = 2, Laplace continued fraction above.
    Relative error is below 1e-13 for |x| <= 10 (checked against a
    40-digit reference); for x > 27 the result underflows to 0, which is
    within 1e-300 of the true value.

    Accepts scalars or arrays; returns a float for scalar input.
    """
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    ax = np.abs(xa)
    out = np.empty_like(ax)

    small = ax < _SERIES_CUTOFF
    if small.any():
        out[small] = 1.0 - _erf_series(ax[small])
    big = ~small
    if big.any():
        out[big] = _erfc_cf(ax[big])

    neg = xa < 0
    out[neg] = 2.0 - out[neg]
    out[np.isnan(xa)] = np.nan
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class QamShape:
    """Side lengths of the rectangular QAM carrying ``r`` bits (I <= J)."""

    r: int

    def __post_init__(self):
        if int(self.r) != self.r or self.r < 1:
            raise ValueError(f"QAM needs a positive integer bit count, got {self.r!r}")

    @property
    def i_side(self) -> int:
        return 2 ** (self.r // 2)

    @property
    def j_side(self) -> int:
        return 2 ** ((self.r + 1) // 2)


def _sides(r):
    r = np.asarray(r)
    if np.any(r < 1):
        raise ValueError("QAM BER is undefined for r < 1")
    i_side = np.exp2(r // 2)
    j_side = np.exp2((r + 1) // 2)
    return i_side, j_side


def _coefficient(r, i_side, j_side):
    return (2.0 - 1.0 / i_side - 1.0 / j_side) / r


def qam_ber(r, snr):
    """BER of Gray-mapped QAM with ``r`` bits per symbol at linear ``snr``.

    Broadcasts over ``r`` and ``snr``.
    """
    r_arr = np.asarray(r)
    i_side, j_side = _sides(r_arr)
    # 3/(I^2+J^2-2) is 1 and 1/2 for r = 1, 2, so those closed forms stay exact
    arg = np.sqrt(np.asarray(snr, dtype=float) * (3.0 / (i_side**2 + j_side**2 - 2.0)))
    out = _coefficient(r_arr, i_side, j_side) * erfc(arg)
    return float(out) if np.ndim(out) == 0 else out


def qam_ber_from_gap(r, gamma):
    """Same BER written as a function of the SNR-gap ``gamma = snr / (2**r - 1)``."""
    r_arr = np.asarray(r)
    i_side, j_side = _sides(r_arr)
    arg = np.sqrt(
        3.0 * (i_side * j_side - 1.0) * np.asarray(gamma, dtype=float)
        / (i_side**2 + j_side**2 - 2.0)
    )
    out = _coefficient(r_arr, i_side, j_side) * erfc(arg)
    return float(out) if np.ndim(out) == 0 else out


def snr_gap(r, snr):
    """SNR-gap of a channel at ``snr`` carrying ``r >= 1`` bits."""
    r_arr = np.asarray(r)
    if np.any(r_arr < 1):
        raise ValueError("SNR-gap is undefined for r < 1")
    out = np.asarray(snr, dtype=float) / (np.exp2(r_arr) - 1.0)
    return float(out) if np.ndim(out) == 0 else out


def in_convex_domain(r, snr):
    """True where ``qam_ber(r, snr) <= CONVEX_BER``."""
    out = np.asarray(qam_ber(r, snr)) <= CONVEX_BER
    return bool(out) if out.ndim == 0 else out
