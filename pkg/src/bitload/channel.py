"""Subchannel SNR profiles.

A profile is built from explicit per-channel data, from a Rayleigh draw
normalized to a PSDNR, or from a multipath (power-line) frequency response.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

__all__ = [
    "RNG_ALGORITHM",
    "ChannelSpec",
    "SnrProfile",
    "snr_profile",
    "psdnr_db",
    "rayleigh_profile",
    "multipath_profile",
    "target_bitrate",
    "profile_from_config",
    "load_plc_config",
]

# uniform doubles from PCG64, exponential by inverse CDF -log(1 - u)
RNG_ALGORITHM = "numpy.PCG64/random_raw>>11*2^-53/exp-inverse-cdf"


def _as_vector(values, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class ChannelSpec:
    gains: np.ndarray
    noise_vars: np.ndarray
    peak_power: float
    power_fractions: np.ndarray

    def __post_init__(self):
        gains = _as_vector(self.gains, "gains")
        noise = _as_vector(self.noise_vars, "noise_vars")
        fractions = _as_vector(self.power_fractions, "power_fractions")
        if not (gains.size == noise.size == fractions.size):
            raise ValueError(
                f"dimension mismatch: {gains.size} gains, {noise.size} noise "
                f"variances, {fractions.size} power fractions"
            )
        if np.any(gains < 0):
            raise ValueError("channel power gains must be non-negative")
        if np.any(noise <= 0):
            raise ValueError("noise variances must be positive")
        if np.any((fractions < 0) | (fractions > 1)):
            raise ValueError("power fractions must lie in [0, 1]")
        if not self.peak_power > 0:
            raise ValueError("peak power must be positive")
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "noise_vars", noise)
        object.__setattr__(self, "power_fractions", fractions)
        object.__setattr__(self, "peak_power", float(self.peak_power))

    @classmethod
    def full_power(cls, gains, noise_vars, peak_power) -> "ChannelSpec":
        gains = np.asarray(gains, dtype=float)
        return cls(gains, noise_vars, peak_power, np.ones(gains.shape))

    @property
    def n(self) -> int:
        return self.gains.size


@dataclass(frozen=True)
class SnrProfile:
    """Linear post-power SNR per subchannel, with free-form provenance."""

    snr: np.ndarray
    meta: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        snr = _as_vector(self.snr, "snr")
        if np.any(snr < 0):
            raise ValueError("SNR values must be non-negative")
        if not np.any(snr > 0):
            raise ValueError("at least one subchannel needs a positive SNR")
        snr.setflags(write=False)
        object.__setattr__(self, "snr", snr)

    @property
    def n(self) -> int:
        return self.snr.size

    def psdnr_db(self) -> float:
        """Mean SNR in dB; equals the PSDNR when every channel runs at full power."""
        return float(10.0 * np.log10(np.mean(self.snr)))

    def scaled_to(self, psdnr_db_value: float) -> "SnrProfile":
        """Same shape, rescaled so the mean SNR equals ``psdnr_db_value``."""
        factor = 10.0 ** (psdnr_db_value / 10.0) / np.mean(self.snr)
        meta = dict(self.meta)
        meta["psdnr_db"] = float(psdnr_db_value)
        return SnrProfile(self.snr * factor, meta)


def snr_profile(spec: ChannelSpec) -> SnrProfile:
    snr = spec.gains * spec.power_fractions * spec.peak_power / spec.noise_vars
    return SnrProfile(snr, {"source": "explicit"})


def psdnr_db(spec: ChannelSpec) -> float:
    """Mean of |h|^2 P / sigma^2 in dB; power fractions play no part."""
    return float(10.0 * np.log10(np.mean(spec.gains * spec.peak_power / spec.noise_vars)))


def _uniform(seed: int, n: int) -> np.ndarray:
    bitgen = np.random.PCG64(seed)
    raw = bitgen.random_raw(n)
    return (raw >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def rayleigh_profile(n: int, psdnr_db: float, seed: int) -> SnrProfile:
    """Rayleigh-faded profile whose sample mean SNR is exactly the PSDNR.

    Channel power gains are unit-mean exponential (squared Rayleigh
    amplitudes).  The draw is rescaled by its own sample mean, so the
    realized PSDNR does not depend on the seed.
    """
    if n < 1:
        raise ValueError("need at least one subchannel")
    u = _uniform(seed, n)
    gains = -np.log1p(-u)
    # u == 0 gives a zero gain; keep it, SnrProfile only requires one positive entry
    snr = gains / np.mean(gains) * 10.0 ** (psdnr_db / 10.0)
    return SnrProfile(
        snr,
        {"source": "rayleigh", "n": n, "psdnr_db": float(psdnr_db), "seed": int(seed),
         "rng": RNG_ALGORITHM},
    )


def frequency_response(paths: Sequence[Mapping[str, float]], freqs, *, a0=0.0, a1=0.0,
                       k=1.0, v=1.5e8) -> np.ndarray:
    """Complex response sum_p g_p exp(-(a0 + a1 f^k) d_p) exp(-j 2 pi f d_p / v).

    A path may override ``a0``, ``a1`` and ``k``.
    """
    if not paths:
        raise ValueError("multipath model needs at least one path")
    f = _as_vector(freqs, "freqs")
    if f.size > 1 and np.any(np.diff(f) <= 0):
        raise ValueError("frequencies must be strictly increasing")
    h = np.zeros(f.shape, dtype=complex)
    for p in paths:
        d = float(p["delay_m"])
        pa0 = float(p.get("a0", a0))
        pa1 = float(p.get("a1", a1))
        pk = float(p.get("k", k))
        h += float(p["gain"]) * np.exp(-(pa0 + pa1 * f**pk) * d) * np.exp(-2j * np.pi * f * d / v)
    return h


def multipath_profile(paths, freqs, noise_psd: float, peak_power: float, *, a0=0.0,
                      a1=0.0, k=1.0, v=1.5e8) -> SnrProfile:
    """One subchannel per frequency, snr = |H(f)|^2 P / noise_psd."""
    if not noise_psd > 0 or not peak_power > 0:
        raise ValueError("noise PSD and peak power must be positive")
    h = frequency_response(paths, freqs, a0=a0, a1=a1, k=k, v=v)
    snr = np.abs(h) ** 2 * peak_power / noise_psd
    return SnrProfile(snr, {"source": "multipath", "paths": len(paths)})


def target_bitrate(profile: SnrProfile, r_max: int) -> int:
    """floor(sum_i min(log2(1 + snr_i/2), r_max)): a rate that keeps every channel reliable."""
    if r_max < 1:
        raise ValueError("r_max must be at least 1")
    per_channel = np.minimum(np.log2(1.0 + profile.snr / 2.0), r_max)
    return int(np.floor(np.sum(per_channel)))


def load_plc_config(path: str | Path | None = None) -> dict:
    """Load a multipath config; without a path, the bundled 15-path PLC channel."""
    if path is None:
        text = resources.files("bitload").joinpath("data/plc15.json").read_text()
    else:
        text = Path(path).read_text()
    return json.loads(text)


def _freq_grid(cfg: Mapping[str, Any]) -> np.ndarray:
    if "freqs_hz" in cfg:
        return np.asarray(cfg["freqs_hz"], dtype=float)
    n = int(cfg["n_freqs"])
    # n subcarriers centred in n equal bins over [f_start, f_stop]
    start, stop = float(cfg["f_start_hz"]), float(cfg["f_stop_hz"])
    step = (stop - start) / n
    return start + step * (np.arange(n) + 0.5)


def profile_from_config(cfg: Mapping[str, Any], *, seed: int | None = None) -> SnrProfile:
    """Build a profile from a channel config dict (``type``: explicit|rayleigh|multipath).

    A top-level ``psdnr_db`` on explicit or multipath configs rescales the
    profile's mean SNR.  ``seed`` overrides the config seed for rayleigh.
    """
    kind = cfg.get("type")
    if kind == "explicit":
        if "snr" in cfg or "snr_db" in cfg:
            snr = (np.asarray(cfg["snr"], dtype=float) if "snr" in cfg
                   else 10.0 ** (np.asarray(cfg["snr_db"], dtype=float) / 10.0))
            profile = SnrProfile(snr, {"source": "explicit"})
        else:
            gains = cfg["gains"]
            spec = ChannelSpec(
                gains,
                cfg["noise_vars"],
                cfg.get("peak_power", 1.0),
                cfg.get("power_fractions", [1.0] * len(gains)),
            )
            profile = snr_profile(spec)
    elif kind == "rayleigh":
        return rayleigh_profile(
            int(cfg["n"]),
            float(cfg["psdnr_db"]),
            int(seed if seed is not None else cfg.get("seed", 0)),
        )
    elif kind == "multipath":
        if "paths" not in cfg:
            cfg = {**load_plc_config(cfg.get("file")), **cfg}
        profile = multipath_profile(
            cfg["paths"],
            _freq_grid(cfg),
            float(cfg.get("noise_psd", 1.0)),
            float(cfg.get("peak_power", 1.0)),
            a0=float(cfg.get("a0", 0.0)),
            a1=float(cfg.get("a1", 0.0)),
            k=float(cfg.get("k", 1.0)),
            v=float(cfg.get("v", 1.5e8)),
        )
    else:
        raise ValueError(f"unknown channel type {kind!r}")
    if "psdnr_db" in cfg:
        profile = profile.scaled_to(float(cfg["psdnr_db"]))
    return profile
