import numpy as np
import pytest

from bitload.channel import SnrProfile


def random_small_instance(rng: np.random.Generator, beta=None):
    """n in [2,5], r_max <= 4, SNRs 0..45 dB, any feasible R."""
    n = int(rng.integers(2, 6))
    beta = int(beta if beta is not None else rng.choice([1, 2]))
    r_max = int(rng.choice([b for b in (2, 4) if b % beta == 0] if beta == 2 else [2, 3, 4]))
    snr = 10.0 ** (rng.uniform(0.0, 45.0, n) / 10.0)
    R = int(rng.integers(1, n * r_max // beta + 1)) * beta
    return SnrProfile(snr), R, beta, r_max


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record the outcome of a numbered acceptance criterion for the end-of-run table."""

    def record(number: int, ok: bool, detail: str = "") -> bool:
        _CRITERIA[number] = (bool(ok), detail)
        print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
