import numpy as np
import pytest


def sine(freq: float, sample_rate: int, seconds: float = 1.0, amp: float = 0.5) -> np.ndarray:
    t = np.arange(round(seconds * sample_rate)) / sample_rate
    return amp * np.sin(2.0 * np.pi * freq * t)


@pytest.fixture
def rng():
    return np.random.default_rng(2026)
