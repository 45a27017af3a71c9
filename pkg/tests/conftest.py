import numpy as np
import pytest

from carlbell.domain import CetPoint, Window


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def draw_window(rng, unit_prob=0.25):
    if rng.random() < unit_prob:
        return Window(0.0, 1.0)
    m = float(rng.uniform(0.0, 2.0))
    return Window(m, m + float(rng.uniform(0.2, 3.0)))


def draw_point(rng, w, s_lo=0.0, s_hi=1.0, e_lo=0.0, e_hi=1.0, radius=2.0, p=2.0):
    """Point with s = |x1|^p/x2 uniform in [s_lo, s_hi] and x3 uniform in the window."""
    s = float(rng.uniform(s_lo, s_hi))
    x2 = float(rng.uniform(0.05, radius))
    x1 = (s * x2) ** (1.0 / p) * (1.0 if rng.random() < 0.5 else -1.0)
    x3 = w.m + w.width * float(rng.uniform(e_lo, e_hi))
    return CetPoint(x1, x2, x3)
