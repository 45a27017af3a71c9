"""Central finite-difference helpers."""
from __future__ import annotations

from typing import Callable

import numpy as np

REL_STEP = 1e-5


def fd_steps(x: np.ndarray, rel: float = REL_STEP) -> np.ndarray:
    """Per-coordinate step h_i = max(rel, rel*|x_i|)."""
    x = np.asarray(x, dtype=float)
    return np.maximum(rel, rel * np.abs(x))


def central_gradient(f: Callable[[np.ndarray], float], x, steps=None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    h = fd_steps(x) if steps is None else np.asarray(steps, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h[i]
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h[i])
    return g


def jacobian_fd(grad: Callable[[np.ndarray], np.ndarray], x, steps=None, order: int = 2) -> np.ndarray:
    """Symmetrised central-difference Jacobian of a gradient map (order 2 or 4)."""
    x = np.asarray(x, dtype=float)
    h = fd_steps(x) if steps is None else np.asarray(steps, dtype=float)
    n = x.size
    H = np.empty((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h[i]
        d1 = np.asarray(grad(x + e)) - np.asarray(grad(x - e))
        if order == 2:
            H[:, i] = d1 / (2.0 * h[i])
        else:
            d2 = np.asarray(grad(x + 2 * e)) - np.asarray(grad(x - 2 * e))
            H[:, i] = (8.0 * d1 - d2) / (12.0 * h[i])
    return 0.5 * (H + H.T)
