"""Bracketed bisection for monotone scalar equations."""
from __future__ import annotations

import math
from typing import Callable

from .errors import Nonconvergence

ITER_CAP = 3000


def bisect_monotone(
    f: Callable[[float], float],
    target: float,
    lo: float,
    hi: float,
    increasing: bool,
    geometric: bool = False,
) -> tuple[float, int]:
    """Solve f(x) = target on [lo, hi] for a monotone f.

    The bracket is halved until the midpoint coincides with an endpoint in
    floating point, so the root is resolved to the last representable bit.
    With ``geometric`` the split point is the geometric mean whenever the
    bracket spans more than a factor of four (positive brackets only), which
    keeps the iteration count logarithmic for very wide brackets.
    Returns the endpoint with the smaller residual and the iteration count.
    """
    sign = 1.0 if increasing else -1.0
    it = 0
    while it < ITER_CAP:
        it += 1
        if geometric and lo > 0.0 and hi > 4.0 * lo:
            mid = math.sqrt(lo) * math.sqrt(hi)
        else:
            mid = lo + 0.5 * (hi - lo)
        if mid <= lo or mid >= hi:
            break
        if sign * (f(mid) - target) < 0.0:
            lo = mid
        else:
            hi = mid
    else:
        raise Nonconvergence(f"bisection did not converge in {ITER_CAP} steps on [{lo}, {hi}]")
    flo, fhi = abs(f(lo) - target), abs(f(hi) - target)
    return (lo if flo <= fhi else hi), it
