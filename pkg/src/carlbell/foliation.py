"""Extremal lines of the p = 2 Bellman function and their frames.

A line is labelled by its root a and its bottom anchor xi = (xi1, xi1^2, m).
Along the line B is affine: B = t0 + t1 x1 + t2 x2 + t3 x3.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import cet
from .domain import Branch, CetPoint, Window, ratio_s
from .errors import PoleError


@dataclass(frozen=True)
class FoliationFrame:
    a: float
    xi1: float
    t1: float
    t2: float
    t3: float
    t0: float
    A: float
    D: float
    eta: float
    zeta1: float
    zeta2: float
    window: Window
    branch: Branch
    u: float

    def point_at(self, x3: float) -> CetPoint:
        """Point of the line at height x3 (uses the stored root for accuracy)."""
        r, e = cet._r_e(x3, self.window)
        u = self.u
        x1 = self.xi1 * (2.0 - r + r * u) / (1.0 + u)
        x2 = self.xi1 * self.xi1 * (e + r * u) / u
        return CetPoint(x1, x2, x3)

    def affine_value(self, pt: CetPoint) -> float:
        return self.t0 + self.t1 * pt.x1 + self.t2 * pt.x2 + self.t3 * pt.x3


def _check_den(d: float, what: str) -> float:
    if d == 0.0:
        raise PoleError(f"{what} vanishes")
    return d


def extremal_line_point(a: float, xi1: float, x3: float, w: Window) -> tuple[float, float]:
    """(x1, x2) of the line (a, xi1) at height x3."""
    W = w.width
    d1 = _check_den(1.0 - 2.0 * a * W, "1 - 2a(M-m)")
    d2 = _check_den(1.0 - 4.0 * a * W, "1 - 4a(M-m)")
    h = w.M - x3
    return xi1 * (1.0 - 2.0 * a * h) / d1, xi1 * xi1 * (1.0 - 4.0 * a * h) / d2


def upper_trace(a: float, xi1: float, w: Window) -> tuple[float, float]:
    """Intersection zeta of the line with the upper lid x3 = M."""
    W = w.width
    d1 = _check_den(1.0 - 2.0 * a * W, "1 - 2a(M-m)")
    d2 = _check_den(1.0 - 4.0 * a * W, "1 - 4a(M-m)")
    return xi1 / d1, xi1 * xi1 / d2


def hyperbola_residual(zeta1: float, zeta2: float, xi1: float) -> float:
    """zeta2 - zeta1 xi1^2 / (2 xi1 - zeta1): zero on the upper-lid trace curve."""
    return zeta2 - zeta1 * xi1 * xi1 / (2.0 * xi1 - zeta1)


def recover_parameters(pt: CetPoint, w: Window, branch: Branch | str = Branch.PLUS) -> FoliationFrame:
    """Frame of the extremal line through pt."""
    branch = Branch.parse(branch)
    pt.check(w)
    s = ratio_s(pt)
    sol = cet.solve_cubic(s if s < 1.0 - cet.SIDE_SNAP else 1.0, min(max(pt.x3, w.m), w.M), w, branch)
    u, a = sol.u, sol.a
    if pt.x1 == 0.0 or u == 0.0:
        raise PoleError("x1 = 0: the line degenerates to the pole a = 1/(4(M-m))")
    r, e = cet._r_e(pt.x3, w)
    W = w.width
    k = 2.0 - r + r * u
    xi1 = pt.x1 * (1.0 + u) / k
    t3 = 4.0 * pt.x1 * pt.x1 / (k * k)
    A = a * a
    D = 0.5 * a - w.M * a * a
    if u == 1.0:
        t1 = t2 = t0 = math.nan
    else:
        t1 = -8.0 * W * pt.x1 / ((1.0 - u) * k)
        t2 = w.m + 4.0 * W / ((1.0 - u) * (1.0 + u))
        t0 = D * t1 * t1
    eta = 0.5 * (1.0 + u)
    return FoliationFrame(
        a=a, xi1=xi1, t1=t1, t2=t2, t3=t3, t0=t0, A=A, D=D, eta=eta,
        zeta1=xi1 / eta, zeta2=xi1 * xi1 / u, window=w, branch=branch, u=u,
    )


def tangency_gap(a: float, t1: float, w: Window) -> float:
    """Slope mismatch between a projected line and its parabola P_A at the lid.

    Works in the unit window: a -> a(M-m), t1 -> t1/(M-m). The first slope is
    the ratio dx2/dx3 : dx1/dx3 along the line; the second is the slope of the
    parabola x2 = A x1^2 through the line's upper-lid point.
    """
    au = a * w.width
    tu = t1 / w.width
    if au == 0.0:
        return 0.0
    if 1.0 - 4.0 * au == 0.0 or 1.0 - 2.0 * au == 0.0:
        raise PoleError("a = 1/(4(M-m)) is a pole of the tangency slopes")
    xi1 = -tu * au * (1.0 - 2.0 * au)
    dx1 = 2.0 * au * xi1 / (1.0 - 2.0 * au)
    dx2 = 4.0 * au * xi1 * xi1 / (1.0 - 4.0 * au)
    if dx1 == 0.0:
        return 0.0
    slope1 = dx2 / dx1
    z1, z2 = upper_trace(au, xi1, Window(0.0, 1.0))
    slope2 = 2.0 * (z2 / (z1 * z1)) * z1
    return abs(slope1 - slope2)


__all__ = [
    "FoliationFrame", "extremal_line_point", "upper_trace", "hyperbola_residual",
    "recover_parameters", "tangency_gap",
]
