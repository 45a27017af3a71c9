"""Upper and lower Bellman functions of the windowed Carleson embedding, p = 2.

Internally the root of the cubic is carried as u = 1 - 4a(M-m). In that
variable the two root brackets become u in [0, 1] (maximizing branch) and
u in (1, inf) (minimizing branch), and every factor of the value formula is
a short expression in u, r = (M-x3)/(M-m) and e = (x3-m)/(M-m):

    1 - 2a(M-m)  = (1+u)/2
    1 - 2a(M-x3) = (2 - r + r*u)/2
    1 - 4a(M-x3) = e + r*u
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._roots import bisect_monotone
from .domain import L2, Branch, CetPoint, Window, ratio_s
from .errors import BoundaryGradient, DomainError, NoNegativeRoot, Nonconvergence, PoleError
from .numdiff import fd_steps, jacobian_fd

LOWER_LID_GAP = 1e-9
MAX_EXPANSIONS = 1100
SIDE_SNAP = 4.5e-16


@dataclass(frozen=True)
class CubicSolve:
    a: float
    branch: Branch
    residual: float
    iterations: int
    u: float = math.nan


@dataclass(frozen=True)
class BellmanValue:
    value: float
    a: float
    branch: Branch


def _r_e(x3: float, w: Window) -> tuple[float, float]:
    W = w.width
    return (w.M - x3) / W, (x3 - w.m) / W


def _a_of_u(u: float, w: Window) -> float:
    return (1.0 - u) / (4.0 * w.width)


def _rhs_u(u: float, r: float, e: float) -> float:
    q = (2.0 - r + r * u) / (1.0 + u)
    return q * q * u / (e + r * u)


def cubic_rhs(a: float, x3: float, w: Window) -> float:
    """Right-hand side of the cubic in a whose root parametrizes B."""
    W = w.width
    d1 = 1.0 - 2.0 * a * W
    d2 = 1.0 - 4.0 * a * (w.M - x3)
    if d1 == 0.0 or d2 == 0.0:
        raise PoleError(f"cubic_rhs has a pole at a={a}, x3={x3}")
    q = (1.0 - 2.0 * a * (w.M - x3)) / d1
    return q * q * (1.0 - 4.0 * a * W) / d2


def _solve_u(s: float, r: float, e: float, W: float, branch: Branch) -> tuple[float, int]:
    if branch is Branch.PLUS:
        if s >= 1.0:
            return 1.0, 0
        if e <= 0.0:
            raise PoleError("x3 = m: the cubic is degenerate (rhs is identically 1)")
        if s <= 0.0:
            return 0.0, 0
        return bisect_monotone(lambda u: _rhs_u(u, r, e), s, 0.0, 1.0, increasing=True)
    if s <= r:
        raise NoNegativeRoot(f"no negative root: s={s} <= (M-x3)/(M-m)={r}")
    if s >= 1.0:
        return 1.0, 0
    # expand a = -1, -2, -4, ... i.e. u = 1 + 4W*2^j until rhs drops below s
    lo = 1.0
    for j in range(MAX_EXPANSIONS):
        hi = 1.0 + 4.0 * W * 2.0**j
        if _rhs_u(hi, r, e) <= s:
            break
        lo = hi
    else:
        raise Nonconvergence("negative-branch bracket expansion failed")
    u, it = bisect_monotone(lambda v: _rhs_u(v, r, e), s, lo, hi, increasing=False, geometric=True)
    return u, it + j


def solve_cubic(s: float, x3: float, w: Window, branch: Branch | str = Branch.PLUS) -> CubicSolve:
    """Root of cubic_rhs(a, x3, w) = s on the requested branch."""
    branch = Branch.parse(branch)
    if not 0.0 <= s <= 1.0:
        raise DomainError(f"s must lie in [0, 1], got {s}")
    if not w.m <= x3 <= w.M:
        raise DomainError(f"x3={x3} outside [{w.m}, {w.M}]")
    r, e = _r_e(x3, w)
    u, it = _solve_u(s, r, e, w.width, branch)
    res = abs(_rhs_u(u, r, e) - s) if e > 0.0 else 0.0
    return CubicSolve(a=_a_of_u(u, w), branch=branch, residual=res, iterations=it, u=u)


def _value_u(x2: float, u: float, r: float, e: float, w: Window) -> float:
    eta = 0.5 * (1.0 + u)
    return w.width * e * x2 / (eta * eta * (e + r * u)) + w.m * x2


def _lower_lid(x1: float, x2: float, w: Window) -> float:
    return 4.0 * w.width * max(x2 - x1 * x1, 0.0) + w.m * x2


def _snap(s: float) -> float:
    # s = 1 is a double root, so ulp noise in s would cost ~1e-8 in B
    if s >= 1.0 - SIDE_SNAP:
        return 1.0
    return max(s, 0.0)


def _s_raw(x1: float, x2: float) -> float:
    return _snap(x1 * x1 / x2)


def _bmax_raw(x1: float, x2: float, x3: float, w: Window) -> tuple[float, float]:
    """Value and u without domain checks; x3 may overshoot M slightly."""
    if x2 == 0.0:
        return 0.0, 0.0
    if x3 - w.m < LOWER_LID_GAP:
        s = _s_raw(x1, x2)
        return _lower_lid(x1, x2, w), (1.0 if s >= 1.0 else 0.0)
    r, e = _r_e(x3, w)
    u, _ = _solve_u(_s_raw(x1, x2), r, e, w.width, Branch.PLUS)
    return _value_u(x2, u, r, e, w), u


def _bmin_raw(x1: float, x2: float, x3: float, w: Window) -> tuple[float, float]:
    if x2 == 0.0:
        return 0.0, math.inf
    s = _s_raw(x1, x2)
    r, e = _r_e(x3, w)
    if s <= r:
        return w.m * x2, math.inf
    u, _ = _solve_u(s, r, e, w.width, Branch.MINUS)
    return _value_u(x2, u, r, e, w), u


def eval_bmax(pt: CetPoint, w: Window) -> BellmanValue:
    """Upper Bellman function (maximizing branch)."""
    pt.check(w)
    v, u = _bmax_raw(pt.x1, pt.x2, min(pt.x3, w.M), w)
    return BellmanValue(v, _a_of_u(u, w), Branch.PLUS)


def eval_bmin(pt: CetPoint, w: Window) -> BellmanValue:
    """Lower Bellman function; equals m*x2 at or below the threshold level."""
    pt.check(w)
    v, u = _bmin_raw(pt.x1, pt.x2, min(max(pt.x3, w.m), w.M), w)
    a = -math.inf if math.isinf(u) else _a_of_u(u, w)
    return BellmanValue(v, a, Branch.MINUS)


def eval_b(pt: CetPoint, w: Window, branch: Branch | str = Branch.PLUS) -> BellmanValue:
    branch = Branch.parse(branch)
    return eval_bmax(pt, w) if branch is Branch.PLUS else eval_bmin(pt, w)


def _grad_raw(x1: float, x2: float, x3: float, w: Window, branch: Branch) -> np.ndarray:
    if x2 <= 0.0 or x3 - w.m < LOWER_LID_GAP:
        raise BoundaryGradient("gradient is one-sided on the lower lid")
    s = x1 * x1 / x2
    if s > 1.0 + SIDE_SNAP:
        raise BoundaryGradient("point outside the domain")
    s = _snap(s)
    r, e = _r_e(x3, w)
    if branch is Branch.MINUS and s <= r:
        return np.array([0.0, w.m, 0.0])
    u, _ = _solve_u(s, r, e, w.width, branch)
    if u == 1.0:
        raise BoundaryGradient("a = 0: the gradient is singular on the side boundary")
    W = w.width
    k = 2.0 - r + r * u
    t1 = -8.0 * W * x1 / ((1.0 - u) * k)
    t2 = w.m + 4.0 * W / ((1.0 - u) * (1.0 + u))
    t3 = 4.0 * x1 * x1 / (k * k)
    return np.array([t1, t2, t3])


def gradient(pt: CetPoint, w: Window, branch: Branch | str = Branch.PLUS) -> np.ndarray:
    """Analytic gradient (t1, t2, t3) of B at an interior point."""
    pt.check(w)
    return _grad_raw(pt.x1, pt.x2, pt.x3, w, Branch.parse(branch))


def hessian_fd(pt: CetPoint, w: Window, branch: Branch | str = Branch.PLUS) -> np.ndarray:
    """Symmetrised fourth-order central differences of the analytic gradient."""
    branch = Branch.parse(branch)
    pt.check(w)
    x = np.array([pt.x1, pt.x2, pt.x3])
    # the five-point stencil reaches 2h from x
    h = 2.0 * fd_steps(x)
    if x[2] - h[2] - w.m < LOWER_LID_GAP:
        raise BoundaryGradient("stencil reaches the lower lid")
    if x[2] + h[2] > w.M + 2e-5 * max(1.0, abs(w.M)):
        raise BoundaryGradient("stencil overshoots the upper lid")
    if (abs(x[0]) + h[0]) ** 2 >= x[1] - h[1]:
        raise BoundaryGradient("stencil leaves the domain near the side boundary")
    return jacobian_fd(lambda y: _grad_raw(y[0], y[1], y[2], w, branch), x, 0.5 * h, order=4)


def kernel_direction(pt: CetPoint, w: Window) -> np.ndarray:
    """Direction of the extremal line through pt (maximizing branch)."""
    pt.check(w)
    if pt.x1 == 0.0:
        return np.array([0.0, 0.0, 1.0])
    if pt.x3 - w.m < LOWER_LID_GAP:
        raise BoundaryGradient("kernel direction undefined on the lower lid")
    r, e = _r_e(min(pt.x3, w.M), w)
    u, _ = _solve_u(_s_raw(pt.x1, pt.x2), r, e, w.width, Branch.PLUS)
    if u == 0.0:
        raise PoleError("a = 1/(4(M-m)) is a pole of the kernel direction")
    a = _a_of_u(u, w)
    k = 2.0 - r + r * u
    x1 = pt.x1
    return np.array([4.0 * a * x1 / k, 4.0 * a * (1.0 + u) ** 2 * x1 * x1 / (u * k * k), 1.0])


def main_inequality_gap(xp: CetPoint, xm: CetPoint, surplus: float, w: Window) -> float:
    """B(x) - (B(x+) + B(x-))/2 - x1^2 * surplus, x the lifted midpoint."""
    if surplus < 0.0:
        raise DomainError("surplus must be nonnegative")
    x = CetPoint(
        0.5 * (xp.x1 + xm.x1),
        0.5 * (xp.x2 + xm.x2),
        0.5 * (xp.x3 + xm.x3) + surplus,
    )
    for q in (xp, xm, x):
        q.check(w)
    bx = eval_bmax(x, w).value
    return bx - 0.5 * (eval_bmax(xp, w).value + eval_bmax(xm, w).value) - x.x1 * x.x1 * surplus


def embedding_constant(w: Window) -> float:
    """Constant 4(M-m) read off the lower-lid values."""
    return 4.0 * w.width


def scale_of(value: float) -> float:
    return max(1.0, abs(value))


__all__ = [
    "BellmanValue", "CubicSolve", "cubic_rhs", "solve_cubic", "eval_bmax", "eval_bmin",
    "eval_b", "gradient", "hessian_fd", "kernel_direction", "main_inequality_gap",
    "embedding_constant", "scale_of", "L2", "ratio_s",
]
