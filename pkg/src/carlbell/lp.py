"""Bellman functions for the L^p Carleson embedding.

The root is carried as u = 1 - p*q*(M-m)*g with g = a|a|^(p-2). The
maximizing bracket is u in [0, 1], the minimizing one u in (1, inf); for
p = 2 every call is routed to the specialized p = 2 code.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import cet
from ._roots import bisect_monotone
from .cet import LOWER_LID_GAP, MAX_EXPANSIONS, BellmanValue
from .domain import Branch, CetPoint, Exponent, Window, ratio_s
from .errors import DomainError, NoNegativeRoot, Nonconvergence, PoleError


@dataclass(frozen=True)
class LpSolve:
    a: float
    branch: Branch
    residual: float
    p: float
    u: float = math.nan


def _abs_pow(x: float, p: float) -> float:
    """|x|^p with an exact zero at x = 0."""
    if x == 0.0:
        return 0.0
    return abs(x) ** p


def _signed_pow(x: float, p: float) -> float:
    return math.copysign(_abs_pow(x, p), x)


def _rhs_u(u: float, r: float, e: float, p: float) -> float:
    num = 1.0 - r * (1.0 - u) / p
    den = 1.0 - (1.0 - u) / p
    return _abs_pow(num / den, p) * u / (e + r * u)


def _u_of_a(a: float, w: Window, exp: Exponent) -> float:
    g = _signed_pow(a, exp.p - 1.0)
    return 1.0 - exp.p * exp.q * w.width * g


def _a_of_u(u: float, w: Window, exp: Exponent) -> float:
    g = (1.0 - u) / (exp.p * exp.q * w.width)
    return _signed_pow(g, exp.q - 1.0)


def plus_bound(w: Window, exp: Exponent) -> float:
    """Right end of the maximizing bracket, (1/(pq(M-m)))^(q-1)."""
    return _abs_pow(1.0 / (exp.p * exp.q * w.width), exp.q - 1.0)


def lp_rhs(a: float, x3: float, w: Window, exp: Exponent) -> float:
    """Left side of the degree-p equation as a function of a (limit 1 at a=0)."""
    if exp.p == 2.0:
        return cet.cubic_rhs(a, x3, w)
    if a == 0.0:
        return 1.0
    r, e = cet._r_e(x3, w)
    u = _u_of_a(a, w, exp)
    den = 1.0 - (1.0 - u) / exp.p
    if den == 0.0 or e + r * u == 0.0:
        raise PoleError(f"lp_rhs has a pole at a={a}")
    return _rhs_u(u, r, e, exp.p)


def _solve_u(s: float, r: float, e: float, W: float, p: float, branch: Branch) -> tuple[float, int]:
    if branch is Branch.PLUS:
        if s >= 1.0:
            return 1.0, 0
        if e <= 0.0:
            raise PoleError("x3 = m: the equation is degenerate")
        if s <= 0.0:
            return 0.0, 0
        return bisect_monotone(lambda u: _rhs_u(u, r, e, p), s, 0.0, 1.0, increasing=True)
    if s <= _abs_pow(r, p - 1.0):
        raise NoNegativeRoot(f"no negative root: s={s} <= ((M-x3)/(M-m))^(p-1)")
    if s >= 1.0:
        return 1.0, 0
    lo = 1.0
    for j in range(MAX_EXPANSIONS):
        hi = 1.0 + 2.0**j
        if _rhs_u(hi, r, e, p) <= s:
            break
        lo = hi
    else:
        raise Nonconvergence("negative-branch bracket expansion failed")
    u, it = bisect_monotone(lambda v: _rhs_u(v, r, e, p), s, lo, hi, increasing=False, geometric=True)
    return u, it + j


def solve_lp(s: float, x3: float, w: Window, exp: Exponent, branch: Branch | str = Branch.PLUS) -> LpSolve:
    branch = Branch.parse(branch)
    if exp.p == 2.0:
        c = cet.solve_cubic(s, x3, w, branch)
        return LpSolve(c.a, branch, c.residual, 2.0, c.u)
    if not 0.0 <= s <= 1.0:
        raise DomainError(f"s must lie in [0, 1], got {s}")
    if not w.m <= x3 <= w.M:
        raise DomainError(f"x3={x3} outside [{w.m}, {w.M}]")
    r, e = cet._r_e(x3, w)
    u, _ = _solve_u(s, r, e, w.width, exp.p, branch)
    res = abs(_rhs_u(u, r, e, exp.p) - s) if e > 0.0 else 0.0
    return LpSolve(_a_of_u(u, w, exp), branch, res, exp.p, u)


def _value_u(x2: float, u: float, r: float, e: float, w: Window, p: float) -> float:
    den = _abs_pow(1.0 - (1.0 - u) / p, p)
    return w.width * e * x2 / (den * (e + r * u)) + w.m * x2


def _lower_lid(x1: float, x2: float, w: Window, exp: Exponent) -> float:
    return _abs_pow(exp.q, exp.p) * w.width * max(x2 - _abs_pow(x1, exp.p), 0.0) + w.m * x2


def _lp_raw(x1: float, x2: float, x3: float, w: Window, exp: Exponent, branch: Branch) -> tuple[float, float]:
    """Value and u without domain checks (x3 may overshoot M slightly)."""
    if x2 == 0.0:
        return 0.0, (0.0 if branch is Branch.PLUS else math.inf)
    p = exp.p
    s = cet._snap(_abs_pow(x1, p) / x2)
    r, e = cet._r_e(x3, w)
    if branch is Branch.PLUS:
        if x3 - w.m < LOWER_LID_GAP:
            return _lower_lid(x1, x2, w, exp), (1.0 if s >= 1.0 else 0.0)
        u, _ = _solve_u(s, r, e, w.width, p, branch)
        return _value_u(x2, u, r, e, w, p), u
    if s <= _abs_pow(max(r, 0.0), p - 1.0):
        return w.m * x2, math.inf
    u, _ = _solve_u(s, r, e, w.width, p, branch)
    return _value_u(x2, u, r, e, w, p), u


def eval_lp(pt: CetPoint, w: Window, exp: Exponent, branch: Branch | str = Branch.PLUS) -> BellmanValue:
    """L^p Bellman function on the chosen branch."""
    branch = Branch.parse(branch)
    if exp.p == 2.0:
        return cet.eval_b(pt, w, branch)
    pt.check(w, exp)
    x3 = min(max(pt.x3, w.m), w.M)
    v, u = _lp_raw(pt.x1, pt.x2, x3, w, exp, branch)
    a = -math.inf if math.isinf(u) else _a_of_u(u, w, exp)
    return BellmanValue(v, a, branch)


__all__ = ["LpSolve", "lp_rhs", "solve_lp", "eval_lp", "plus_bound", "ratio_s"]
