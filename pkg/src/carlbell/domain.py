"""Bellman domains, capacity windows and exponents.

Points are plain immutable values. Membership tests allow an absolute slack
of ``SLACK`` on every inequality so that points computed on a boundary are
not rejected because of round-off.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DegeneratePoint, DomainError

SLACK = 1e-12

P_MAX = 64.0


class Branch(enum.Enum):
    """Root branch: PLUS maximizes (B_max), MINUS minimizes (B_min)."""

    PLUS = "plus"
    MINUS = "minus"

    @classmethod
    def parse(cls, tag: "str | Branch") -> "Branch":
        if isinstance(tag, Branch):
            return tag
        try:
            return cls(str(tag).lower())
        except ValueError:
            raise DomainError(f"unknown branch {tag!r}; expected 'plus' or 'minus'") from None


@dataclass(frozen=True)
class Window:
    """Capacity window: m|J| <= mu(J) + sum(alpha) <= M|J|."""

    m: float
    M: float

    def __post_init__(self):
        if not (math.isfinite(self.m) and math.isfinite(self.M)):
            raise DomainError("window bounds must be finite")
        if self.m < 0 or not self.m < self.M:
            raise DomainError(f"need 0 <= m < M, got m={self.m}, M={self.M}")

    @property
    def width(self) -> float:
        return self.M - self.m


UNIT = Window(0.0, 1.0)


@dataclass(frozen=True)
class Exponent:
    p: float

    def __post_init__(self):
        if not (1.0 < self.p <= P_MAX):
            raise DomainError(f"exponent p must lie in (1, {P_MAX:g}], got {self.p}")

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)


L2 = Exponent(2.0)


@dataclass(frozen=True)
class CetPoint:
    x1: float
    x2: float
    x3: float

    def in_domain(self, w: Window, exp: Exponent = L2) -> bool:
        return (
            abs(self.x1) ** exp.p <= self.x2 + SLACK
            and w.m - SLACK <= self.x3 <= w.M + SLACK
        )

    def check(self, w: Window, exp: Exponent = L2) -> "CetPoint":
        if not all(map(math.isfinite, (self.x1, self.x2, self.x3))):
            raise DomainError(f"non-finite coordinates in {self}")
        if not self.in_domain(w, exp):
            raise DomainError(f"{self} lies outside the domain for {w}, p={exp.p:g}")
        return self


@dataclass(frozen=True)
class JniParams:
    eps: float
    delta: float

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise DomainError(f"eps must lie in (0, 1), got {self.eps}")
        if not self.eps <= self.delta < 1.0:
            raise DomainError(f"delta must lie in [eps, 1), got {self.delta}")


@dataclass(frozen=True)
class JniPoint:
    x1: float
    x2: float

    def in_domain(self, params: JniParams) -> bool:
        gap = self.x2 - self.x1 * self.x1
        return -SLACK <= gap <= params.eps ** 2 + SLACK

    def check(self, params: JniParams) -> "JniPoint":
        if not (math.isfinite(self.x1) and math.isfinite(self.x2)):
            raise DomainError(f"non-finite coordinates in {self}")
        if not self.in_domain(params):
            raise DomainError(f"{self} lies outside the John-Nirenberg domain for eps={params.eps}")
        return self


def ratio_s(pt: CetPoint, exp: Exponent = L2) -> float:
    """Return |x1|^p / x2, clamped into [0, 1]."""
    if pt.x2 == 0.0:
        raise DegeneratePoint("x2 = 0: the ratio |x1|^p / x2 is undefined")
    if exp.p == 2.0:
        s = pt.x1 * pt.x1 / pt.x2
    else:
        s = abs(pt.x1) ** exp.p / pt.x2
    return min(max(s, 0.0), 1.0)


def min_threshold(pt: CetPoint, w: Window, exp: Exponent = L2) -> float:
    """Level of x3 above which the minimizing branch exists.

    Below (or at) this level the lower Bellman function equals m * x2.
    """
    s = ratio_s(pt, exp)
    if exp.p == 2.0:
        return w.M - w.width * s
    return w.M - w.width * s ** (1.0 / (exp.p - 1.0))


def rescale_to_unit(pt: CetPoint, w: Window) -> CetPoint:
    """Affinely map x3 from [m, M] onto [0, 1]."""
    return CetPoint(pt.x1, pt.x2, (pt.x3 - w.m) / w.width)


def rescale_from_unit(pt: CetPoint, w: Window) -> CetPoint:
    return CetPoint(pt.x1, pt.x2, w.m + w.width * pt.x3)
