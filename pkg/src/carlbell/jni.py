"""John-Nirenberg Bellman family B(x1, x2; delta).

With rho = sqrt(delta^2 - (x2 - x1^2)) and K = exp(-delta)/(1 - delta),

    B = K (1 - rho) exp(x1 + rho).

Its gradient is K exp(x1 + rho) * (1 - rho - x1, 1/2), which stays finite
on the upper boundary rho = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import SLACK, JniParams, JniPoint
from .errors import BoundaryGradient, DomainError
from .numdiff import jacobian_fd

CLAMP = 1e-14
RHO_MIN = 1e-4
STEP_FRACTION = 1e-3


def _rho(x1: float, x2: float, delta: float) -> float:
    arg = delta * delta - (x2 - x1 * x1)
    if arg < 0.0:
        if arg < -max(CLAMP, SLACK):
            raise DomainError(f"x2 - x1^2 = {x2 - x1 * x1} exceeds delta^2 = {delta * delta}")
        return 0.0
    if arg < CLAMP:
        return 0.0
    return math.sqrt(arg)


def _k(delta: float) -> float:
    return math.exp(-delta) / (1.0 - delta)


def jni_a(pt: JniPoint, delta: float) -> float:
    """Tangency abscissa of the extremal line through pt."""
    return pt.x1 + _rho(pt.x1, pt.x2, delta)


def _jni_raw(x1: float, x2: float, delta: float) -> float:
    rho = _rho(x1, x2, delta)
    return _k(delta) * (1.0 - rho) * math.exp(x1 + rho)


def eval_jni(pt: JniPoint, params: JniParams) -> float:
    pt.check(params)
    return _jni_raw(pt.x1, pt.x2, params.delta)


def _grad_raw(x1: float, x2: float, delta: float) -> np.ndarray:
    rho = _rho(x1, x2, delta)
    g = _k(delta) * math.exp(x1 + rho)
    return np.array([g * (1.0 - rho - x1), 0.5 * g])


def jni_gradient(pt: JniPoint, params: JniParams) -> np.ndarray:
    pt.check(params)
    return _grad_raw(pt.x1, pt.x2, params.delta)


def jni_hessian_fd(pt: JniPoint, params: JniParams) -> np.ndarray:
    """Fourth-order central differences of the analytic gradient.

    The gradient varies on the length scale rho^2/(1 + 2|x1|) (rho -> 0 on the
    upper boundary), so the step is a fixed fraction of that scale.
    """
    pt.check(params)
    rho = _rho(pt.x1, pt.x2, params.delta)
    if rho < RHO_MIN:
        raise BoundaryGradient("Hessian is singular on the upper boundary x2 - x1^2 = delta^2")
    h = STEP_FRACTION * rho * rho / (1.0 + 2.0 * abs(pt.x1))
    x = np.array([pt.x1, pt.x2])
    return jacobian_fd(lambda y: _grad_raw(y[0], y[1], params.delta), x, np.array([h, h]), order=4)


def jni_ma_residual(pt: JniPoint, params: JniParams) -> float:
    """Determinant of the finite-difference Hessian (zero for Monge-Ampere)."""
    return float(np.linalg.det(jni_hessian_fd(pt, params)))


@dataclass(frozen=True)
class JniTangentLine:
    """The line x2 - 2a x1 + a^2 - delta^2 = 0."""

    a: float
    delta: float

    @property
    def coefficients(self) -> tuple[float, float, float]:
        return 1.0, -2.0 * self.a, self.a * self.a - self.delta * self.delta

    def residual(self, x1: float, x2: float) -> float:
        c2, c1, c0 = self.coefficients
        return c2 * x2 + c1 * x1 + c0

    def x2_at(self, x1: float) -> float:
        return 2.0 * self.a * x1 - self.a * self.a + self.delta * self.delta

    @property
    def tangency_point(self) -> tuple[float, float]:
        return self.a, self.a * self.a + self.delta * self.delta

    @property
    def crossings(self) -> tuple[float, float]:
        """Abscissae where the line meets the lower parabola x2 = x1^2."""
        return self.a - self.delta, self.a + self.delta

    def extremal_segment(self) -> tuple[float, float]:
        """Range of x1 along which jni_a returns this line's a."""
        return self.a - self.delta, self.a


def jni_tangent_line(a: float, delta: float) -> JniTangentLine:
    return JniTangentLine(a, delta)


__all__ = [
    "jni_a", "eval_jni", "jni_gradient", "jni_hessian_fd", "jni_ma_residual",
    "JniTangentLine", "jni_tangent_line",
]
