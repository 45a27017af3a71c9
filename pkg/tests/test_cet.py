import math

import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from carlbell import cet
from carlbell.domain import Branch, CetPoint, Window
from carlbell.errors import BoundaryGradient, DomainError, NoNegativeRoot, PoleError

from conftest import draw_point, draw_window

SQ2 = math.sqrt(2.0)
UNIT = Window(0.0, 1.0)


def cubic_roots_oracle(s, x3, w):
    """Real roots in a of s(1-2aW)^2(1-4ah) = (1-2ah)^2(1-4aW), h = M - x3."""
    W, h = w.width, w.M - x3
    lhs = P.polymul(P.polymul([1, -2 * W], [1, -2 * W]), [1, -4 * h])
    rhs = P.polymul(P.polymul([1, -2 * h], [1, -2 * h]), [1, -4 * W])
    coeffs = P.polysub(s * np.asarray(lhs), rhs)
    roots = np.roots(coeffs[::-1])
    return sorted(float(r.real) for r in roots if abs(r.imag) < 1e-9 * max(1.0, abs(r)))


@pytest.mark.parametrize(
    "a, x3, expected",
    [(0.0, 0.3, 1.0), (0.0, 1.0, 1.0), (0.25, 0.5, 0.0), ((SQ2 - 1) / 2, 1.0, 0.5)],
)
def test_cubic_rhs_values(a, x3, expected):
    assert math.isclose(cet.cubic_rhs(a, x3, UNIT), expected, abs_tol=1e-15)


def test_cubic_rhs_pole():
    with pytest.raises(PoleError):
        cet.cubic_rhs(0.5, 0.5, UNIT)


@pytest.mark.parametrize(
    "s, x3, branch, expected",
    [(1.0, 0.7, "plus", 0.0), (0.5, 1.0, "plus", (SQ2 - 1) / 2), (0.5, 1.0, "minus", -(SQ2 + 1) / 2)],
)
def test_solve_cubic_values(s, x3, branch, expected):
    sol = cet.solve_cubic(s, x3, UNIT, branch)
    assert math.isclose(sol.a, expected, abs_tol=1e-14)
    assert sol.branch is Branch.parse(branch)


def test_solve_cubic_matches_numpy_roots(rng):
    for _ in range(300):
        w = draw_window(rng)
        s = float(rng.uniform(0.01, 0.99))
        x3 = w.m + w.width * float(rng.uniform(0.02, 1.0))
        roots = cubic_roots_oracle(s, x3, w)
        plus = [r for r in roots if 0.0 <= r <= 1.0 / (4.0 * w.width)]
        assert len(plus) == 1
        a = cet.solve_cubic(s, x3, w, "plus").a
        assert abs(a - plus[0]) <= 1e-9 * max(1.0, abs(plus[0]))
        r = (w.M - x3) / w.width
        neg = [v for v in roots if v < 0.0]
        if s > r:
            am = cet.solve_cubic(s, x3, w, "minus").a
            assert min(abs(am - v) / max(1.0, abs(v)) for v in neg) <= 1e-9
        else:
            with pytest.raises(NoNegativeRoot):
                cet.solve_cubic(s, x3, w, "minus")


def test_solve_cubic_rejects_bad_input():
    with pytest.raises(DomainError):
        cet.solve_cubic(1.5, 0.5, UNIT)
    with pytest.raises(DomainError):
        cet.solve_cubic(0.5, 2.0, UNIT)
    with pytest.raises(PoleError):
        cet.solve_cubic(0.5, 0.0, UNIT)


@pytest.mark.parametrize(
    "pt, expected",
    [((1, 1, 0.5), 0.5), ((1, 2, 1), (SQ2 + 1) ** 2), ((0, 1, 0.5), 4.0), ((0, 1, 0), 4.0)],
)
def test_eval_bmax_values(pt, expected):
    assert math.isclose(cet.eval_bmax(CetPoint(*pt), UNIT).value, expected, rel_tol=1e-12)


@pytest.mark.parametrize(
    "pt, expected",
    [((0, 7, 0.9), 0.0), ((1, 2, 1), (SQ2 - 1) ** 2), ((1, 1, 0.5), 0.5)],
)
def test_eval_bmin_values(pt, expected):
    assert math.isclose(cet.eval_bmin(CetPoint(*pt), UNIT).value, expected, rel_tol=1e-12, abs_tol=1e-15)


def test_bmin_below_bmax(rng):
    for _ in range(200):
        w = draw_window(rng)
        pt = draw_point(rng, w)
        lo, hi = cet.eval_bmin(pt, w).value, cet.eval_bmax(pt, w).value
        assert w.m * pt.x2 - 1e-12 <= lo <= hi + 1e-12 * max(1.0, hi)
        assert hi <= (4.0 * w.width + w.m) * pt.x2 * (1 + 1e-12)


def test_bmax_nondecreasing_in_x3(rng):
    for _ in range(50):
        w = draw_window(rng)
        pt = draw_point(rng, w, s_hi=0.95)
        vals = [cet.eval_bmax(CetPoint(pt.x1, pt.x2, x3), w).value for x3 in np.linspace(w.m, w.M, 9)]
        assert all(b >= a - 1e-12 * max(1.0, a) for a, b in zip(vals, vals[1:]))


def test_gradient_reference_point():
    a = (SQ2 - 1) / 2
    g = cet.gradient(CetPoint(1, 2, 1), UNIT)
    assert math.isclose(g[0], -1 / a, rel_tol=1e-12)
    assert math.isclose(g[1], 1 / (2 * a * (1 - 2 * a)), rel_tol=1e-12)
    assert math.isclose(g[2], 1.0, rel_tol=1e-12)
    assert math.isclose(0.5 * g[0] + 2 * g[1], (SQ2 + 1) ** 2, rel_tol=1e-12)
    assert cet.gradient(CetPoint(0.6, 1, 1), UNIT)[2] == pytest.approx(0.36, abs=1e-15)


def test_gradient_matches_fd_both_branches(rng):
    for br in ("plus", "minus"):
        for _ in range(60):
            w = draw_window(rng)
            pt = draw_point(rng, w, 0.1, 0.9, 0.1, 0.95)
            if br == "minus" and pt.x3 <= w.M - w.width * pt.x1**2 / pt.x2 + 0.05 * w.width:
                continue
            g = cet.gradient(pt, w, br)
            x = np.array([pt.x1, pt.x2, pt.x3])
            for i in range(3):
                h = 1e-6 * max(1.0, abs(x[i]))
                e = np.eye(3)[i] * h
                fd = (cet.eval_b(CetPoint(*(x + e)), w, br).value - cet.eval_b(CetPoint(*(x - e)), w, br).value) / (2 * h)
                assert abs(fd - g[i]) <= 1e-6 * max(1.0, abs(g[i]))


def test_bmin_gradient_below_threshold():
    g = cet.gradient(CetPoint(0.1, 1.0, 0.8), Window(0.5, 1.5), "minus")
    assert np.allclose(g, [0.0, 0.5, 0.0])


def test_hessian_examples():
    ev = np.linalg.eigvalsh(cet.hessian_fd(CetPoint(1, 2, 0.8), UNIT, "plus"))
    assert ev.max() <= 1e-6
    ev = np.linalg.eigvalsh(cet.hessian_fd(CetPoint(1, 2, 0.95), UNIT, "minus"))
    assert ev.min() >= -1e-6
    with pytest.raises(BoundaryGradient):
        cet.hessian_fd(CetPoint(1, 1, 0.5), UNIT)


def test_kernel_direction():
    assert np.array_equal(cet.kernel_direction(CetPoint(0, 1, 0.5), UNIT), [0, 0, 1])
    pt = CetPoint(1, 2, 1)
    d = cet.kernel_direction(pt, UNIT)
    a = (SQ2 - 1) / 2
    assert d[0] == pytest.approx(4 * a / 2, rel=1e-12)
    H = cet.hessian_fd(CetPoint(1, 2, 0.7), UNIT)
    d = cet.kernel_direction(CetPoint(1, 2, 0.7), UNIT)
    assert np.linalg.norm(H @ d) <= 1e-6 * np.linalg.norm(H, 2) * np.linalg.norm(d)


def test_main_inequality(rng):
    x = CetPoint(1, 2, 0.5)
    assert cet.main_inequality_gap(x, x, 0.0, UNIT) == 0.0
    for _ in range(300):
        w = draw_window(rng)
        xp, xm = draw_point(rng, w), draw_point(rng, w)
        room = w.M - 0.5 * (xp.x3 + xm.x3)
        gap = cet.main_inequality_gap(xp, xm, float(rng.uniform(0, room)), w)
        assert gap >= -1e-9 * max(1.0, abs(cet.eval_bmax(xp, w).value))
    with pytest.raises(DomainError):
        cet.main_inequality_gap(x, x, -0.1, UNIT)


@pytest.mark.parametrize("w, expected", [((0, 1), 4.0), ((0, 2), 8.0), ((1, 1.5), 2.0)])
def test_embedding_constant(w, expected):
    assert cet.embedding_constant(Window(*w)) == expected


def test_side_boundary_is_exact(rng):
    for _ in range(200):
        w = draw_window(rng)
        x1 = float(rng.uniform(-3, 3))
        x3 = w.m + w.width * float(rng.random())
        pt = CetPoint(x1, x1 * x1, x3)
        assert abs(cet.eval_bmax(pt, w).value - x1 * x1 * x3) <= 1e-12 * max(1.0, x1 * x1 * x3)
        assert abs(cet.eval_bmin(pt, w).value - x1 * x1 * x3) <= 1e-12 * max(1.0, x1 * x1 * x3)
