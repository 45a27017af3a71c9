import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from carlbell import cet, lp
from carlbell.domain import Branch, CetPoint, Exponent, Window
from carlbell.errors import DomainError, NoNegativeRoot

from conftest import draw_point, draw_window

SQ2 = math.sqrt(2.0)
UNIT = Window(0.0, 1.0)


def rhs_a(a, x3, w, p):
    """Degree-p equation written directly in a (vectorized)."""
    q = p / (p - 1.0)
    ap = np.abs(a) ** p
    ratio = (a - q * (w.M - x3) * ap) / (a - q * w.width * ap)
    return np.abs(ratio) ** p * (a - p * q * w.width * ap) / (a - p * q * (w.M - x3) * ap)


def oracle_root(s, x3, w, p, n=10**6):
    """Sign change on a 10^6-point grid of the positive bracket, then bisection."""
    hi = lp.plus_bound(w, Exponent(p))
    grid = np.linspace(hi * 1e-9, hi * (1 - 1e-12), n)
    f = rhs_a(grid, x3, w, p) - s
    k = int(np.flatnonzero(np.sign(f[:-1]) != np.sign(f[1:]))[0])
    lo, up = grid[k], grid[k + 1]
    for _ in range(200):
        mid = 0.5 * (lo + up)
        if (rhs_a(mid, x3, w, p) - s) > 0:
            lo = mid
        else:
            up = mid
    return 0.5 * (lo + up)


def value_a(pt, a, w, p):
    q = p / (p - 1.0)
    g = a * abs(a) ** (p - 2)
    den = abs(1 - q * w.width * g) ** p * (1 - p * q * (w.M - pt.x3) * g)
    return (pt.x3 - w.m) * pt.x2 / den + w.m * pt.x2


@pytest.mark.parametrize("p", [1.5, 3.0, 4.0])
def test_lp_rhs_limits(p):
    ex = Exponent(p)
    assert lp.lp_rhs(0.0, 0.4, UNIT, ex) == 1.0
    assert abs(lp.lp_rhs(lp.plus_bound(UNIT, ex), 0.4, UNIT, ex)) <= 1e-12


def test_lp_rhs_p2_matches_cubic():
    a = (SQ2 - 1) / 2
    assert lp.lp_rhs(a, 1.0, UNIT, Exponent(2.0)) == pytest.approx(0.5, abs=1e-15)


def test_lp_rhs_agrees_with_a_form(rng):
    for _ in range(200):
        w = draw_window(rng)
        p = float(rng.choice([1.5, 2.5, 3.0, 4.0]))
        ex = Exponent(p)
        x3 = w.m + w.width * float(rng.uniform(0.05, 1.0))
        a = float(rng.uniform(-3.0, 0.99)) * lp.plus_bound(w, ex)
        if a == 0.0:
            continue
        assert lp.lp_rhs(a, x3, w, ex) == pytest.approx(float(rhs_a(a, x3, w, p)), rel=1e-9)


@pytest.mark.parametrize("p", [1.5, 3.0, 4.0])
def test_lp_rhs_monotone_on_brackets(p):
    ex = Exponent(p)
    x3 = 0.6
    hi = lp.plus_bound(UNIT, ex)
    pos = [lp.lp_rhs(a, x3, UNIT, ex) for a in np.linspace(0, hi * 0.999, 200)]
    assert all(b < a for a, b in zip(pos, pos[1:]))
    neg = [lp.lp_rhs(a, x3, UNIT, ex) for a in -np.geomspace(1e3, 1e-1, 200)]
    assert all(b > a for a, b in zip(neg, neg[1:]))
    assert neg[0] > 0.4 ** (p - 1) - 1e-6


def test_solve_lp_p3_against_grid_oracle():
    w, ex = UNIT, Exponent(3.0)
    sol = lp.solve_lp(0.5, 1.0, w, ex, "plus")
    a_ref = oracle_root(0.5, 1.0, w, 3.0)
    assert sol.a == pytest.approx(a_ref, rel=1e-10)
    assert sol.residual <= 1e-11
    pt = CetPoint(1.0, 2.0, 1.0)
    assert lp.eval_lp(pt, w, ex).value == pytest.approx(value_a(pt, a_ref, w, 3.0), rel=1e-9)


def test_solve_lp_oracle_random_windows(rng):
    for _ in range(5):
        w = draw_window(rng)
        p = float(rng.choice([1.5, 3.0, 4.0]))
        s = float(rng.uniform(0.05, 0.95))
        x3 = w.m + w.width * float(rng.uniform(0.1, 1.0))
        sol = lp.solve_lp(s, x3, w, Exponent(p), "plus")
        assert sol.a == pytest.approx(oracle_root(s, x3, w, p, n=10**5), rel=1e-9)


def test_solve_lp_simple_cases():
    assert lp.solve_lp(1.0, 0.3, UNIT, Exponent(3.0)).a == 0.0
    assert lp.solve_lp(0.5, 1.0, UNIT, Exponent(2.0)).a == pytest.approx((SQ2 - 1) / 2, abs=1e-15)
    with pytest.raises(NoNegativeRoot):
        lp.solve_lp(0.2, 0.5, UNIT, Exponent(3.0), "minus")  # 0.2 <= 0.5^2
    sol = lp.solve_lp(0.3, 0.5, UNIT, Exponent(3.0), "minus")
    assert sol.a < 0 and sol.residual <= 1e-11


def test_eval_lp_p2_identity(rng):
    two = Exponent(2.0)
    for _ in range(200):
        w = draw_window(rng)
        pt = draw_point(rng, w)
        assert lp.eval_lp(pt, w, two, "plus").value == cet.eval_bmax(pt, w).value
        assert lp.eval_lp(pt, w, two, "minus").value == cet.eval_bmin(pt, w).value


@pytest.mark.parametrize("p", [1.5, 2.5, 3.0, 4.0])
def test_eval_lp_boundary_and_lid(p, rng):
    ex = Exponent(p)
    for _ in range(50):
        w = draw_window(rng)
        x1 = float(rng.uniform(-2, 2))
        x3 = w.m + w.width * float(rng.random())
        pt = CetPoint(x1, abs(x1) ** p, x3)
        assert lp.eval_lp(pt, w, ex).value == pytest.approx(abs(x1) ** p * x3, rel=1e-10, abs=1e-12)
    # lower lid limit q^p (M - m)(x2 - |x1|^p) + m x2
    w = Window(0.5, 2.0)
    pt = CetPoint(0.7, 1.0, 0.5 + 1e-7)
    lid = ex.q**p * w.width * (1.0 - 0.7**p) + 0.5
    assert lp.eval_lp(pt, w, ex).value == pytest.approx(lid, rel=1e-4)


def test_eval_lp_minus_below_threshold():
    w, ex = Window(1.0, 2.0), Exponent(3.0)
    assert lp.eval_lp(CetPoint(0.5, 1.0, 1.2), w, ex, "minus").value == pytest.approx(1.0)
    with pytest.raises(DomainError):
        lp.eval_lp(CetPoint(1.5, 1.0, 1.2), w, ex)


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from([1.5, 3.0, 4.0]),
    st.floats(0.05, 0.95),
    st.floats(0.05, 1.0),
    st.floats(0.1, 5.0),
    st.sampled_from(list(Branch)),
)
def test_lp_homogeneity(p, s, e, t, br):
    ex, w = Exponent(p), Window(0.3, 1.7)
    x2 = 1.3
    pt = CetPoint((s * x2) ** (1 / p), x2, w.m + w.width * e)
    base = lp.eval_lp(pt, w, ex, br).value
    scaled = lp.eval_lp(CetPoint(t * pt.x1, t**p * pt.x2, pt.x3), w, ex, br).value
    assert scaled == pytest.approx(t**p * base, rel=1e-8)
