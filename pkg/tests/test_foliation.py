import math

import numpy as np
import pytest

from carlbell import cet, foliation
from carlbell.domain import CetPoint, Window
from carlbell.errors import PoleError

from conftest import draw_point, draw_window

SQ2 = math.sqrt(2.0)
UNIT = Window(0.0, 1.0)


def test_extremal_line_point_examples():
    assert foliation.extremal_line_point(0.0, 0.7, 0.3, UNIT) == (0.7, pytest.approx(0.49))
    x1, x2 = foliation.extremal_line_point(0.1, 1.3, 0.0, UNIT)
    assert (x1, x2) == (pytest.approx(1.3), pytest.approx(1.69))
    x1, x2 = foliation.extremal_line_point(0.125, 1.0, 1.0, UNIT)
    assert (x1, x2) == (pytest.approx(4 / 3), pytest.approx(2.0))
    with pytest.raises(PoleError):
        foliation.extremal_line_point(0.25, 1.0, 0.5, UNIT)


def test_upper_trace_and_hyperbola():
    assert foliation.upper_trace(0.0, 0.9, UNIT) == (0.9, pytest.approx(0.81))
    z1, z2 = foliation.upper_trace(0.125, 1.0, UNIT)
    assert (z1, z2) == (pytest.approx(4 / 3), pytest.approx(2.0))
    assert foliation.hyperbola_residual(z1, z2, 1.0) == pytest.approx(0.0, abs=1e-15)


def test_trace_fan_spans_xi_to_2xi():
    xi1 = 1.0
    z = [foliation.upper_trace(a, xi1, UNIT)[0] for a in np.linspace(0, 0.25, 50, endpoint=False)]
    assert z[0] == 1.0 and all(1.0 <= v < 2.0 for v in z)
    assert all(b > a for a, b in zip(z, z[1:]))


def test_recover_parameters_reference():
    fr = foliation.recover_parameters(CetPoint(1, 2, 1), UNIT)
    assert fr.a == pytest.approx((SQ2 - 1) / 2, abs=1e-15)
    assert fr.xi1 == pytest.approx(2 - SQ2, abs=1e-15)
    assert fr.t1 == pytest.approx(-1 / fr.a, rel=1e-12)
    side = foliation.recover_parameters(CetPoint(0.8, 0.64, 0.3), UNIT)
    assert side.a == 0.0 and side.xi1 == pytest.approx(0.8)
    with pytest.raises(PoleError):
        foliation.recover_parameters(CetPoint(0.0, 1.0, 0.5), UNIT)


def test_frame_reconstructs_point_and_value(rng):
    for br in ("plus", "minus"):
        for _ in range(100):
            w = draw_window(rng)
            pt = draw_point(rng, w, 0.05, 0.95, 0.05, 1.0)
            if br == "minus" and pt.x3 <= w.M - w.width * pt.x1**2 / pt.x2 + 0.02 * w.width:
                continue
            fr = foliation.recover_parameters(pt, w, br)
            x1, x2 = foliation.extremal_line_point(fr.a, fr.xi1, pt.x3, w)
            assert x1 == pytest.approx(pt.x1, rel=1e-10, abs=1e-12)
            assert x2 == pytest.approx(pt.x2, rel=1e-10)
            ev = cet.eval_bmax if br == "plus" else cet.eval_bmin
            b = ev(pt, w).value
            assert fr.affine_value(pt) == pytest.approx(b, rel=1e-9)
            # B is affine along the line: second divided differences on uneven heights vanish
            hs = [w.m, w.m + 0.3 * w.width, w.m + 0.45 * w.width, w.M]
            vals = [ev(fr.point_at(h), w).value for h in hs]
            dd = [(vals[i + 1] - vals[i]) / (hs[i + 1] - hs[i]) for i in range(3)]
            sc = max(1.0, *map(abs, vals))
            assert abs(dd[1] - dd[0]) / sc <= 1e-8 and abs(dd[2] - dd[1]) / sc <= 1e-8
            assert abs(foliation.hyperbola_residual(fr.zeta1, fr.zeta2, fr.xi1)) <= 1e-10 * max(1.0, fr.zeta2)


def test_t3_power_on_upper_lid(rng):
    for _ in range(100):
        w = draw_window(rng)
        pt = draw_point(rng, w, 0.05, 0.95)
        top = CetPoint(pt.x1, pt.x2, w.M)
        assert abs(foliation.recover_parameters(top, w).t3 - pt.x1**2) <= 1e-12 * max(1.0, pt.x1**2)


@pytest.mark.parametrize("a, t1", [(0.0, 5.0), (0.1, -3.0)])
def test_tangency_examples(a, t1):
    assert foliation.tangency_gap(a, t1, UNIT) <= 1e-12


def test_tangency_grid():
    for W in (0.5, 1.0, 3.0):
        w = Window(1.0, 1.0 + W)
        for au in np.linspace(-2.0, 0.24, 40):
            for t1 in (-7.0, -1.0, 0.5, 4.0):
                assert foliation.tangency_gap(au / W, t1, w) <= 1e-10 * max(1.0, abs(t1))
    with pytest.raises(PoleError):
        foliation.tangency_gap(0.25, 1.0, UNIT)
