"""Seeded verification suites.

Every suite draws its own sample points from a numpy PCG64 generator and
returns a list of (error, tolerance) pairs; a check fails when its error
exceeds its tolerance.
"""
from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import cet, extremal, foliation, jni, lp
from .domain import Branch, CetPoint, Exponent, JniParams, JniPoint, Window, rescale_to_unit
from .errors import CarlbellError

SEED_ENV = "CARLBELL_SEED"


@dataclass(frozen=True)
class RunReport:
    suite: str
    samples: int
    failures: int
    worst_violation: float
    tolerance: float
    seed: int
    elapsed_ms: int


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.PCG64(seed))


# ---------------------------------------------------------------------------
# samplers (rejection into the domain)


def random_window(rng: np.random.Generator, unit_prob: float = 0.25) -> Window:
    if rng.random() < unit_prob:
        return Window(0.0, 1.0)
    m = float(rng.uniform(0.0, 2.0))
    return Window(m, m + float(rng.uniform(0.2, 3.0)))


def random_point(
    rng: np.random.Generator,
    w: Window,
    p: float = 2.0,
    s_range: tuple[float, float] = (0.0, 1.0),
    e_range: tuple[float, float] = (0.0, 1.0),
    radius: float = 2.0,
) -> CetPoint:
    """Uniform (x1, x2) in a box, rejected until |x1|^p <= x2 and s lies in s_range."""
    for _ in range(10000):
        x1 = float(rng.uniform(-radius, radius))
        x2 = float(rng.uniform(0.0, radius**p))
        if x2 == 0.0 or abs(x1) ** p > x2:
            continue
        s = abs(x1) ** p / x2
        if s_range[0] <= s <= s_range[1]:
            x3 = w.m + w.width * float(rng.uniform(*e_range))
            return CetPoint(x1, x2, x3)
    raise CarlbellError("rejection sampler exhausted its attempts")


def random_minus_point(rng: np.random.Generator, w: Window, margin: float = 0.05) -> CetPoint:
    """Interior point strictly above the minimizing-branch threshold."""
    for _ in range(10000):
        pt = random_point(rng, w, s_range=(0.05, 0.95), e_range=(0.02, 0.98))
        r = (w.M - pt.x3) / w.width
        if cet.ratio_s(pt) > r + margin:
            return pt
    raise CarlbellError("rejection sampler exhausted its attempts")


def interior_point(rng: np.random.Generator, w: Window) -> CetPoint:
    return random_point(rng, w, s_range=(0.05, 0.95), e_range=(0.05, 0.98))


def random_jni(rng: np.random.Generator, interior: bool = False) -> tuple[JniPoint, JniParams]:
    eps = float(rng.uniform(0.05, 0.9))
    delta = float(rng.uniform(eps, 0.95)) if rng.random() < 0.5 else eps
    x1 = float(rng.uniform(-3.0, 3.0))
    lo, hi = (0.1, 0.9) if interior else (0.0, 1.0)
    x2 = x1 * x1 + eps * eps * float(rng.uniform(lo, hi))
    return JniPoint(x1, x2), JniParams(eps, delta)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(b))


Checks = list[tuple[float, float]]


# ---------------------------------------------------------------------------
# suites


def suite_boundary(rng, n: int) -> Checks:
    out: Checks = []
    for _ in range(n):
        w = random_window(rng)
        x1 = float(rng.uniform(-2.0, 2.0))
        x3 = w.m + w.width * float(rng.random())
        pt = CetPoint(x1, x1 * x1, x3)
        out.append((abs(cet.eval_bmax(pt, w).value - x1 * x1 * x3), 1e-10 * max(1.0, x1 * x1 * x3)))
        out.append((abs(cet.eval_bmin(pt, w).value - x1 * x1 * x3), 1e-10 * max(1.0, x1 * x1 * x3)))
        y1 = float(rng.uniform(-3.0, 3.0))
        params = JniParams(0.5, float(rng.uniform(0.5, 0.95)))
        out.append((abs(jni.eval_jni(JniPoint(y1, y1 * y1), params) - math.exp(y1)), 1e-10 * max(1.0, math.exp(y1))))
        up = random_point(rng, Window(0.0, 1.0))
        up = CetPoint(up.x1, up.x2, 1.0)
        root = math.sqrt(max(up.x2 - up.x1**2, 0.0))
        u = Window(0.0, 1.0)
        out.append((abs(cet.eval_bmax(up, u).value - (math.sqrt(up.x2) + root) ** 2), 1e-9))
        out.append((abs(cet.eval_bmin(up, u).value - (math.sqrt(up.x2) - root) ** 2), 1e-9))
    return out


def suite_homogeneity(rng, n: int) -> Checks:
    out: Checks = []
    for _ in range(n):
        w = random_window(rng)
        pt = random_point(rng, w)
        t = float(rng.uniform(-3.0, 3.0)) or 1.0
        for ev in (cet.eval_bmax, cet.eval_bmin):
            b = ev(pt, w).value
            bt = ev(CetPoint(t * pt.x1, t * t * pt.x2, pt.x3), w).value
            out.append((_rel(bt, t * t * b), 1e-9))
        q, params = random_jni(rng)
        tt = float(rng.uniform(-1.0, 1.0))
        b = jni.eval_jni(q, params)
        shifted = JniPoint(q.x1 + tt, q.x2 + 2 * q.x1 * tt + tt * tt)
        bt = jni.eval_jni(shifted, params)
        out.append((abs(bt - math.exp(tt) * b) / max(1.0, abs(bt)), 1e-9))
        p = float(rng.choice([1.5, 2.5, 3.0, 4.0]))
        ex = Exponent(p)
        lpt = random_point(rng, w, p=p, radius=1.5)
        tp = float(rng.uniform(0.2, 3.0))
        for br in (Branch.PLUS, Branch.MINUS):
            b = lp.eval_lp(lpt, w, ex, br).value
            bt = lp.eval_lp(CetPoint(tp * lpt.x1, tp**p * lpt.x2, lpt.x3), w, ex, br).value
            out.append((_rel(bt, tp**p * b), 1e-8))
    return out


def suite_rescale(rng, n: int) -> Checks:
    out: Checks = []
    unit = Window(0.0, 1.0)
    for _ in range(n):
        w = random_window(rng, unit_prob=0.0)
        pt = random_point(rng, w)
        up = rescale_to_unit(pt, w)
        for ev in (cet.eval_bmax, cet.eval_bmin):
            direct = ev(pt, w).value
            via = w.width * ev(up, unit).value + w.m * pt.x2
            out.append((_rel(direct, via), 1e-9))
    return out


def _eig_checks(rng, n: int, with_ma: bool, with_eig: bool) -> Checks:
    out: Checks = []
    for _ in range(n):
        w = random_window(rng)
        pt = interior_point(rng, w)
        b = cet.eval_bmax(pt, w).value
        H = cet.hessian_fd(pt, w, Branch.PLUS)
        ev = np.linalg.eigvalsh(H)
        nh = float(np.linalg.norm(H, 2))
        if with_eig:
            out.append((max(0.0, float(ev.max())), 1e-6 * cet.scale_of(b)))
        if with_ma:
            d = cet.kernel_direction(pt, w)
            out.append((abs(float(np.linalg.det(H))), 1e-6 * nh**3))
            out.append((float(np.linalg.norm(H @ d)), 1e-6 * nh * float(np.linalg.norm(d))))
        qm = random_minus_point(rng, w)
        bm = cet.eval_bmin(qm, w).value
        Hm = cet.hessian_fd(qm, w, Branch.MINUS)
        evm = np.linalg.eigvalsh(Hm)
        if with_eig:
            out.append((max(0.0, -float(evm.min())), 1e-6 * cet.scale_of(bm)))
        if with_ma:
            out.append((abs(float(np.linalg.det(Hm))), 1e-6 * float(np.linalg.norm(Hm, 2)) ** 3))
        q, params = random_jni(rng, interior=True)
        Hj = jni.jni_hessian_fd(q, params)
        bj = jni.eval_jni(q, params)
        if with_eig:
            out.append((max(0.0, float(np.linalg.eigvalsh(Hj).max())), 1e-7 * max(1.0, bj)))
        if with_ma:
            out.append((abs(float(np.linalg.det(Hj))), 1e-7 * float(np.linalg.norm(Hj, 2)) ** 2))
    return out


def suite_concavity(rng, n: int) -> Checks:
    return _eig_checks(rng, n, with_ma=False, with_eig=True)


def suite_ma(rng, n: int) -> Checks:
    return _eig_checks(rng, n, with_ma=True, with_eig=False)


def suite_euler(rng, n: int) -> Checks:
    out: Checks = []
    for _ in range(n):
        w = random_window(rng)
        for br, draw in ((Branch.PLUS, interior_point), (Branch.MINUS, random_minus_point)):
            pt = draw(rng, w)
            b = cet.eval_b(pt, w, br).value
            g = cet.gradient(pt, w, br)
            out.append((_rel(0.5 * g[0] * pt.x1 + g[1] * pt.x2, b), 1e-8))
            x = np.array([pt.x1, pt.x2, pt.x3])
            for i in range(3):
                h = 1e-6 * max(1.0, abs(x[i]))
                e = np.zeros(3)
                e[i] = h
                fp = cet.eval_b(CetPoint(*(x + e)), w, br).value
                fm = cet.eval_b(CetPoint(*(x - e)), w, br).value
                fd = (fp - fm) / (2 * h)
                out.append((abs(fd - g[i]) / max(1.0, abs(g[i])), 1e-6))
    return out


def suite_mibc(rng, n: int) -> Checks:
    out: Checks = []
    for _ in range(n):
        w = random_window(rng)
        xp = random_point(rng, w)
        xm = random_point(rng, w)
        room = w.M - 0.5 * (xp.x3 + xm.x3)
        surplus = float(rng.uniform(0.0, room)) if rng.random() < 0.8 else 0.0
        gap = cet.main_inequality_gap(xp, xm, surplus, w)
        mid = CetPoint(0.5 * (xp.x1 + xm.x1), 0.5 * (xp.x2 + xm.x2), 0.5 * (xp.x3 + xm.x3) + surplus)
        out.append((max(0.0, -gap), 1e-9 * cet.scale_of(cet.eval_bmax(mid, w).value)))
    return out


def suite_foliation(rng, n: int) -> Checks:
    out: Checks = []
    for _ in range(n):
        w = random_window(rng)
        for br, draw in ((Branch.PLUS, interior_point), (Branch.MINUS, random_minus_point)):
            pt = draw(rng, w)
            fr = foliation.recover_parameters(pt, w, br)
            x1, x2 = foliation.extremal_line_point(fr.a, fr.xi1, pt.x3, w)
            out.append((abs(x1 - pt.x1) / max(1.0, abs(pt.x1)), 1e-10))
            out.append((abs(x2 - pt.x2) / max(1.0, abs(pt.x2)), 1e-10))
            ev = cet.eval_bmax if br is Branch.PLUS else cet.eval_bmin
            pts = [fr.point_at(x3) for x3 in (w.m, 0.5 * (w.m + w.M), w.M)]
            vals = [ev(q, w).value for q in pts]
            sc = max(1.0, *map(abs, vals))
            out.append((abs(vals[0] - 2 * vals[1] + vals[2]) / sc, 1e-8))
            for q, v in zip(pts, vals):
                out.append((abs(fr.affine_value(q) - v) / sc, 1e-8))
                plane = fr.t1 * q.x1 + 2 * fr.t3 * q.x3 + 2 * fr.t0
                out.append((abs(plane) / max(1.0, abs(fr.t1 * q.x1)), 1e-8))
            out.append((abs(foliation.hyperbola_residual(fr.zeta1, fr.zeta2, fr.xi1)) / max(1.0, fr.zeta2), 1e-10))
            if br is Branch.PLUS:
                out.append((foliation.tangency_gap(fr.a, fr.t1, w), 1e-10))
    return out


def suite_lp2(rng, n: int) -> Checks:
    out: Checks = []
    two = Exponent(2.0)
    for _ in range(n):
        w = random_window(rng)
        pt = random_point(rng, w)
        out.append((_rel(lp.eval_lp(pt, w, two, Branch.PLUS).value, cet.eval_bmax(pt, w).value), 1e-9))
        out.append((_rel(lp.eval_lp(pt, w, two, Branch.MINUS).value, cet.eval_bmin(pt, w).value), 1e-9))
        p = float(rng.choice([1.5, 3.0, 4.0]))
        ex = Exponent(p)
        x1 = float(rng.uniform(-1.5, 1.5))
        x3 = w.m + w.width * float(rng.random())
        bnd = CetPoint(x1, abs(x1) ** p, x3)
        target = abs(x1) ** p * x3
        out.append((abs(lp.eval_lp(bnd, w, ex).value - target) / max(1.0, target), 1e-10))
        q = random_point(rng, w, p=p, s_range=(0.05, 0.95), radius=1.5)
        h = 1e-4 * w.width
        f = [lp._lp_raw(q.x1, q.x2, w.M - k * h, w, ex, Branch.PLUS)[0] for k in range(3)]
        slope = (3 * f[0] - 4 * f[1] + f[2]) / (2 * h)
        xp = abs(q.x1) ** p
        out.append((abs(slope - xp) / max(xp, 1e-300), 1e-5))
    return out


def suite_greens(rng, n: int) -> Checks:
    out: Checks = []
    for _ in range(max(1, n // 100)):
        x1 = float(rng.uniform(0.3, 1.5)) * (1 if rng.random() < 0.5 else -1)
        x2 = x1 * x1 / float(rng.uniform(0.2, 1.0))
        nn = int(rng.integers(2, 5))
        plan = extremal.ExtremalPlan.create(x1, x2, nn, 2 * nn)
        phi, alpha = plan.build()
        D = 2 * nn + 2
        f = extremal.bellman_tree(phi, alpha, D)
        out.append((abs(extremal.greens_gap(f)), 1e-12 * max(1.0, abs(f.levels[0][0]))))
        out.append((max(0.0, -extremal.proof_chain_gap(phi, alpha, D)), 1e-9))
        out.append((max(0.0, extremal.jimage_gap(phi, alpha, plan)), 1e-12))
        out.append((0.0 if alpha.is_packed() else 1.0, 0.5))
    return out


SUITES: dict[str, Callable] = {
    "boundary": suite_boundary,
    "homogeneity": suite_homogeneity,
    "rescale": suite_rescale,
    "concavity": suite_concavity,
    "ma": suite_ma,
    "euler": suite_euler,
    "mibc": suite_mibc,
    "foliation": suite_foliation,
    "lp2": suite_lp2,
    "greens": suite_greens,
}


def run_suite(name: str, samples: int, seed: int, tol: float | None = None) -> RunReport:
    if name not in SUITES:
        raise KeyError(name)
    t0 = time.perf_counter()
    checks = SUITES[name](make_rng(seed), samples)
    errs = np.array([c[0] for c in checks], dtype=float)
    tols = np.array([c[1] for c in checks], dtype=float)
    if tol is not None:
        tols = np.full_like(errs, tol)
    bad = ~(errs <= tols)
    ratio = np.where(tols > 0, errs / np.where(tols > 0, tols, 1.0), np.where(errs > 0, np.inf, 0.0))
    ratio = np.where(np.isnan(errs), np.inf, ratio)
    k = int(np.argmax(ratio)) if ratio.size else 0
    n_drawn = max(1, samples // 100) if name == "greens" else samples
    return RunReport(
        suite=name,
        samples=n_drawn,
        failures=int(bad.sum()),
        worst_violation=float(errs[k]) if errs.size else 0.0,
        tolerance=float(tols[k]) if tols.size else 0.0,
        seed=seed,
        elapsed_ms=int(round(1000 * (time.perf_counter() - t0))),
    )
