"""Command-line interface: eval, verify, extremal, foliate, sweep.

Single results and reports are printed as one JSON object per line; tables
are CSV with a header row. Exit codes: 0 success, 1 verification failure,
2 usage or domain error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict

import numpy as np

from . import cet, extremal, foliation, jni, lp
from .domain import Branch, CetPoint, Exponent, JniParams, JniPoint, Window
from .errors import CarlbellError, DepthTooSmall
from .suites import SUITES, default_seed, run_suite

SIG = 9


class UsageError(Exception):
    pass


def fmt(v) -> str:
    """Number formatted to 9 significant digits for CSV cells."""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float) or isinstance(v, np.floating):
        return f"{float(v):.{SIG}g}"
    return str(v)


def _json_value(v):
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return float(f"{v:.{SIG}g}") if math.isfinite(v) else None
    return v


def emit_json(obj: dict, out=None) -> None:
    out = out or sys.stdout
    out.write(json.dumps({k: _json_value(v) for k, v in obj.items()}) + "\n")


def write_csv(header: list[str], rows, path: str | None) -> None:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for row in rows:
        wr.writerow([fmt(v) for v in row])
    if path in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())


# ---------------------------------------------------------------------------
# commands


def cmd_eval(args) -> int:
    if args.which == "jni":
        if args.eps is None:
            raise UsageError("--eps is required for --which jni")
        delta = args.eps if args.delta is None else args.delta
        params = JniParams(args.eps, delta)
        v = jni.eval_jni(JniPoint(args.x1, args.x2), params)
        emit_json({"value": v, "delta": delta})
        return 0
    if args.x3 is None:
        raise UsageError(f"--x3 is required for --which {args.which}")
    w = Window(args.m, args.M)
    pt = CetPoint(args.x1, args.x2, args.x3)
    if args.which == "bmax":
        res = cet.eval_bmax(pt, w)
    elif args.which == "bmin":
        res = cet.eval_bmin(pt, w)
    else:
        res = lp.eval_lp(pt, w, Exponent(args.p), Branch.parse(args.branch))
    emit_json({"value": res.value, "a": res.a, "branch": res.branch.value})
    return 0


def cmd_verify(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    seed = default_seed() if args.seed is None else args.seed
    failed = False
    for name in names:
        rep = run_suite(name, args.samples, seed, args.tol)
        emit_json(asdict(rep))
        failed |= rep.failures > 0
    return 1 if failed else 0


def cmd_extremal(args) -> int:
    if args.depth < 2 * args.n:
        raise DepthTooSmall(f"depth {args.depth} < 2n = {2 * args.n}")
    if args.x3 is None:
        plan = extremal.ExtremalPlan.create(args.x1, args.x2, args.n, args.depth)
        phi, alpha = plan.build(tail=args.tail, budget=args.budget)
        total = extremal.carleson_sum(phi, alpha)
        target = plan.target()
        x1, x2 = args.x1, args.x2
        extra = {"alpha_total": float(alpha.total()), "c_n": plan.c_n, "d_n": plan.d_n}
    else:
        w = Window(args.m, args.M)
        pt = CetPoint(args.x1, args.x2, args.x3)
        mix = extremal.mix_line(pt, w, args.n, args.mix_k)
        phi, alpha = mix.phi, mix.alpha
        total = w.width * extremal.carleson_sum(phi, alpha) + w.m * args.x2
        target = cet.eval_bmax(pt, w).value
        x1, x2 = args.x1, args.x2
        extra = {"theta": mix.theta, "x3_err": abs(w.m + w.width * float(alpha.total()) - args.x3)}
    summary = {
        "sum": total,
        "target": target,
        "ratio": total / target if target else math.nan,
        "mean_err": abs(phi.mean() - x1),
        "second_moment_err": abs(phi.second_moment() - x2),
        "packed": alpha.is_packed(),
    }
    summary.update(extra)
    emit_json(summary)
    if args.emit:
        write_csv(
            ["kind", "depth", "index", "value", "alpha_num", "alpha_exp"],
            extremal.export_rows(phi, alpha),
            args.emit,
        )
    return 0


def foliate_rows(w: Window, xi1: float, branch: Branch, count: int, x3_steps: int):
    if count < 1 or x3_steps < 2:
        raise UsageError("need --count >= 1 and --x3-steps >= 2")
    W = w.width
    rows = []
    for j in range(count):
        # u = 1 - 4aW runs over (0, 1] for plus and [1, count] for minus
        u = 1.0 - j / count if branch is Branch.PLUS else 1.0 / (1.0 - j / count)
        a = (1.0 - u) / (4.0 * W)
        z1, z2 = foliation.upper_trace(a, xi1, w)
        t1 = -xi1 / (a * (1.0 - 2.0 * a * W)) if a != 0.0 else 0.0
        gap = foliation.tangency_gap(a, t1, w)
        for i in range(x3_steps):
            x3 = w.m + W * i / (x3_steps - 1)
            x1, x2 = foliation.extremal_line_point(a, xi1, x3, w)
            rows.append((a, x3, x1, x2, z1, z2, gap))
    return rows


def cmd_foliate(args) -> int:
    w = Window(args.m, args.M)
    rows = foliate_rows(w, args.xi1, Branch.parse(args.branch), args.count, args.x3_steps)
    write_csv(["a", "x3", "x1", "x2", "zeta1", "zeta2", "tangency_gap"], rows, args.out)
    return 0


def parse_grid(spec: str) -> dict[str, np.ndarray]:
    axes: dict[str, np.ndarray] = {}
    try:
        for part in spec.split(","):
            name, rng_ = part.split("=")
            lo, hi, cnt = rng_.split(":")
            name = name.strip()
            if name not in ("x1", "x2", "x3") or name in axes or int(cnt) < 1:
                raise ValueError(part)
            axes[name] = np.linspace(float(lo), float(hi), int(cnt))
    except ValueError as exc:
        raise UsageError(f"malformed grid spec {spec!r}: expected x1=a:b:n,x2=a:b:n[,x3=a:b:n]") from exc
    return axes


def cmd_sweep(args) -> int:
    axes = parse_grid(args.grid)
    need = ("x1", "x2") if args.which == "jni" else ("x1", "x2", "x3")
    missing = [k for k in need if k not in axes]
    if missing:
        raise UsageError(f"grid is missing axes {missing}")
    if args.which == "jni":
        if args.eps is None:
            raise UsageError("--eps is required for --which jni")
        params = JniParams(args.eps, args.eps if args.delta is None else args.delta)
    else:
        w = Window(args.m, args.M)
        ex = Exponent(args.p)
    rows = []
    grids = np.meshgrid(*[axes[k] for k in need], indexing="ij")
    for cell in zip(*[g.ravel() for g in grids]):
        cell = tuple(float(c) for c in cell)
        try:
            if args.which == "jni":
                v = jni.eval_jni(JniPoint(*cell), params)
            elif args.which == "bmax":
                v = cet.eval_bmax(CetPoint(*cell), w).value
            elif args.which == "bmin":
                v = cet.eval_bmin(CetPoint(*cell), w).value
            else:
                v = lp.eval_lp(CetPoint(*cell), w, ex, Branch.parse(args.branch)).value
        except CarlbellError:
            v = math.nan
        rows.append((*cell, v))
    write_csv([*need, "value"], rows, args.out)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="carlbell", description="Sharp Bellman functions for Carleson embedding and John-Nirenberg.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def window(p):
        p.add_argument("--m", type=float, default=0.0)
        p.add_argument("--M", type=float, default=1.0)

    e = sub.add_parser("eval", help="evaluate one Bellman function at one point")
    e.add_argument("--which", choices=["bmax", "bmin", "jni", "lp"], required=True)
    e.add_argument("--x1", type=float, required=True)
    e.add_argument("--x2", type=float, required=True)
    e.add_argument("--x3", type=float)
    window(e)
    e.add_argument("--p", type=float, default=2.0)
    e.add_argument("--branch", choices=["plus", "minus"], default="plus")
    e.add_argument("--eps", type=float)
    e.add_argument("--delta", type=float)
    e.set_defaults(func=cmd_eval)

    v = sub.add_parser("verify", help="run seeded invariant suites")
    v.add_argument("--suite", choices=[*SUITES, "all"], required=True)
    v.add_argument("--samples", type=int, default=100)
    v.add_argument("--seed", type=int)
    v.add_argument("--tol", type=float)
    v.set_defaults(func=cmd_verify)

    x = sub.add_parser("extremal", help="build the extremal sequence and report its embedding sum")
    x.add_argument("--x1", type=float, required=True)
    x.add_argument("--x2", type=float, required=True)
    x.add_argument("--n", type=int, required=True)
    x.add_argument("--depth", type=int, required=True)
    x.add_argument("--emit", metavar="PATH")
    x.add_argument("--x3", type=float)
    window(x)
    x.add_argument("--mix-k", type=int, default=10)
    x.add_argument("--tail", choices=["exact", "flat"], default="exact")
    x.add_argument("--budget", type=int, default=extremal.DEFAULT_BUDGET)
    x.set_defaults(func=cmd_extremal)

    f = sub.add_parser("foliate", help="tabulate a fan of extremal lines")
    window(f)
    f.add_argument("--xi1", type=float, required=True)
    f.add_argument("--branch", choices=["plus", "minus"], default="plus")
    f.add_argument("--count", type=int, required=True)
    f.add_argument("--x3-steps", type=int, default=3)
    f.add_argument("--out", metavar="PATH")
    f.set_defaults(func=cmd_foliate)

    s = sub.add_parser("sweep", help="evaluate on a Cartesian grid")
    s.add_argument("--which", choices=["bmax", "bmin", "jni", "lp"], required=True)
    s.add_argument("--grid", required=True)
    window(s)
    s.add_argument("--p", type=float, default=2.0)
    s.add_argument("--branch", choices=["plus", "minus"], default="plus")
    s.add_argument("--eps", type=float)
    s.add_argument("--delta", type=float)
    s.add_argument("--out", metavar="PATH")
    s.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, CarlbellError, ValueError) as exc:
        sys.stderr.write(f"carlbell {args.cmd}: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
