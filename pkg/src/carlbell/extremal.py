"""Near-extremal test functions and Carleson weights on the dyadic tree.

The extremal function phi_n is self-similar: on J = [0, 2^-n] it equals
c_n*x1, on I_k = [2^-k, 2^-k+1] (k >= 2) it is a shrunken copy of itself and
on I_1 a copy scaled by d_n. The weights put beta*|I| (beta = 2^-n) on every
image I of [0, 1] under the recursion.

Both objects are stored as a finite list of pieces in which a piece is either
a constant (resp. an explicit weight) or a scaled copy of a template placed
on a dyadic node. A template is another finite object or the object itself
(``SELF``). Moments, weight totals and embedding sums are then exact fixed
points of finite linear equations, so no truncation error is incurred; the
recursion can still be unrolled to a chosen depth, and a "flat" mode cuts it
there by replacing every unexpanded copy with its mean.
"""
from __future__ import annotations

import bisect
import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from . import cet
from .domain import UNIT, CetPoint, Window
from .errors import CarlbellError, DepthTooSmall, DomainError, NoRealRoot, NotSuperharmonic
from .foliation import recover_parameters

DEFAULT_BUDGET = 256
LAPLACIAN_TOL = 1e-12


class _Self:
    """Marker for a copy of the enclosing object."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "SELF"


SELF = _Self()


@dataclass(frozen=True, order=True)
class DyadicNode:
    depth: int
    index: int

    def __post_init__(self):
        if self.depth < 0 or not 0 <= self.index < (1 << self.depth):
            raise DomainError(f"invalid dyadic node ({self.depth}, {self.index})")

    @property
    def measure(self) -> Fraction:
        return Fraction(1, 1 << self.depth)

    @property
    def left(self) -> Fraction:
        return Fraction(self.index, 1 << self.depth)

    @property
    def right(self) -> Fraction:
        return Fraction(self.index + 1, 1 << self.depth)

    def children(self) -> tuple["DyadicNode", "DyadicNode"]:
        return DyadicNode(self.depth + 1, 2 * self.index), DyadicNode(self.depth + 1, 2 * self.index + 1)

    def parent(self) -> "DyadicNode":
        if self.depth == 0:
            raise DomainError("the root has no parent")
        return DyadicNode(self.depth - 1, self.index >> 1)

    def contains(self, other: "DyadicNode") -> bool:
        """True when other is this node or one of its descendants."""
        k = other.depth - self.depth
        return k >= 0 and (other.index >> k) == self.index

    def compose(self, rel: "DyadicNode") -> "DyadicNode":
        """Image of a node of [0, 1] under the affine map [0, 1] -> self."""
        return DyadicNode(self.depth + rel.depth, (self.index << rel.depth) | rel.index)

    def relative(self, inner: "DyadicNode") -> "DyadicNode":
        """Inverse of compose: inner expressed in this node's coordinates."""
        k = inner.depth - self.depth
        if k < 0 or (inner.index >> k) != self.index:
            raise DomainError(f"{inner} is not inside {self}")
        return DyadicNode(k, inner.index - (self.index << k))


ROOT = DyadicNode(0, 0)


# ---------------------------------------------------------------------------
# step functions


@dataclass(frozen=True)
class Segment:
    node: DyadicNode
    value: float
    template: object = None  # None, SELF or a StepFunction

    @property
    def is_copy(self) -> bool:
        return self.template is not None


class _PieceIndex:
    """Sorted dyadic pieces that tile (or sit inside) [0, 1]."""

    def __init__(self, nodes: list[DyadicNode]):
        self.K = max((nd.depth for nd in nodes), default=0)
        self.lefts = [nd.index << (self.K - nd.depth) for nd in nodes]
        self.nodes = nodes

    def _scaled(self, depth: int, index: int) -> int:
        if depth <= self.K:
            return index << (self.K - depth)
        return index >> (depth - self.K)

    def locate(self, node: DyadicNode) -> tuple[int, int, int]:
        """(i, lo, hi): i >= 0 when piece i contains node, else pieces lo..hi-1 lie in node."""
        left = self._scaled(node.depth, node.index)
        i = bisect.bisect_right(self.lefts, left) - 1
        if i >= 0 and self.nodes[i].contains(node):
            return i, 0, 0
        if node.depth >= self.K:
            return -1, 0, 0
        right = (node.index + 1) << (self.K - node.depth)
        lo = bisect.bisect_left(self.lefts, left)
        hi = bisect.bisect_left(self.lefts, right)
        return -1, lo, hi


@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant function on [0, 1] built from dyadic segments."""

    segments: tuple[Segment, ...]

    def __post_init__(self):
        segs = tuple(sorted(self.segments, key=lambda sg: sg.node.left))
        object.__setattr__(self, "segments", segs)
        pos = Fraction(0)
        self_mass = Fraction(0)
        for sg in segs:
            if sg.node.left != pos:
                raise DomainError("segments must tile [0, 1] without gaps or overlaps")
            pos = sg.node.right
            if sg.template is SELF:
                if sg.node.depth == 0:
                    raise DomainError("a self copy cannot cover the whole interval")
                self_mass += sg.node.measure
            elif sg.template is not None and not isinstance(sg.template, StepFunction):
                raise DomainError(f"bad template {sg.template!r}")
        if pos != 1:
            raise DomainError("segments must tile [0, 1]")
        if self_mass >= 1:
            raise DomainError("self copies must leave part of [0, 1] uncovered")

    # constructors
    @classmethod
    def constant(cls, value: float) -> "StepFunction":
        return cls((Segment(ROOT, float(value)),))

    @classmethod
    def from_leaves(cls, values: Iterable[float]) -> "StepFunction":
        vals = np.asarray(list(values), dtype=float)
        D = int(round(math.log2(len(vals))))
        if 1 << D != len(vals):
            raise DomainError("number of leaf values must be a power of two")
        return cls(tuple(Segment(DyadicNode(D, i), float(v)) for i, v in enumerate(vals)))

    @cached_property
    def _index(self) -> _PieceIndex:
        return _PieceIndex([sg.node for sg in self.segments])

    @property
    def depth(self) -> int:
        return self._index.K

    def _seg_moment(self, sg: Segment, order: int) -> float:
        if sg.template is None:
            return sg.value**order
        if sg.template is SELF:
            return sg.value**order * self._moment(order)
        return sg.value**order * sg.template._moment(order)

    def _moment(self, order: int) -> float:
        return self.mean() if order == 1 else self.second_moment()

    def _fixed_point(self, order: int) -> float:
        num, self_coef = [], Fraction(0)
        for sg in self.segments:
            w = float(sg.node.measure)
            if sg.template is SELF:
                # exact, since 1 - self_coef can be as small as 2^-n
                self_coef += sg.node.measure * Fraction(sg.value) ** order
            elif sg.template is None:
                num.append(w * sg.value**order)
            else:
                num.append(w * sg.value**order * sg.template._moment(order))
        den = float(1 - self_coef)
        if den <= 0.0:
            raise DomainError(f"self-similar moment of order {order} diverges")
        return math.fsum(num) / den

    def mean(self) -> float:
        return self._mean

    def second_moment(self) -> float:
        return self._second

    @cached_property
    def _mean(self) -> float:
        return self._fixed_point(1)

    @cached_property
    def _second(self) -> float:
        return self._fixed_point(2)

    def _average(self, node: DyadicNode, order: int) -> float:
        i, lo, hi = self._index.locate(node)
        if i >= 0:
            sg = self.segments[i]
            if sg.template is None:
                return sg.value**order
            rel = sg.node.relative(node)
            tmpl = self if sg.template is SELF else sg.template
            return sg.value**order * tmpl._average(rel, order)
        if node.depth == 0:
            return self._moment(order)
        parts = [float(self.segments[j].node.measure) * self._seg_moment(self.segments[j], order) for j in range(lo, hi)]
        return math.fsum(parts) / float(node.measure)

    def average(self, node: DyadicNode = ROOT) -> float:
        """Exact mean of the function over a dyadic node."""
        return self._average(node, 1)

    def average2(self, node: DyadicNode = ROOT) -> float:
        """Exact mean of the squared function over a dyadic node."""
        return self._average(node, 2)

    def value_on(self, node: DyadicNode) -> float:
        """Value on a node where the function is constant."""
        i, _, _ = self._index.locate(node)
        if i < 0:
            raise DomainError(f"{node} is not inside a single segment")
        sg = self.segments[i]
        if sg.template is None:
            return sg.value
        tmpl = self if sg.template is SELF else sg.template
        return sg.value * tmpl.value_on(sg.node.relative(node))

    def level_moments(self, D: int) -> tuple[np.ndarray, np.ndarray]:
        """Means of phi and phi^2 over the 2^D nodes of depth D."""
        return self._level(D, 1), self._level(D, 2)

    def leaf_values(self, D: int) -> np.ndarray:
        """Averages on the depth-D leaves (the values of the depth-D projection)."""
        return self._level(D, 1)

    def _level(self, D: int, order: int, _memo=None) -> np.ndarray:
        memo = {} if _memo is None else _memo
        key = (id(self), D, order)
        if key in memo:
            return memo[key]
        out = np.zeros(1 << D)
        for sg in self.segments:
            nd = sg.node
            if nd.depth <= D:
                k = D - nd.depth
                sl = slice(nd.index << k, (nd.index + 1) << k)
                if sg.template is None:
                    out[sl] = sg.value**order
                else:
                    tmpl = self if sg.template is SELF else sg.template
                    out[sl] = sg.value**order * tmpl._level(k, order, memo)
            else:
                out[nd.index >> (nd.depth - D)] += self._seg_moment(sg, order) * 2.0 ** (D - nd.depth)
        memo[key] = out
        return out

    def scaled(self, factor: float) -> "StepFunction":
        return StepFunction(tuple(Segment(sg.node, factor * sg.value, sg.template) for sg in self.segments))


# ---------------------------------------------------------------------------
# weights


def _dyadic(x: Fraction) -> Fraction:
    x = Fraction(x)
    if x < 0:
        raise DomainError("Carleson weights must be nonnegative")
    den = x.denominator
    if den & (den - 1):
        raise DomainError(f"weight {x} is not a dyadic rational")
    return x


@dataclass(frozen=True)
class CarlesonWeights:
    """Sparse nonnegative weights alpha on dyadic nodes.

    ``explicit`` maps nodes to exact dyadic rationals; each entry of
    ``copies`` is (node, template) and places |node| times the template's
    weights on the subtree of node.
    """

    explicit: Mapping[DyadicNode, Fraction] = field(default_factory=dict)
    copies: tuple[tuple[DyadicNode, object], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "explicit", {nd: _dyadic(v) for nd, v in self.explicit.items()})
        cps = tuple(sorted(self.copies, key=lambda c: c[0].left))
        object.__setattr__(self, "copies", cps)
        end = Fraction(0)
        self_mass = Fraction(0)
        for nd, tmpl in cps:
            if nd.left < end:
                raise DomainError("weight copies must be disjoint")
            end = nd.right
            if tmpl is SELF:
                if nd.depth == 0:
                    raise DomainError("a self copy cannot sit on the root")
                self_mass += nd.measure
            elif not isinstance(tmpl, CarlesonWeights):
                raise DomainError(f"bad template {tmpl!r}")
        if self_mass >= 1:
            raise DomainError("self copies must leave part of [0, 1] uncovered")
        for nd in self.explicit:
            if self._copy_of(nd) is not None:
                raise DomainError(f"explicit weight at {nd} overlaps a copy")

    @cached_property
    def _copy_index(self) -> _PieceIndex:
        return _PieceIndex([c[0] for c in self.copies])

    def _copy_of(self, node: DyadicNode):
        if not self.copies:
            return None
        i, _, _ = self._copy_index.locate(node)
        return self.copies[i] if i >= 0 else None

    def _template(self, tmpl) -> "CarlesonWeights":
        return self if tmpl is SELF else tmpl

    @cached_property
    def _total(self) -> Fraction:
        num = sum(self.explicit.values(), Fraction(0))
        self_mass = Fraction(0)
        for nd, tmpl in self.copies:
            if tmpl is SELF:
                self_mass += nd.measure
            else:
                num += nd.measure * tmpl.total()
        return num / (1 - self_mass)

    def total(self) -> Fraction:
        """Sum of all weights."""
        return self._total

    def alpha(self, node: DyadicNode) -> Fraction:
        if node in self.explicit:
            return self.explicit[node]
        cp = self._copy_of(node)
        if cp is None:
            return Fraction(0)
        nd, tmpl = cp
        return nd.measure * self._template(tmpl).alpha(nd.relative(node))

    @cached_property
    def _closure(self) -> tuple[dict[DyadicNode, int], int]:
        """Integer masses (over a common denominator) of all piece ancestors."""
        pieces = [(nd, v) for nd, v in self.explicit.items()]
        pieces += [(nd, nd.measure * self._template(t).total()) for nd, t in self.copies]
        den = 1
        for _, v in pieces:
            den = den * v.denominator // math.gcd(den, v.denominator)
        mass: dict[DyadicNode, int] = {}
        for nd, v in pieces:
            iv = v.numerator * (den // v.denominator)
            d, i = nd.depth, nd.index
            while True:
                key = DyadicNode(d, i)
                mass[key] = mass.get(key, 0) + iv
                if d == 0:
                    break
                d, i = d - 1, i >> 1
        return mass, den

    def mass(self, node: DyadicNode) -> Fraction:
        """Sum of alpha over node and all its descendants."""
        cp = self._copy_of(node)
        if cp is not None:
            nd, tmpl = cp
            return nd.measure * self._template(tmpl).mass(nd.relative(node))
        masses, den = self._closure
        return Fraction(masses.get(node, 0), den)

    def is_packed(self) -> bool:
        """Exact check of sum_{l in I} alpha_l <= |I| for every dyadic I.

        Nodes inside a copy reduce to the template (for a self copy, to a
        strictly shallower node), so checking the ancestors of all pieces
        settles the whole tree.
        """
        return self._packed

    @cached_property
    def _packed(self) -> bool:
        masses, den = self._closure
        if any(v * (1 << nd.depth) > den for nd, v in masses.items()):
            return False
        templates = {id(t): t for _, t in self.copies if t is not SELF}
        return all(t.is_packed() for t in templates.values())


# ---------------------------------------------------------------------------
# the construction


def solve_cn_dn(s: float, n: int) -> tuple[float, float]:
    """Constants of the self-similar extremal function.

    With beta = 2^-n, c solves (s + 2 beta) c^2 - (2 + 4 beta) c + 1 + 2 beta = 0
    (smaller root) and d = 1 + 2 beta (1 - c). The discriminant factors as
    4 (1 + 2 beta)(1 - s), which gives the cancellation-free form below.
    Because c is read back from d, it carries a relative rounding of about
    2^(n - 53); n up to ~30 keeps it below 1e-7.
    """
    if not 0.0 < s <= 1.0:
        raise DomainError(f"s must lie in (0, 1], got {s}")
    if n < 1:
        raise DomainError("n must be a positive integer")
    beta = 2.0**-n
    b = 1.0 + 2.0 * beta
    disc = b * (1.0 - s)
    if disc < 0.0:
        raise NoRealRoot(f"negative discriminant {disc}")
    c = b / (b + math.sqrt(disc))
    d = 1.0 + 2.0 * beta * (1.0 - c)
    # d - 1 is exact in binary; recomputing c from it makes the first-moment
    # equation exact, which matters because the self-similar mean divides by beta*c
    c = 1.0 - (d - 1.0) / (2.0 * beta)
    return c, d


@dataclass(frozen=True)
class ExtremalPlan:
    """Recipe for phi_n: scale n, constants c_n, d_n and unrolling depth."""

    n: int
    c_n: float
    d_n: float
    depth: int
    x1: float
    x2: float

    @classmethod
    def create(cls, x1: float, x2: float, n: int, depth: int) -> "ExtremalPlan":
        if not (math.isfinite(x1) and math.isfinite(x2)):
            raise DomainError("non-finite moments")
        if x1 == 0.0:
            raise DomainError("x1 = 0 is only reachable as a limit; use a small nonzero x1")
        if x1 * x1 > x2 * (1.0 + 1e-15):
            raise DomainError(f"need x1^2 <= x2, got x1={x1}, x2={x2}")
        if depth < 2 * n:
            raise DepthTooSmall(f"depth {depth} < 2n = {2 * n}")
        c, d = solve_cn_dn(min(x1 * x1 / x2, 1.0), n)
        return cls(n=n, c_n=c, d_n=d, depth=depth, x1=x1, x2=x2)

    @property
    def beta(self) -> Fraction:
        return Fraction(1, 1 << self.n)

    def target(self) -> float:
        """Upper-lid value (sqrt(x2) + sqrt(x2 - x1^2))^2 approached as n grows."""
        return (math.sqrt(self.x2) + math.sqrt(max(self.x2 - self.x1 * self.x1, 0.0))) ** 2

    def exact_sum(self) -> float:
        """Closed form x2 / c_n^2 of the embedding sum of the construction."""
        return self.x2 / (self.c_n * self.c_n)

    def core(self) -> tuple[StepFunction, CarlesonWeights]:
        """The recursion itself: n + 1 pieces, n of them self copies."""
        n = self.n
        segs = [Segment(DyadicNode(n, 0), self.c_n * self.x1)]
        segs += [Segment(DyadicNode(k, 1), self.d_n if k == 1 else 1.0, SELF) for k in range(1, n + 1)]
        cps = tuple((DyadicNode(k, 1), SELF) for k in range(1, n + 1))
        return StepFunction(tuple(segs)), CarlesonWeights({ROOT: self.beta}, cps)

    def build(self, tail: str = "exact", budget: int = DEFAULT_BUDGET) -> tuple[StepFunction, CarlesonWeights]:
        """Unroll the recursion shallowest-first while the J-image fits in depth.

        ``tail="exact"`` stops after ``budget`` expansions and leaves the
        remaining images as scaled copies of the core recursion;
        ``tail="flat"`` replaces them by their mean and drops their weights,
        which is only feasible for small depths.
        """
        if tail not in ("exact", "flat"):
            raise DomainError(f"unknown tail mode {tail!r}")
        n, x1 = self.n, self.x1
        core_phi, core_alpha = self.core()
        if tail == "exact" and budget <= 1:
            return core_phi, core_alpha
        segs: list[Segment] = []
        explicit: dict[DyadicNode, Fraction] = {}
        pending = [(0, 0, 1.0)]
        expanded = 0
        leftovers = []
        while pending:
            depth, index, lam = heapq.heappop(pending)
            node = DyadicNode(depth, index)
            if depth > 0 and depth + n > self.depth:
                leftovers.append((node, lam))
                continue
            if expanded >= budget:
                if tail == "flat":
                    raise CarlbellError(f"flat truncation at depth {self.depth} needs more than {budget} expansions")
                leftovers.append((node, lam))
                continue
            expanded += 1
            segs.append(Segment(node.compose(DyadicNode(n, 0)), lam * self.c_n * x1))
            explicit[node] = self.beta * node.measure
            for k in range(1, n + 1):
                child = node.compose(DyadicNode(k, 1))
                heapq.heappush(pending, (child.depth, child.index, lam * (self.d_n if k == 1 else 1.0)))
        copies = []
        for node, lam in leftovers:
            if tail == "exact":
                segs.append(Segment(node, lam, core_phi))
                copies.append((node, core_alpha))
            else:
                segs.append(Segment(node, lam * x1))
        return StepFunction(tuple(segs)), CarlesonWeights(explicit, tuple(copies))


def build_extremal(
    x1: float, x2: float, n: int, D: int, tail: str = "exact", budget: int = DEFAULT_BUDGET
) -> tuple[StepFunction, CarlesonWeights]:
    """Extremal pair (phi_n, alpha) for the upper-lid point (x1, x2, 1)."""
    return ExtremalPlan.create(x1, x2, n, D).build(tail=tail, budget=budget)


def carleson_sum(phi: StepFunction, alpha: CarlesonWeights, _memo=None) -> float:
    """sum_I <phi>_I^2 alpha_I over all weighted nodes (exact dyadic averages)."""
    memo = {} if _memo is None else _memo
    key = (id(phi), id(alpha))
    if key in memo:
        return memo[key]
    terms = [float(v) * phi.average(nd) ** 2 for nd, v in sorted(alpha.explicit.items())]
    self_coef = Fraction(0)
    for nd, tmpl in alpha.copies:
        i, _, _ = phi._index.locate(nd)
        if i < 0:
            raise DomainError(f"function is not a single piece on the weight copy at {nd}")
        sg = phi.segments[i]
        w = float(nd.measure)
        if sg.template is None:
            tot = alpha.total() if tmpl is SELF else tmpl.total()
            terms.append(w * sg.value**2 * float(tot))
        elif sg.node != nd:
            raise DomainError(f"function copy at {sg.node} and weight copy at {nd} are misaligned")
        elif tmpl is SELF and sg.template is SELF:
            self_coef += nd.measure * Fraction(sg.value) ** 2
        elif tmpl is not SELF and isinstance(sg.template, StepFunction):
            terms.append(w * sg.value**2 * carleson_sum(sg.template, tmpl, memo))
        else:
            raise DomainError(f"self copy paired with a foreign template at {nd}")
    den = float(1 - self_coef)
    if den <= 0.0:
        raise DomainError("embedding sum diverges")
    memo[key] = math.fsum(terms) / den
    return memo[key]


def jimage_gap(phi: StepFunction, alpha: CarlesonWeights, plan: ExtremalPlan) -> float:
    """max over weighted nodes I of |phi| on J(I) minus c_n |<phi>_I| (should be <= 0)."""
    worst = -math.inf
    jrel = DyadicNode(plan.n, 0)
    for nd in alpha.explicit:
        worst = max(worst, abs(phi.value_on(nd.compose(jrel))) - plan.c_n * abs(phi.average(nd)))
    return worst


# ---------------------------------------------------------------------------
# tree functions and Green's formula


@dataclass(frozen=True)
class TreeFunction:
    """Values on all nodes of depth 0..D; levels[d] has 2^d entries."""

    levels: tuple[np.ndarray, ...]

    def __post_init__(self):
        lv = tuple(np.asarray(a, dtype=float) for a in self.levels)
        for d, a in enumerate(lv):
            if a.shape != (1 << d,):
                raise DomainError(f"level {d} must have {1 << d} entries")
        object.__setattr__(self, "levels", lv)

    @classmethod
    def from_function(cls, f, D: int) -> "TreeFunction":
        return cls(tuple(np.array([f(DyadicNode(d, i)) for i in range(1 << d)]) for d in range(D + 1)))

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def laplacian(self) -> list[np.ndarray]:
        """f(s) - (f(s+) + f(s-))/2 on internal nodes, level by level."""
        return [a - 0.5 * (b[0::2] + b[1::2]) for a, b in zip(self.levels[:-1], self.levels[1:])]


def greens_gap(f: TreeFunction, leaf_boundary=None) -> float:
    """f(root) - sum 2^-D boundary - sum_internal 2^-|s| Laplacian."""
    lap = f.laplacian()
    for d, row in enumerate(lap):
        if row.size and row.min() < -LAPLACIAN_TOL:
            i = int(row.argmin())
            raise NotSuperharmonic(f"negative Laplacian {row[i]:.3e} at node ({d}, {i})")
    D = f.depth
    bnd = f.levels[-1] if leaf_boundary is None else np.asarray(leaf_boundary, dtype=float)
    if bnd.shape != (1 << D,):
        raise DomainError(f"leaf boundary must have {1 << D} entries")
    terms = [f.levels[0][0], -math.fsum(bnd) * 2.0**-D]
    terms += [-math.fsum(row) * 2.0**-d for d, row in enumerate(lap)]
    return math.fsum(terms)


def node_data(phi: StepFunction, alpha: CarlesonWeights, D: int):
    """Per-level means of phi, phi^2, capacity density M and alpha/|s|."""
    m1, m2 = phi.level_moments(D)
    mass = np.array([float(alpha.mass(DyadicNode(D, i)) * (1 << D)) for i in range(1 << D)])
    means, seconds, dens, adens = [m1], [m2], [mass], [None]
    for d in range(D - 1, -1, -1):
        a1, a2, am = means[0], seconds[0], dens[0]
        al = np.array([float(alpha.alpha(DyadicNode(d, i)) * (1 << d)) for i in range(1 << d)])
        means.insert(0, 0.5 * (a1[0::2] + a1[1::2]))
        seconds.insert(0, 0.5 * (a2[0::2] + a2[1::2]))
        dens.insert(0, 0.5 * (am[0::2] + am[1::2]) + al)
        adens.insert(0, al)
    return means, seconds, dens, adens


def bellman_tree(phi: StepFunction, alpha: CarlesonWeights, D: int) -> TreeFunction:
    """f(s) = B(<phi>_s, <phi^2>_s, M(s)) on the unit window, M(s) = mass(s)/|s|."""
    means, seconds, dens, _ = node_data(phi, alpha, D)
    levels = []
    for a1, a2, am in zip(means, seconds, dens):
        levels.append(np.array([
            cet._bmax_raw(x1, max(x2, x1 * x1), min(x3, 1.0), UNIT)[0] for x1, x2, x3 in zip(a1, a2, am)
        ]))
    return TreeFunction(tuple(levels))


def proof_chain_gap(phi: StepFunction, alpha: CarlesonWeights, D: int) -> float:
    """min over internal nodes of Laplacian(f) - <phi>^2 alpha_s/|s| (should be >= 0)."""
    f = bellman_tree(phi, alpha, D)
    means, _, _, adens = node_data(phi, alpha, D)
    worst = math.inf
    for d, lap in enumerate(f.laplacian()):
        worst = min(worst, float(np.min(lap - means[d] ** 2 * adens[d])))
    return worst


# ---------------------------------------------------------------------------
# points below the upper lid


@dataclass(frozen=True)
class LineMix:
    phi: StepFunction
    alpha: CarlesonWeights
    theta: float
    xi1: float
    zeta: tuple[float, float]


def _dyadic_cover(lo: int, k: int) -> list[DyadicNode]:
    """Maximal dyadic nodes tiling [lo/2^k, 1]."""
    out, pos, end = [], lo, 1 << k
    while pos < end:
        size = pos & -pos if pos else end
        while pos + size > end:
            size >>= 1
        d = k - size.bit_length() + 1
        out.append(DyadicNode(d, pos // size))
        pos += size
    return out


def mix_line(pt: CetPoint, w: Window, n: int, k: int) -> LineMix:
    if k < 0 or n < 1:
        raise DomainError("need n >= 1 and k >= 0")
    fr = recover_parameters(pt, w)
    theta = (pt.x3 - w.m) / w.width
    # round down so the mixed point sits on the line at or below pt
    K = min(int(math.floor(theta * (1 << k) + 1e-9)), 1 << k)
    zeta = (fr.zeta1, fr.zeta2)
    if K == 0:
        return LineMix(StepFunction.constant(fr.xi1), CarlesonWeights(), 0.0, fr.xi1, zeta)
    phz, alz = build_extremal(fr.zeta1, max(fr.zeta2, fr.zeta1**2), n, 2 * n)
    if K == 1 << k:
        return LineMix(phz, alz, 1.0, fr.xi1, zeta)
    segs = [Segment(DyadicNode(k, j), 1.0, phz) for j in range(K)]
    segs += [Segment(nd, fr.xi1) for nd in _dyadic_cover(K, k)]
    cps = tuple((DyadicNode(k, j), alz) for j in range(K))
    return LineMix(StepFunction(tuple(segs)), CarlesonWeights({}, cps), K / (1 << k), fr.xi1, zeta)


def mix_along_line(pt: CetPoint, w: Window, n: int, k: int) -> tuple[StepFunction, CarlesonWeights]:
    """Combine the upper-lid extremal at zeta with the constant xi1 along pt's line.

    The weights are normalized to the unit window; the capacity-weighted
    estimate of B(pt) is (M - m) * carleson_sum + m * x2.
    """
    mx = mix_line(pt, w, n, k)
    return mx.phi, mx.alpha


def line_estimate(pt: CetPoint, w: Window, n: int, k: int) -> float:
    phi, alpha = mix_along_line(pt, w, n, k)
    return w.width * carleson_sum(phi, alpha) + w.m * pt.x2


def export_rows(phi: StepFunction, alpha: CarlesonWeights) -> list[tuple]:
    """Rows (kind, depth, index, value, alpha_num, alpha_exp) for CSV dumps."""
    rows = []
    for sg in phi.segments:
        kind = "leaf" if sg.template is None else "copy"
        rows.append((kind, sg.node.depth, sg.node.index, sg.value, "", ""))
    for nd, v in sorted(alpha.explicit.items()):
        rows.append(("alpha", nd.depth, nd.index, "", v.numerator, v.denominator.bit_length() - 1))
    for nd, _ in alpha.copies:
        rows.append(("alpha_copy", nd.depth, nd.index, "", "", ""))
    return rows


__all__ = [
    "SELF", "ROOT", "DyadicNode", "Segment", "StepFunction", "CarlesonWeights", "ExtremalPlan",
    "TreeFunction", "LineMix", "solve_cn_dn", "build_extremal", "carleson_sum", "jimage_gap",
    "greens_gap", "bellman_tree", "proof_chain_gap", "node_data", "mix_line", "mix_along_line",
    "line_estimate", "export_rows",
]
