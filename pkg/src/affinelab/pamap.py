"""Exact piecewise-affine maps of [0,1].

A PAMap is a continuous map given by affine interpolation between rational
nodes.  Everything here is exact: no floats appear anywhere in this module.
Canonical form (no collinear interior nodes) makes structural equality stand
in for functional equality.
"""

from __future__ import annotations

import json
import os
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import (
    DomainError,
    FlatPieceError,
    InvariantViolation,
    PieceBudgetError,
)
from .rational import Fraction as Rat, format_rat, rat

DEFAULT_PIECE_CAP = 10_000_000
_ENV_CAP = "AFFINELAB_PIECE_CAP"


def piece_cap() -> int:
    """Active cap on node counts for composites (env-overridable)."""
    raw = os.environ.get(_ENV_CAP)
    if raw:
        try:
            return int(raw)
        except ValueError:
            pass
    return DEFAULT_PIECE_CAP


def _check_cap(n: int) -> None:
    cap = piece_cap()
    if n > cap:
        raise PieceBudgetError(f"piece count {n} exceeds cap {cap}")


@dataclass(frozen=True, order=True)
class IntervalQ:
    """Closed rational interval [left, right] with left <= right."""

    left: Fraction
    right: Fraction

    def __post_init__(self):
        if self.left > self.right:
            raise ValueError(f"empty interval [{self.left}, {self.right}]")

    @property
    def length(self) -> Fraction:
        return self.right - self.left

    @property
    def midpoint(self) -> Fraction:
        return (self.left + self.right) / 2

    def contains(self, x: Fraction) -> bool:
        return self.left <= x <= self.right

    def contains_interval(self, other: "IntervalQ") -> bool:
        return self.left <= other.left and other.right <= self.right

    def intersect(self, other: "IntervalQ") -> Optional["IntervalQ"]:
        lo = max(self.left, other.left)
        hi = min(self.right, other.right)
        if lo > hi:
            return None
        return IntervalQ(lo, hi)

    def __str__(self):
        return f"[{self.left}, {self.right}]"


def _canonical_nodes(xs: Sequence[Fraction], ys: Sequence[Fraction]):
    """Drop interior nodes where the two adjacent slopes agree."""
    if len(xs) < 3:
        return list(xs), list(ys)
    out_x = [xs[0]]
    out_y = [ys[0]]
    for i in range(1, len(xs) - 1):
        x0, y0 = out_x[-1], out_y[-1]
        x1, y1 = xs[i], ys[i]
        x2, y2 = xs[i + 1], ys[i + 1]
        # collinear <=> (y1-y0)*(x2-x1) == (y2-y1)*(x1-x0)
        if (y1 - y0) * (x2 - x1) == (y2 - y1) * (x1 - x0):
            continue
        out_x.append(x1)
        out_y.append(y1)
    out_x.append(xs[-1])
    out_y.append(ys[-1])
    return out_x, out_y


@dataclass(frozen=True)
class PAMap:
    """Continuous PA self-map of [0,1], canonical, immutable.

    Construct through :meth:`make` (which canonicalizes) unless the nodes
    are already canonical.
    """

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        xs, ys = self.breakpoints, self.values
        if len(xs) != len(ys) or len(xs) < 2:
            raise DomainError("need equally many breakpoints and values, >= 2")
        if xs[0] != 0 or xs[-1] != 1:
            raise DomainError("breakpoints must start at 0 and end at 1")
        for a, b in zip(xs, xs[1:]):
            if not a < b:
                raise DomainError("breakpoints must be strictly increasing")
        for y in ys:
            if not (0 <= y <= 1):
                raise DomainError(f"value {y} outside [0,1]")
        cx, cy = _canonical_nodes(xs, ys)
        if len(cx) != len(xs):
            raise DomainError(
                "nodes not canonical (collinear interior node); use PAMap.make"
            )

    # -- construction ----------------------------------------------------

    @classmethod
    def make(cls, breakpoints: Iterable, values: Iterable) -> "PAMap":
        xs = [rat(x) for x in breakpoints]
        ys = [rat(y) for y in values]
        cx, cy = _canonical_nodes(xs, ys)
        return cls(tuple(cx), tuple(cy))

    @classmethod
    def from_json(cls, text: str) -> "PAMap":
        data = json.loads(text)
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict) -> "PAMap":
        try:
            xs = [rat(s) for s in data["breakpoints"]]
            ys = [rat(s) for s in data["values"]]
        except (KeyError, ValueError, TypeError) as exc:
            raise DomainError(f"malformed PAMap JSON: {exc}") from exc
        m = cls(tuple(xs), tuple(ys))  # rejects non-canonical input
        return m

    def to_dict(self) -> dict:
        return {
            "breakpoints": [format_rat(x) for x in self.breakpoints],
            "values": [format_rat(y) for y in self.values],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    # -- basic queries ----------------------------------------------------

    @property
    def piece_count(self) -> int:
        return len(self.breakpoints) - 1

    def nodes(self):
        return zip(self.breakpoints, self.values)

    def piece_slope(self, i: int) -> Fraction:
        xs, ys = self.breakpoints, self.values
        return (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])

    def slopes(self):
        return [self.piece_slope(i) for i in range(self.piece_count)]

    def piece_index(self, x: Fraction) -> int:
        """Index i with breakpoints[i] <= x <= breakpoints[i+1] (leftmost)."""
        if not (0 <= x <= 1):
            raise DomainError(f"{x} outside [0,1]")
        i = bisect_right(self.breakpoints, x) - 1
        if i >= self.piece_count:
            i = self.piece_count - 1
        return i

    def __call__(self, x) -> Fraction:
        x = rat(x)
        i = self.piece_index(x)
        x0, y0 = self.breakpoints[i], self.values[i]
        x1, y1 = self.breakpoints[i + 1], self.values[i + 1]
        return y0 + (x - x0) * (y1 - y0) / (x1 - x0)

    def interval_image(self, iv: IntervalQ) -> IntervalQ:
        """Exact image of a subinterval (min/max over endpoint+node values)."""
        lo, hi = iv.left, iv.right
        vals = [self(lo), self(hi)]
        i0 = bisect_right(self.breakpoints, lo)
        i1 = bisect_left(self.breakpoints, hi)
        vals.extend(self.values[i0:i1])
        return IntervalQ(min(vals), max(vals))

    def restrict_nodes(self, iv: IntervalQ):
        """Node list of the restriction to iv, endpoints included."""
        lo, hi = iv.left, iv.right
        xs = [lo]
        ys = [self(lo)]
        i0 = bisect_right(self.breakpoints, lo)
        i1 = bisect_left(self.breakpoints, hi)
        for j in range(i0, i1):
            xs.append(self.breakpoints[j])
            ys.append(self.values[j])
        xs.append(hi)
        ys.append(self(hi))
        return xs, ys

    # -- composition ------------------------------------------------------

    def compose(self, inner: "PAMap") -> "PAMap":
        """Exact self∘inner."""
        g = inner
        f = self
        out_x: list = []
        out_y: list = []
        fb = f.breakpoints
        for i in range(g.piece_count):
            x0, x1 = g.breakpoints[i], g.breakpoints[i + 1]
            y0, y1 = g.values[i], g.values[i + 1]
            # nodes of f∘g inside this g-piece: x0 plus g-preimages of
            # f-breakpoints strictly between y0 and y1
            piece_nodes = [x0]
            if y0 != y1:
                lo, hi = (y0, y1) if y0 < y1 else (y1, y0)
                j0 = bisect_right(fb, lo)
                j1 = bisect_left(fb, hi)
                cuts = fb[j0:j1]
                slope = (y1 - y0) / (x1 - x0)
                pre = [x0 + (c - y0) / slope for c in cuts]
                if y0 > y1:
                    pre.reverse()
                piece_nodes.extend(pre)
            out_x.extend(piece_nodes)
            out_y.extend(f(g(t)) for t in piece_nodes)
            _check_cap(len(out_x))
        out_x.append(Fraction(1))
        out_y.append(f(g(Fraction(1))))
        return PAMap.make(out_x, out_y)

    # -- preimages & measure ---------------------------------------------

    def preimage_components(self, target: IntervalQ, within: Optional[IntervalQ] = None):
        """Maximal closed intervals of f^{-1}(target) (∩ within), exact."""
        c, d = target.left, target.right
        lo = within.left if within else Fraction(0)
        hi = within.right if within else Fraction(1)
        if lo > hi:
            return []
        pieces = []
        i0 = self.piece_index(lo)
        i1 = self.piece_index(hi)
        for i in range(i0, i1 + 1):
            x0 = max(self.breakpoints[i], lo)
            x1 = min(self.breakpoints[i + 1], hi)
            if x0 > x1:
                continue
            y0, y1 = self(x0), self(x1)
            if y0 == y1:
                if c <= y0 <= d and x0 < x1:
                    pieces.append((x0, x1))
                elif c <= y0 <= d:
                    pieces.append((x0, x1))
                continue
            s = (y1 - y0) / (x1 - x0)
            # solve y0 + s (t - x0) in [c, d]
            t_at_c = x0 + (c - y0) / s
            t_at_d = x0 + (d - y0) / s
            a, b = (t_at_c, t_at_d) if t_at_c <= t_at_d else (t_at_d, t_at_c)
            a = max(a, x0)
            b = min(b, x1)
            if a <= b:
                pieces.append((a, b))
        # merge adjacent/overlapping
        pieces.sort()
        merged = []
        for a, b in pieces:
            if merged and a <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
            else:
                merged.append((a, b))
        return [IntervalQ(a, b) for a, b in merged]

    def preimage_measure(self, target: IntervalQ) -> Fraction:
        """λ(f^{-1}([c,d])) exactly."""
        return sum((iv.length for iv in self.preimage_components(target)),
                   Fraction(0))

    # -- misc -------------------------------------------------------------

    def max_abs_slope(self) -> Fraction:
        return max(abs(s) for s in self.slopes())

    def min_abs_slope(self) -> Fraction:
        return min(abs(s) for s in self.slopes())

    def __repr__(self):
        return f"PAMap({self.piece_count} pieces)"


# -- named elementary maps -------------------------------------------------

def identity_map() -> PAMap:
    return PAMap.make([0, 1], [0, 1])


def tent_map() -> PAMap:
    return PAMap.make([0, Fraction(1, 2), 1], [0, 1, 0])


def valley_map() -> PAMap:
    return PAMap.make([0, Fraction(1, 2), 1], [1, 0, 1])


# -- module-level operations ------------------------------------------------

def evaluate(f: PAMap, x) -> Fraction:
    """Exact value of the affine interpolant at x in [0,1]."""
    return f(rat(x))


def compose(f: PAMap, g: PAMap) -> PAMap:
    """Exact f∘g (f after g)."""
    return f.compose(g)


def iterate(f: PAMap, k: int) -> PAMap:
    """Exact k-th iterate f^k, k >= 1, guarded by the piece cap."""
    if k < 1:
        raise DomainError("iterate needs k >= 1")
    result = f
    for _ in range(k - 1):
        result = result.compose(f)
    return result


def uniform_distance(f: PAMap, g: PAMap) -> Fraction:
    """ρ(f,g) = sup |f-g|, attained at a merged breakpoint: exact."""
    points = sorted(set(f.breakpoints) | set(g.breakpoints))
    return max(abs(f(x) - g(x)) for x in points)


def crit(f: PAMap):
    """Interior breakpoints where the slope changes sign."""
    out = []
    slopes = f.slopes()
    for i in range(len(slopes) - 1):
        if (slopes[i] > 0) != (slopes[i + 1] > 0):
            out.append(f.breakpoints[i + 1])
    return out


def xi_set(f: PAMap):
    """Interior breakpoints where the slope changes value.

    In canonical form this is every interior breakpoint; crit ⊆ xi_set.
    """
    out = []
    slopes = f.slopes()
    for i in range(len(slopes) - 1):
        if slopes[i] != slopes[i + 1]:
            out.append(f.breakpoints[i + 1])
    return out


@dataclass(frozen=True)
class LebesgueReport:
    """Outcome of the induced-cell criterion, with witness on failure."""

    ok: bool
    witness_cell: Optional[IntervalQ] = None
    branch_sum: Optional[Fraction] = None

    def __bool__(self):
        return self.ok


def verify_lebesgue(f: PAMap) -> LebesgueReport:
    """Exact test for λ(f^{-1}(A)) = λ(A).

    Criterion: cut [0,1] at every node value of f.  On each resulting cell
    every monotone branch either covers it fully or misses it, so
    preservation holds iff the branch reciprocal-slope sums equal 1 on every
    cell.  Complete for PA maps: between consecutive node values no branch
    can begin or end.
    """
    slopes = f.slopes()
    for s in slopes:
        if s == 0:
            raise FlatPieceError("flat piece: preimage of a point has positive measure")
    cuts = sorted(set(f.values))
    if cuts[0] != 0:
        cuts.insert(0, Fraction(0))
    if cuts[-1] != 1:
        cuts.append(Fraction(1))
    piece_ranges = []
    for i in range(f.piece_count):
        y0, y1 = f.values[i], f.values[i + 1]
        lo, hi = (y0, y1) if y0 <= y1 else (y1, y0)
        piece_ranges.append((lo, hi, Fraction(1) / abs(slopes[i])))
    failures = []
    for c0, c1 in zip(cuts, cuts[1:]):
        total = Fraction(0)
        for lo, hi, w in piece_ranges:
            if lo <= c0 and c1 <= hi:
                total += w
        if total != 1:
            failures.append((IntervalQ(c0, c1), total))
    if failures:
        # prefer an uncovered cell (sum 0): the most informative witness
        for cell, total in failures:
            if total == 0:
                return LebesgueReport(False, cell, total)
        cell, total = failures[0]
        return LebesgueReport(False, cell, total)
    return LebesgueReport(True)


def lambda_equivalent_on(f_nodes, g_nodes) -> tuple:
    """Exact λ-equivalence of two PA graphs over the same interval.

    Arguments are (xs, ys) node lists over a common domain [a,b].  Returns
    (ok, witness_cell, lhs_sum, rhs_sum).  Two maps are λ-equivalent on
    [a,b] iff on every cell of the partition of the value axis induced by
    both node-value sets, the branch reciprocal-slope sums agree.
    """
    def branch_data(nodes):
        xs, ys = nodes
        data = []
        for i in range(len(xs) - 1):
            if xs[i] == xs[i + 1]:
                continue
            s = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
            lo, hi = (ys[i], ys[i + 1]) if ys[i] <= ys[i + 1] else (ys[i + 1], ys[i])
            data.append((lo, hi, s))
        return data

    fd = branch_data(f_nodes)
    gd = branch_data(g_nodes)
    for lo, hi, s in fd + gd:
        if s == 0 and lo != hi:
            raise FlatPieceError("flat piece inside window")
    cuts = sorted({v for nodes in (f_nodes, g_nodes) for v in nodes[1]})
    for c0, c1 in zip(cuts, cuts[1:]):
        if c0 == c1:
            continue
        lhs = sum((Fraction(1) / abs(s) for lo, hi, s in fd
                   if lo <= c0 and c1 <= hi), Fraction(0))
        rhs = sum((Fraction(1) / abs(s) for lo, hi, s in gd
                   if lo <= c0 and c1 <= hi), Fraction(0))
        if lhs != rhs:
            return False, IntervalQ(c0, c1), lhs, rhs
    return True, None, None, None


def assert_measure_preserving(f: PAMap, context: str = "") -> None:
    rep = verify_lebesgue(f)
    if not rep:
        raise InvariantViolation(
            f"map lost measure preservation {context}: cell {rep.witness_cell} "
            f"sums to {rep.branch_sum}"
        )
