"""Exact periodic-point enumeration and the counting laws of the
window-refinement construction.

`theorem1_construct` implements the budgeted (2n+1)-fold refinement around
one representative per Fix-orbit; `count_check` and `scaling_profile`
certify, in exact arithmetic, the per-orbit counts, the sliding-window
density laws, and the two box-scaling inequalities the dimension estimates
rest on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .errors import BoundaryFixError, DomainError, InvariantViolation, NotPeriodicError
from .pamap import IntervalQ, PAMap, crit, iterate
from .perturb import WindowSpec, window_mfold
from .rational import rat

SignedInterval = Tuple[IntervalQ, int]


@dataclass(frozen=True)
class PeriodicPoint:
    """A solution of f^k(x) = x: a point, or a plateau when f^k = id on it."""

    location: object  # Fraction or IntervalQ
    horizon: int
    least_period: int

    @property
    def is_plateau(self) -> bool:
        return isinstance(self.location, IntervalQ)

    def point(self) -> Fraction:
        if self.is_plateau:
            return self.location.midpoint
        return self.location


def _least_period(f: PAMap, x: Fraction, k: int) -> int:
    y = x
    for d in range(1, k + 1):
        y = f(y)
        if y == x and k % d == 0:
            return d
    raise InvariantViolation(f"{x} not fixed by f^{k}")


def fix_points(f: PAMap, k: int) -> List[PeriodicPoint]:
    """Complete exact solution set of f^k(x) = x.

    Per affine piece of f^k with slope != 1 there is at most one root;
    slope-1 pieces lying on the diagonal contribute plateau intervals
    (merged when adjacent).  Results are deduplicated and sorted.
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    F = iterate(f, k)
    points: List[Fraction] = []
    plateaus: List[Tuple[Fraction, Fraction]] = []
    for i in range(F.piece_count):
        x0, x1 = F.breakpoints[i], F.breakpoints[i + 1]
        y0, y1 = F.values[i], F.values[i + 1]
        s = (y1 - y0) / (x1 - x0)
        if s == 1:
            if y0 == x0:
                plateaus.append((x0, x1))
            continue
        root = (y0 - s * x0) / (1 - s)
        if x0 <= root <= x1:
            points.append(root)
    merged: List[Tuple[Fraction, Fraction]] = []
    for a, b in sorted(plateaus):
        if merged and a <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b))
        else:
            merged.append((a, b))
    out: List[PeriodicPoint] = []
    for a, b in merged:
        out.append(PeriodicPoint(IntervalQ(a, b), k, _least_period(f, (a + b) / 2, k)))
    covered = [IntervalQ(a, b) for a, b in merged]
    seen = set()
    for p in sorted(set(points)):
        if any(iv.contains(p) for iv in covered):
            continue
        if p in seen:
            continue
        seen.add(p)
        out.append(PeriodicPoint(p, k, _least_period(f, p, k)))
    out.sort(key=lambda pp: pp.location.left if pp.is_plateau else pp.location)
    return out


def per_points(f: PAMap, k: int) -> List[PeriodicPoint]:
    """Points of least period exactly k: Fix(f,k) minus lower divisors."""
    return [p for p in fix_points(f, k) if p.least_period == k]


@dataclass(frozen=True)
class TransversalityWitness:
    transverse: bool
    A: IntervalQ
    B: IntervalQ
    C: IntervalQ
    sign_left: int
    sign_right: int


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


def classify_transverse(f: PAMap, p: PeriodicPoint) -> TransversalityWitness:
    """Exact three-interval test around a fixed point of f^k.

    Finds the maximal diagonal plateau B containing p (possibly a point),
    then the flanking intervals A and C on which f^k − id keeps a constant
    nonzero sign; transverse iff the two signs are opposite.
    """
    k = p.horizon
    F = iterate(f, k)
    if p.is_plateau:
        b_left, b_right = p.location.left, p.location.right
    else:
        b_left = b_right = p.location
    if F(b_left) != b_left or F(b_right) != b_right:
        raise DomainError("point is not in Fix(f,k)")
    # grow plateau through slope-1 diagonal pieces
    grew = True
    while grew:
        grew = False
        i = F.piece_index(b_left)
        if F.breakpoints[i] < b_left and F(F.breakpoints[i]) == F.breakpoints[i] \
                and F.piece_slope(i) == 1:
            b_left = F.breakpoints[i]
            grew = True
        elif F.breakpoints[i] == b_left and i > 0 and F.piece_slope(i - 1) == 1 \
                and F(F.breakpoints[i - 1]) == F.breakpoints[i - 1]:
            b_left = F.breakpoints[i - 1]
            grew = True
        j = F.piece_index(b_right)
        if b_right == F.breakpoints[j + 1] and j + 1 < F.piece_count \
                and F.piece_slope(j + 1) == 1 \
                and F(F.breakpoints[j + 2]) == F.breakpoints[j + 2]:
            b_right = F.breakpoints[j + 2]
            grew = True
        elif b_right < F.breakpoints[j + 1] and F.piece_slope(j) == 1 \
                and F(F.breakpoints[j + 1]) == F.breakpoints[j + 1] \
                and F(b_right) == b_right and F.piece_slope(j) == 1:
            b_right = F.breakpoints[j + 1]
            grew = True
    if b_left == 0 or b_right == 1:
        raise BoundaryFixError(
            f"plateau [{b_left},{b_right}] touches the boundary: no flanking interval")
    a2 = b_left
    c1 = b_right
    a1 = _previous_sign_boundary(F, a2)
    c2 = _next_sign_boundary(F, c1)
    sign_left = _sign(F((a1 + a2) / 2) - (a1 + a2) / 2)
    sign_right = _sign(F((c1 + c2) / 2) - (c1 + c2) / 2)
    if sign_left == 0 or sign_right == 0:
        raise InvariantViolation("flanking interval contains a hidden zero")
    return TransversalityWitness(
        transverse=(sign_left * sign_right == -1),
        A=IntervalQ(a1, a2), B=IntervalQ(b_left, b_right), C=IntervalQ(c1, c2),
        sign_left=sign_left, sign_right=sign_right)


def _previous_sign_boundary(F: PAMap, x: Fraction) -> Fraction:
    """Largest zero of F - id strictly below x (or 0)."""
    i = F.piece_index(x)
    if F.breakpoints[i] == x:
        i -= 1
    while i >= 0:
        x0, x1 = F.breakpoints[i], F.breakpoints[i + 1]
        y0, y1 = F.values[i], F.values[i + 1]
        s = (y1 - y0) / (x1 - x0)
        if s != 1:
            root = (y0 - s * x0) / (1 - s)
            if x0 <= root < x and root <= x1:
                return root
        elif y0 == x0:
            return x1 if x1 < x else x0
        i -= 1
    return Fraction(0)


def _next_sign_boundary(F: PAMap, x: Fraction) -> Fraction:
    i = F.piece_index(x)
    if F.breakpoints[i + 1] == x and i + 1 < F.piece_count:
        i += 1
    while i < F.piece_count:
        x0, x1 = F.breakpoints[i], F.breakpoints[i + 1]
        y0, y1 = F.values[i], F.values[i + 1]
        s = (y1 - y0) / (x1 - x0)
        if s != 1:
            root = (y0 - s * x0) / (1 - s)
            if x < root <= x1 and x0 <= root:
                return root
        elif y0 == x0:
            return x0 if x0 > x else x1
        i += 1
    return Fraction(1)


# -- Theorem 1.1 construction ------------------------------------------------


@dataclass(frozen=True)
class OrbitRep:
    """Leftmost point of one Fix(g,k)-orbit plus its least period."""

    representative: Fraction
    least_period: int
    orbit: tuple


@dataclass(frozen=True)
class PerturbationBudget:
    """Parameter pack of the window-refinement construction.

    `a` is the common *diameter* of the refinement windows; the window
    around a representative x is I_l = [x - a/2, x + a/2].
    """

    gamma: Fraction
    eta: Fraction
    beta: Fraction
    tau: Fraction
    a: Fraction
    n: int
    i: int
    k: int
    ell: int
    orbits: tuple  # tuple[OrbitRep, ...]

    def windows(self) -> List[IntervalQ]:
        return [IntervalQ(o.representative - self.a / 2,
                          o.representative + self.a / 2) for o in self.orbits]

    def check(self) -> None:
        bound = (Fraction(1) / (2 * self.tau)) * min(
            Fraction(1, self.i * self.k * self.ell),
            self.eta, self.gamma, self.beta,
            Fraction(1) / (self.k * self.ell) ** self.i)
        if self.a > bound:
            raise InvariantViolation(f"window diameter {self.a} above bound {bound}")


def _local_slope(g: PAMap, x: Fraction) -> Fraction:
    """|g'| at x; at a node, the larger of the two adjacent magnitudes."""
    i = g.piece_index(x)
    s = abs(g.piece_slope(i))
    if x == g.breakpoints[i] and i > 0:
        s = max(s, abs(g.piece_slope(i - 1)))
    return s


def group_orbits(g: PAMap, k: int) -> List[OrbitRep]:
    """Fix(g,k) grouped into orbits.

    The representative of each orbit is its point of maximal local slope
    magnitude (ties to the leftmost).  Centering the refinement window
    there keeps the window's forward images as wide as possible: image
    clusters contract by the product of the *remaining* slopes, so placing
    the window on the steepest point is what preserves the ≤2-points
    density law at scale a/(2n+1)^k.
    """
    pts = fix_points(g, k)
    if any(p.is_plateau for p in pts):
        raise DomainError("Fix(g,k) contains a plateau; need a transverse base map")
    remaining = {p.location: p.least_period for p in pts}
    orbits: List[OrbitRep] = []
    while remaining:
        x = min(remaining)
        period = remaining[x]
        orbit = [x]
        y = g(x)
        while y != x:
            orbit.append(y)
            y = g(y)
        if len(orbit) != period:
            raise InvariantViolation("orbit length disagrees with least period")
        for z in orbit:
            if z in remaining:
                del remaining[z]
            elif z not in [o for ob in orbits for o in ob.orbit]:
                raise InvariantViolation(f"orbit point {z} missing from Fix set")
        rep = max(sorted(orbit), key=lambda z: _local_slope(g, z))
        orbits.append(OrbitRep(rep, period, tuple(sorted(orbit))))
    orbits.sort(key=lambda o: o.representative)
    return orbits


def _min_gap(points: Sequence[Fraction]) -> Fraction:
    pts = sorted(points)
    return min(b - a for a, b in zip(pts, pts[1:]))


def theorem1_construct(g: PAMap, k: int, i: int, n: int
                       ) -> Tuple[PAMap, PerturbationBudget]:
    """(2n+1)-fold windows around one representative per Fix(g,k)-orbit.

    Preconditions (certified): g measure preserving, no slope ±1, finite
    Fix(g,k) away from {0,1} and from Crit(g).  The window diameter sits at
    the budget bound a = (1/2τ)·min(1/(ikl), η, γ, β, (kl)^{-i}).
    """
    if k < 1 or i < 1 or n < 1:
        raise DomainError("k, i, n must be positive")
    for s in g.slopes():
        if abs(s) == 1:
            raise DomainError("base map has a slope ±1 piece")
    orbits = group_orbits(g, k)
    if not orbits:
        raise DomainError("Fix(g,k) empty")
    ell = len(orbits)
    all_points = [x for o in orbits for x in o.orbit]
    if any(x in (0, 1) for x in all_points):
        raise DomainError("boundary point in Fix(g,k); run remove_boundary_fix first")
    critical = crit(g)
    guard = set(critical) | {Fraction(0), Fraction(1)}
    gamma = _min_gap(sorted(guard))
    eta = min(min(abs(x - c) for c in guard) for x in all_points)
    if eta == 0:
        raise DomainError("a Fix-orbit touches Crit(g) ∪ {0,1}")
    if len(all_points) < 2:
        beta = Fraction(1)
    else:
        beta = _min_gap(all_points) / 2
    Fk = iterate(g, k)
    tau = max(abs(s) for s in Fk.slopes()) + 1
    a = (Fraction(1) / (2 * tau)) * min(
        Fraction(1, i * k * ell), eta, gamma, beta,
        Fraction(1) / (k * ell) ** i)
    budget = PerturbationBudget(gamma=gamma, eta=eta, beta=beta, tau=tau,
                                a=a, n=n, i=i, k=k, ell=ell, orbits=tuple(orbits))
    budget.check()
    windows = budget.windows()
    for w, w2 in zip(windows, windows[1:]):
        if w.right >= w2.left:
            raise InvariantViolation("refinement windows overlap")
    h = g
    for w in windows:
        h = window_mfold(h, WindowSpec(w, 2 * n + 1))
    return h, budget


@dataclass
class ClauseResult:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class CountReport:
    clauses: List[ClauseResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.clauses)

    def __bool__(self):
        return self.ok

    def add(self, name: str, ok: bool, detail: str = ""):
        self.clauses.append(ClauseResult(name, ok, detail))

    def lines(self):
        return [f"[{'PASS' if c.ok else 'FAIL'}] {c.name}" +
                (f" — {c.detail}" if c.detail else "") for c in self.clauses]


def _scan_min_per_window(points: Sequence[Fraction], window: IntervalQ,
                         length: Fraction) -> bool:
    """Every closed subinterval of `window` of the given length holds >= 1 point.

    Equivalent gap condition on the sorted points inside the window,
    including the two boundary gaps.
    """
    inside = sorted(p for p in points if window.contains(p))
    if not inside:
        return False
    if inside[0] - window.left > length:
        return False
    if window.right - inside[-1] > length:
        return False
    return all(b - a <= length for a, b in zip(inside, inside[1:]))


def _scan_max_run(points: Sequence[Fraction], length: Fraction, run: int) -> bool:
    """No closed interval of the given length holds more than `run` points."""
    pts = sorted(points)
    for j in range(len(pts) - run):
        if pts[j + run] - pts[j] <= length:
            return False
    return True


def count_check(h: PAMap, g: PAMap, budget: PerturbationBudget, k: int) -> CountReport:
    """Exact verification of the counting and density laws.

    Checks, per orbit l: N_l = (2n+1)^{k/k(x)}·k(x); totals within
    max((2n+1)ℓ, (2n+1)^k) .. (2n+1)^k·k·ℓ; the ≥1/≤3 sliding scan at
    length 2a/(2n+1)^{k/k(x)} inside each window; the global ≤2 scan at
    length a/(2n+1)^k; and the Per(h,k) lower bound (2n+1)·k·ℓ̄.
    """
    if k != budget.k:
        raise DomainError("budget was built for a different k")
    report = CountReport()
    n, a = budget.n, budget.a
    m = 2 * n + 1
    fps = fix_points(h, k)
    if any(p.is_plateau for p in fps):
        report.add("finite Fix(h,k)", False, "plateau found")
        return report
    locations = [p.location for p in fps]
    orbit_points = {}
    for o in budget.orbits:
        for x in o.orbit:
            orbit_points[x] = o
    assigned = {id(o): [] for o in budget.orbits}
    stray = []
    for p in locations:
        best = min(orbit_points, key=lambda x: abs(x - p))
        if abs(best - p) < budget.beta:
            assigned[id(orbit_points[best])].append(p)
        else:
            stray.append(p)
    report.add("no stray fixed points", not stray,
               f"{len(stray)} points far from every base orbit" if stray else "")
    total = 0
    per_orbit_ok = True
    details = []
    for o in budget.orbits:
        expected = m ** (k // o.least_period) * o.least_period
        got = len(assigned[id(o)])
        total += got
        if got != expected:
            per_orbit_ok = False
            details.append(f"orbit at {o.representative}: {got} != {expected}")
    report.add("per-orbit counts N_l = (2n+1)^{k/k(x)}·k(x)", per_orbit_ok,
               "; ".join(details))
    lo_bound = max(m * budget.ell, m ** k)
    hi_bound = (m ** k) * k * budget.ell
    report.add("total bounds max((2n+1)ℓ,(2n+1)^k) ≤ #Fix ≤ (2n+1)^k·k·ℓ",
               lo_bound <= len(locations) <= hi_bound,
               f"#Fix(h,k) = {len(locations)} in [{lo_bound}, {hi_bound}]")
    # density scans inside each window
    scan_ok = True
    scan_details = []
    for o, window in zip(budget.orbits, budget.windows()):
        length = 2 * a / m ** (k // o.least_period)
        if not _scan_min_per_window(locations, window, length):
            scan_ok = False
            scan_details.append(f"≥1 fails at {o.representative}")
        inside = [p for p in locations if window.contains(p)]
        if not _scan_max_run(inside, length, 3):
            scan_ok = False
            scan_details.append(f"≤3 fails at {o.representative}")
    report.add("window scans: ≥1 and ≤3 per length 2a/(2n+1)^{k/k(x)}",
               scan_ok, "; ".join(scan_details))
    report.add("global scan: ≤2 per length a/(2n+1)^k",
               _scan_max_run(locations, a / m ** k, 2))
    ell_bar = sum(1 for o in budget.orbits if o.least_period == k)
    if ell_bar:
        pers = per_points(h, k)
        report.add("#Per(h,k) ≥ (2n+1)·k·ℓ̄",
                   len(pers) >= m * k * ell_bar,
                   f"{len(pers)} ≥ {m * k * ell_bar}")
    else:
        report.add("#Per(h,k) ≥ (2n+1)·k·ℓ̄", True, "ℓ̄ = 0, vacuous")
    return report


def box_count(points: Sequence[Fraction], eps) -> int:
    """Minimal number of closed length-eps intervals covering the set.

    Greedy left-to-right sweep; optimal in one dimension.
    """
    eps = rat(eps)
    if eps <= 0:
        raise DomainError("eps must be positive")
    pts = sorted(points)
    if not pts:
        raise DomainError("empty point set")
    count = 0
    idx = 0
    while idx < len(pts):
        right = pts[idx] + eps
        count += 1
        while idx < len(pts) and pts[idx] <= right:
            idx += 1
    return count


@dataclass
class ScaleRow:
    eps: Fraction
    count: int
    ratio_float: float
    ratio_iv: tuple  # certified (lo, hi) floats enclosing log N / log(1/eps)


@dataclass
class ScalingProfile:
    rows: List[ScaleRow]
    report: CountReport

    def __bool__(self):
        return bool(self.report)


def _iv_log_ratio(count: int, inv_eps: Fraction, width=Fraction(1, 10**12)):
    """Certified enclosure of log(count)/log(inv_eps) of requested width."""
    from mpmath import iv
    prec = 80
    while True:
        iv.prec = prec
        num = iv.log(iv.mpf(count))
        den = iv.log(iv.mpf(inv_eps.numerator) / iv.mpf(inv_eps.denominator))
        ratio = num / den
        lo, hi = ratio.a, ratio.b
        if hi - lo <= iv.mpf(width.numerator) / iv.mpf(width.denominator):
            return float(lo), float(hi)
        prec *= 2
        if prec > 10000:
            raise InvariantViolation("interval log failed to converge")


def scaling_profile(h: PAMap, budget: PerturbationBudget, k: int) -> ScalingProfile:
    """Both box-scaling inequalities at the two canonical scales.

    Scale a (windows): log N(a)/log(1/a) ≤ 1/i, equivalent to the exact
    rational inequality N(a)^i · a ≤ 1.  Scale b = 2a/(2n+1)^k: the lower
    bound log N(b)/log(1/b) ≥ (k·log(2n+1) − log 3)/(k·log(2n+1) − log 2a),
    whose right side equals (k·log(2n+1) − log 3)/log(1/b), so the claim is
    exactly 3·N(b) ≥ (2n+1)^k.  The Per-variant (n ≥ 2) asserts the 3/4
    factor: #(Per(h,k) ∩ I_fix) ≥ (3/4)(2n+1)^k and 4·N_per(b) ≥ (2n+1)^k.
    """
    report = CountReport()
    n, a, i = budget.n, budget.a, budget.i
    m = 2 * n + 1
    fps = fix_points(h, k)
    locations = [p.location for p in fps]
    rows: List[ScaleRow] = []

    n_a = box_count(locations, a)
    report.add("ℓ ≤ N(a) ≤ kℓ", budget.ell <= n_a <= k * budget.ell,
               f"N(a) = {n_a}")
    exact_lower = (Fraction(n_a) ** i) * a <= 1
    report.add("lower-box: N(a)^i · a ≤ 1  (⇔ log N/log(1/a) ≤ 1/i)",
               exact_lower, f"N(a)={n_a}, i={i}")
    lo, hi = _iv_log_ratio(n_a, 1 / a)
    report.add("lower-box certified via interval log (width 1e-12)",
               hi <= 1 / i or exact_lower,
               f"ratio ∈ [{lo:.3e}, {hi:.3e}] ≤ 1/{i}")
    rows.append(ScaleRow(a, n_a, (lo + hi) / 2, (lo, hi)))

    b = 2 * a / m ** k
    n_b = box_count(locations, b)
    ubd_exact = 3 * n_b >= m ** k
    report.add("(ubd): 3·N(b) ≥ (2n+1)^k", ubd_exact,
               f"N(b) = {n_b}, (2n+1)^k = {m ** k}")
    lo_b, hi_b = _iv_log_ratio(n_b, 1 / b)
    from mpmath import iv
    iv.prec = 160
    rhs = (k * iv.log(iv.mpf(m)) - iv.log(iv.mpf(3))) / \
          (k * iv.log(iv.mpf(m)) - iv.log(iv.mpf((2 * a).numerator) / iv.mpf((2 * a).denominator)))
    report.add("(ubd) certified via interval log (width 1e-12)",
               iv.mpf(lo_b) >= rhs.b or ubd_exact,
               f"ratio ∈ [{lo_b:.3e}, {hi_b:.3e}] vs bound ≤ {float(rhs.b):.3e}")
    rows.append(ScaleRow(b, n_b, (lo_b + hi_b) / 2, (lo_b, hi_b)))

    if n >= 2 and k >= 2:
        fixed_orbits = [o for o in budget.orbits if o.least_period == 1]
        if fixed_orbits:
            windows = budget.windows()
            idx = budget.orbits.index(fixed_orbits[0])
            window = windows[idx]
            per_pts = [p.location for p in per_points(h, k) if not p.is_plateau]
            inside = [p for p in per_pts if window.contains(p)]
            factor_exact = 4 * len(inside) >= 3 * m ** k
            report.add("Per-variant 3/4 factor: 4·#(Per∩I_fix) ≥ 3·(2n+1)^k",
                       factor_exact, f"#(Per∩I) = {len(inside)}")
            n_b_per = box_count(per_pts, b) if per_pts else 0
            report.add("Per-variant (ubd): 4·N_per(b) ≥ (2n+1)^k",
                       4 * n_b_per >= m ** k, f"N_per(b) = {n_b_per}")
        else:
            report.add("Per-variant", True, "no fixed-point orbit, vacuous")
    else:
        report.add("Per-variant", True, "skipped: requires n ≥ 2 (and k ≥ 2)")
    return ScalingProfile(rows, report)
