"""Window perturbations and constructive map repair.

The m-fold window perturbation replaces a map on [a,b] by m horizontally
compressed copies of its own graph there, alternating orientation.  Odd m
matches both endpoint values, so the glued map stays continuous; even m is
allowed only at a domain boundary (endpoint waiver), where the dangling
mismatch is harmless.  All perturbations preserve Lebesgue measure exactly.

The repair pipeline (`make_transverse`) steers an arbitrary measure-
preserving PA map into the class used by the periodic-point counting
machinery: no slope ±1, no boundary fixed points of f^k, no critical
connections of length <= k, nonempty Per(.,k).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import (
    ContinuityError,
    DomainError,
    EndpointError,
    EquivalenceError,
    InvariantViolation,
    RepairBudgetError,
    SearchFailureError,
    WindowError,
)
from .pamap import (
    IntervalQ,
    PAMap,
    assert_measure_preserving,
    crit,
    lambda_equivalent_on,
    uniform_distance,
    verify_lebesgue,
)
from .rational import rat


@dataclass(frozen=True)
class WindowSpec:
    """A window [a,b] ⊆ [0,1] and an m-fold count.

    Even folds are admissible only with `waive_endpoint=True` and a window
    touching 0 or 1 (the mismatched endpoint must dangle off the boundary).
    """

    window: IntervalQ
    folds: int
    waive_endpoint: bool = False

    def __post_init__(self):
        if self.folds < 1:
            raise WindowError("folds must be >= 1")
        if not (0 <= self.window.left < self.window.right <= 1):
            raise WindowError(f"window {self.window} not inside [0,1]")
        if self.folds % 2 == 0 and not self.waive_endpoint:
            raise WindowError("even fold counts need the endpoint waiver")


@dataclass(frozen=True)
class CriticalConnection:
    """f^length maps source ∈ Crit onto target ∈ Crit, no earlier hits."""

    source: Fraction
    target: Fraction
    length: int


def _fold_nodes(f: PAMap, a: Fraction, b: Fraction, m: int, mirrored: bool):
    """Node list of h<f;[a,b],m> on [a,b].

    Fold j occupies [a + jΔ/m, a + (j+1)Δ/m]; even j sweeps the graph of
    f|[a,b] forward, odd j backward.  `mirrored` swaps the roles (used for
    even-fold boundary windows that must end, not start, at f(a)).
    """
    delta = b - a
    base_x, base_y = f.restrict_nodes(IntervalQ(a, b))
    xs: list = []
    ys: list = []
    for j in range(m):
        start = a + delta * j / m
        forward = (j % 2 == 0) ^ mirrored
        if forward:
            seg = [(start + (u - a) / m, v) for u, v in zip(base_x, base_y)]
        else:
            seg = [(start + (b - u) / m, v)
                   for u, v in zip(reversed(base_x), reversed(base_y))]
        if xs:
            seg = seg[1:]  # shared node with the previous fold
        xs.extend(p for p, _ in seg)
        ys.extend(v for _, v in seg)
    return xs, ys


def _glue(f: PAMap, a: Fraction, b: Fraction, win_x, win_y) -> PAMap:
    xs = [x for x in f.breakpoints if x < a]
    ys = [f.values[i] for i, x in enumerate(f.breakpoints) if x < a]
    xs.extend(win_x)
    ys.extend(win_y)
    tail = [(x, f.values[i]) for i, x in enumerate(f.breakpoints) if x > b]
    xs.extend(x for x, _ in tail)
    ys.extend(y for _, y in tail)
    return PAMap.make(xs, ys)


def window_mfold(f: PAMap, spec: WindowSpec) -> PAMap:
    """Regular m-fold window perturbation of f on spec.window.

    Odd m: endpoints match, result continuous, g = f off the window.
    Even m: one window endpoint value becomes f(other end); only permitted
    when that endpoint is 0 or 1 (waiver), else ContinuityError.
    """
    a, b = spec.window.left, spec.window.right
    m = spec.folds
    if m == 1:
        return f
    mirrored = False
    if m % 2 == 0:
        if f(a) == f(b):
            pass  # both junctions still match; orientation irrelevant
        elif a == 0:
            mirrored = True  # h(b) = f(b): right junction continuous
        elif b == 1:
            mirrored = False  # h(a) = f(a): left junction continuous
        else:
            raise ContinuityError(
                f"even folds with f(a)={f(a)} != f(b)={f(b)} on an interior window"
            )
    win_x, win_y = _fold_nodes(f, a, b, m, mirrored)
    return _glue(f, a, b, win_x, win_y)


def window_replace(f: PAMap, window: IntervalQ, h_nodes,
                   waive_endpoint: bool = False) -> PAMap:
    """Glue an arbitrary λ-equivalent graph h over the window.

    `h_nodes` is an (xs, ys) node pair spanning exactly [window.left,
    window.right].  Endpoint matching and λ-equivalence with f's own
    restriction are verified exactly before gluing; endpoint mismatches are
    tolerated only at a domain boundary under the waiver.
    """
    a, b = window.left, window.right
    h_x = [rat(x) for x in h_nodes[0]]
    h_y = [rat(y) for y in h_nodes[1]]
    if h_x[0] != a or h_x[-1] != b:
        raise WindowError("window graph must span exactly [a,b]")
    mism_left = h_y[0] != f(a)
    mism_right = h_y[-1] != f(b)
    if mism_left and not (waive_endpoint and a == 0):
        raise EndpointError(f"h(a)={h_y[0]} != f(a)={f(a)}")
    if mism_right and not (waive_endpoint and b == 1):
        raise EndpointError(f"h(b)={h_y[-1]} != f(b)={f(b)}")
    ok, cell, lhs, rhs = lambda_equivalent_on(
        f.restrict_nodes(window), (h_x, h_y))
    if not ok:
        raise EquivalenceError(
            f"window graph not λ-equivalent to f|{window}: cell {cell} "
            f"has sums {lhs} vs {rhs}", cell=cell, lhs=lhs, rhs=rhs)
    return _glue(f, a, b, h_x, h_y)


def find_critical_connections(f: PAMap, k: int):
    """All critical connections of length <= k, exact orbit arithmetic.

    For each source the connection length is the first return of its orbit
    to Crit(f); sorted by length, then source.
    """
    critical = crit(f)
    cset = set(critical)
    out = []
    for c in critical:
        x = c
        for ell in range(1, k + 1):
            x = f(x)
            if x in cset:
                out.append(CriticalConnection(c, x, ell))
                break
    out.sort(key=lambda cc: (cc.length, cc.source))
    return out


def _orbit_hits_fix(g: PAMap, x: Fraction, k: int) -> bool:
    """g^k(x) == x, computed pointwise."""
    y = x
    for _ in range(k):
        y = g(y)
    return y == x


def _boundary_period(f: PAMap, p: Fraction, k: int) -> Optional[int]:
    """Least j <= k with f^j(p) = p, if p ∈ Fix(f,k) and j | k."""
    y = p
    for j in range(1, k + 1):
        y = f(y)
        if y == p:
            return j if k % j == 0 else None
    return None


def remove_boundary_fix(f: PAMap, k: int, min_window: Fraction = Fraction(1, 2**40)) -> PAMap:
    """Perturb so that neither 0 nor 1 lies in Fix(g,k).

    Mirrored (resp. plain) 2-fold windows on [0,a] (resp. [b,1]) push the
    boundary value to f(a) (resp. f(b)).  The window size starts at the
    largest dyadic below the admissibility bound and is halved until the
    exact certificate g^k(boundary) != boundary holds.
    """
    g = f
    for boundary in (Fraction(0), Fraction(1)):
        if not _orbit_hits_fix(g, boundary, k):
            continue
        j = _boundary_period(g, boundary, k)
        if j is None:
            raise InvariantViolation("boundary in Fix(g,k) without period dividing k")
        g = _repair_one_boundary(g, boundary, j, k, min_window)
    return g


def _repair_one_boundary(g: PAMap, p: Fraction, j: int, k: int,
                         min_window: Fraction) -> PAMap:
    a = Fraction(1, 4)
    while a >= min_window:
        window = IntervalQ(0, a) if p == 0 else IntervalQ(1 - a, 1)
        if _window_admissible(g, window, p, j):
            spec = WindowSpec(window, 2, waive_endpoint=True)
            cand = window_mfold(g, spec)
            ok = not _orbit_hits_fix(cand, p, k)
            other = Fraction(1) - p
            ok = ok and (not _orbit_hits_fix(cand, other, k)
                         or _orbit_hits_fix(g, other, k))
            if ok:
                return cand
        a /= 2
    raise SearchFailureError(
        f"no admissible boundary window above {min_window} for {p} (degenerate input)")


def _window_admissible(g: PAMap, window: IntervalQ, p: Fraction, j: int) -> bool:
    """f^i(window) ∩ window = ∅ for 1 <= i <= j-1, and f^j(inner end) != p."""
    img = window
    for _ in range(j - 1):
        img = g.interval_image(img)
        if img.intersect(window) is not None:
            return False
    inner = window.right if p == 0 else window.left
    y = inner
    for _ in range(j):
        y = g(y)
    return y != p


def _fixed_points_pointwise(g: PAMap, k: int):
    """Solve g^k(x) = x piecewise without building g^k when k == 1."""
    from .periodic import fix_points  # local import to avoid a cycle
    return fix_points(g, k)


def _peak_shift(f: PAMap, c: Fraction, radius: Fraction, shift: Fraction) -> PAMap:
    """Move the critical point c to c+shift inside a symmetric-height window.

    The window [u1,u2] is chosen with f(u1) = f(u2) (equal heights), so the
    two-piece replacement with the same extremum value is λ-equivalent:
    both graphs cover the band between extremum and endpoint height twice,
    with width sums (u2-u1)/(height span) on both sides.
    """
    i = list(f.breakpoints).index(c)
    s_l = f.piece_slope(i - 1)
    s_r = f.piece_slope(i)
    v = f.values[i]
    d_l = radius / abs(s_l)
    d_r = radius / abs(s_r)
    u1, u2 = c - d_l, c + d_r
    if not (0 <= u1 < c < u2 <= 1):
        raise WindowError("peak-shift window leaves [0,1]")
    if f(u1) != f(u2):
        raise InvariantViolation("peak-shift window heights differ")
    cbar = c + shift
    if not (u1 < cbar < u2):
        raise WindowError("shift target outside window")
    win_x = [u1, cbar, u2]
    win_y = [f(u1), v, f(u2)]
    return window_replace(f, IntervalQ(u1, u2), (win_x, win_y))


def _breakpoint_neighbour_gap(f: PAMap, c: Fraction) -> Fraction:
    i = list(f.breakpoints).index(c)
    return min(c - f.breakpoints[i - 1], f.breakpoints[i + 1] - c)


def _repair_connection(f: PAMap, conn: CriticalConnection, k: int,
                       rho_budget: Fraction) -> PAMap:
    """Destroy one critical connection by a small peak shift.

    Moves the target peak (source peak when source == target), keeping the
    window disjoint from the forbidden set Q ∪ Crit and small enough to fit
    the ρ budget; then certifies exactly that the connection died and that
    no new connection of length <= conn.length appeared.
    """
    move_at = conn.target if conn.source != conn.target else conn.source
    critical = crit(f)
    forbidden = set(critical)
    for c in critical:
        x = c
        for _ in range(conn.length):
            forbidden.add(x)
            x = f(x)
            forbidden.add(x)
    gaps = [abs(q - move_at) for q in forbidden if q != move_at]
    gaps.append(_breakpoint_neighbour_gap(f, move_at))
    gaps.append(move_at)
    gaps.append(1 - move_at)
    room = min(gaps)
    radius_x = room / 2
    attempt = 0
    while attempt < 60:
        s_l = abs(f.piece_slope(list(f.breakpoints).index(move_at) - 1))
        s_r = abs(f.piece_slope(list(f.breakpoints).index(move_at)))
        radius = radius_x * min(s_l, s_r)
        if radius > rho_budget / 2:
            radius = rho_budget / 2
        shift = radius / (2 * max(s_l, s_r))
        try:
            cand = _peak_shift(f, move_at, radius, shift)
        except WindowError:
            radius_x /= 2
            attempt += 1
            continue
        new_conns = find_critical_connections(cand, k)
        old_conns = find_critical_connections(f, k)
        if _lexicographically_smaller(new_conns, old_conns, k):
            if uniform_distance(f, cand) <= rho_budget:
                return cand
        radius_x /= 2
        attempt += 1
    raise SearchFailureError(f"could not repair connection {conn}")


def _length_histogram(conns, k):
    hist = [0] * (k + 1)
    for c in conns:
        hist[c.length] += 1
    return hist


def _lexicographically_smaller(new, old, k) -> bool:
    return _length_histogram(new, k) < _length_histogram(old, k)


def _remove_unit_slopes(f: PAMap, rho_budget: Fraction) -> PAMap:
    """3-fold away every piece of slope ±1, spending at most rho_budget.

    Long unit-slope pieces are subdivided so each window's image diameter
    stays within the budget.
    """
    g = f
    while True:
        target = None
        for i in range(g.piece_count):
            if abs(g.piece_slope(i)) == 1:
                target = i
                break
        if target is None:
            return g
        a, b = g.breakpoints[target], g.breakpoints[target + 1]
        max_len = rho_budget / 2  # image diam equals length on slope ±1
        n_chunks = 1
        while (b - a) / n_chunks > max_len:
            n_chunks += 1
        xs = [a + (b - a) * Fraction(t, n_chunks) for t in range(n_chunks + 1)]
        for lo, hi in zip(xs, xs[1:]):
            g = window_mfold(g, WindowSpec(IntervalQ(lo, hi), 3))


def _ensure_periodic_orbit(g: PAMap, k: int, rho_budget: Fraction) -> PAMap:
    """Guarantee Per(g,k) != ∅ via a 3-fold window around a fixed point."""
    from .periodic import fix_points, per_points
    if per_points(g, k):
        return g
    fixed = [p for p in fix_points(g, 1) if not isinstance(p.location, IntervalQ)]
    interior = [p for p in fixed if 0 < p.location < 1]
    if not interior:
        raise SearchFailureError("no interior fixed point to seed Per(g,k)")
    x0 = interior[0].location
    room = min(x0, 1 - x0, _distance_to_set(x0, crit(g)))
    radius = min(room / 2, rho_budget / (2 * g.max_abs_slope()))
    attempt = 0
    while attempt < 60:
        w = IntervalQ(x0 - radius, x0 + radius)
        cand = window_mfold(g, WindowSpec(w, 3))
        if per_points(cand, k):
            return cand
        radius /= 2
        attempt += 1
    raise SearchFailureError("3-fold seeding failed to create Per(g,k)")


def _distance_to_set(x: Fraction, points) -> Fraction:
    dists = [abs(x - p) for p in points if p != x]
    return min(dists) if dists else Fraction(1)


def make_transverse(f: PAMap, k: int, budget) -> PAMap:
    """Lemma-3.2 style repair: every point of Fix(g,k) transverse.

    Pipeline (each stage spends a geometric slice of the ρ budget):
      1. remove slope ±1 pieces (3-fold windows over them),
      2. push 0 and 1 out of Fix(.,k),
      3. destroy critical connections of length <= k, shortest first,
      4. seed Per(.,k) with a 3-fold window if empty.

    Output is measure preserving with ρ(f, out) < budget; transversality of
    every fixed point of g^k follows because no slope of g^k is ±1 and no
    Fix-orbit touches Crit(g) — and is certified exactly by the caller via
    classify_transverse.
    """
    budget = rat(budget)
    if budget <= 0:
        raise DomainError("budget must be positive")
    assert_measure_preserving(f, "(make_transverse input)")
    g = _remove_unit_slopes(f, budget / 4)
    g = remove_boundary_fix(g, k)
    if uniform_distance(f, g) >= budget:
        raise RepairBudgetError("boundary repair exhausted the budget")
    remaining = budget - uniform_distance(f, g)
    rounds = 0
    while True:
        conns = find_critical_connections(g, k)
        if not conns:
            break
        if rounds >= 500 or remaining <= 0:
            raise RepairBudgetError(
                f"connection repair did not terminate (left: {conns})",
                remaining=conns)
        slice_budget = remaining / 2
        g = _repair_connection(g, conns[0], k, slice_budget)
        remaining = budget - uniform_distance(f, g)
        rounds += 1
    g = remove_boundary_fix(g, k)
    g = _ensure_periodic_orbit(g, k, remaining / 2 if remaining > 0 else budget / 8)
    assert_measure_preserving(g, "(make_transverse output)")
    if uniform_distance(f, g) >= budget:
        raise RepairBudgetError("repair exceeded the ρ budget")
    if find_critical_connections(g, k):
        raise InvariantViolation("connections survived the repair loop")
    for s in g.slopes():
        if abs(s) == 1:
            raise InvariantViolation("slope ±1 survived the repair loop")
    return g
