"""Bundled example maps used by the demos, the CLI scenarios and the tests.

`gentle_base_map` is the workhorse for the counting experiments: a measure
preserving map whose single diagonal crossing sits on a piece of slope
-50/49.  Keeping the fixed-point slope this close to ±1 is what makes the
sliding-window density laws hold at every refinement depth k/k(x) > 1; a
steep crossing (|slope| ≥ 2) would violate them for k ≥ 2.
"""

from __future__ import annotations

from fractions import Fraction

from .pamap import PAMap, identity_map, tent_map, valley_map

F = Fraction

__all__ = [
    "tent_map",
    "valley_map",
    "identity_map",
    "gentle_base_map",
    "band_notch_map",
    "boundary_two_cycle_map",
    "three_branch_map",
]


def gentle_base_map() -> PAMap:
    """Measure-preserving map with one gentle diagonal crossing at 1/2.

    Three steep full sweeps of [1/2,1] on [0, 1/100], a long middle branch
    of slope -50/49 from (1/100, 1) to (99/100, 0), three steep sweeps of
    [0,1/2] on [99/100, 1].  Cell sums: 3/150 + 49/50 = 1 on both halves.
    The only solution of f(x) = x is x = 1/2 (the steep blocks stay on the
    off-diagonal side), every other Fix(f,k)-orbit alternates strictly
    around 1/2, so odd least periods > 1 do not occur.
    """
    return PAMap.make(
        [0, F(1, 300), F(1, 150), F(1, 100), F(99, 100), F(149, 150), F(299, 300), 1],
        [F(1, 2), 1, F(1, 2), 1, 0, F(1, 2), 0, F(1, 2)],
    )


def band_notch_map(gentleness: int = 480) -> PAMap:
    """The bundled transverse base map for the counting experiments.

    Three value bands, each with exact coverage 1 (Q = `gentleness`):
      (3/4, 1):  the opening Λ of slopes ±2              (1/2 + 1/2),
      (1/4, 3/4): a steep notch (slopes ±2(Q+1)) at x = 0 plus the long
                  gentle branch of slope -(Q+1)/Q   (2/(2(Q+1)) + Q/(Q+1)),
      (0, 1/4):  the closing V of slopes ±2              (1/2 + 1/2).

    The geometry is chosen so that the unique fixed point sits on the
    gentle branch, the map swaps the two sides of the fixed point (hence
    no odd least periods beyond 1), and no short periodic orbit can touch
    the steep branches: the notch's domain [0, 1/(2(Q+1))] is disjoint
    from the value range any partner could send it back from.  Keeping
    every Fix(.,k<=3)-orbit on slopes <= 2, with the fixed point's slope
    within 1/Q of -1, is what makes the sliding-window density laws of
    the refinement construction hold at small fold counts; Q = 480 leaves
    the deepest scan (k=3, 7-fold windows) an exact margin on both sides.
    The test suite re-verifies all of this exactly.
    """
    Q = gentleness
    q1 = F(1, 4 * (Q + 1))
    return PAMap.make(
        [0, q1, 2 * q1, 2 * q1 + F(1, 8), 2 * q1 + F(1, 4), F(3, 4), F(7, 8), 1],
        [F(3, 4), F(1, 4), F(3, 4), 1, F(3, 4), F(1, 4), 0, F(1, 4)],
    )


def boundary_two_cycle_map() -> PAMap:
    """Three full branches with f(0)=1, f(1)=0: the boundary is a 2-cycle."""
    return PAMap.make([0, F(1, 3), F(2, 3), 1], [1, 0, 1, 0])


def three_branch_map() -> PAMap:
    """Three full branches, f(0)=0: slopes 3, -3, 3."""
    return PAMap.make([0, F(1, 3), F(2, 3), 1], [0, 1, 0, 1])
