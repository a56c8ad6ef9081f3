"""Exact rational helpers.

All coordinates in this library are `fractions.Fraction`.  The stdlib type
already guarantees reduced form and exact arithmetic; this module only adds
parsing/formatting for the "p/q" wire format and a few small utilities.
"""

from __future__ import annotations

from fractions import Fraction

Rat = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def rat(value, den=None) -> Fraction:
    """Coerce ints, "p/q" strings, or pairs to an exact Fraction."""
    if den is not None:
        return Fraction(value, den)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rat(value)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def parse_rat(text: str) -> Fraction:
    """Parse "p/q" or integer strings; rejects floats by design."""
    text = text.strip()
    if "/" in text:
        num, _, den = text.partition("/")
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def format_rat(x: Fraction) -> str:
    """Serialize to the "p/q" (or bare integer) wire format."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def floor_pow2_below(x: Fraction) -> Fraction:
    """Largest power of 1/2 that is <= x.  Requires 0 < x."""
    if x <= 0:
        raise ValueError("need a positive bound")
    p = Fraction(1)
    while p > x:
        p /= 2
    return p


def dist_to_int(x: Fraction) -> Fraction:
    """Exact distance from x to the nearest integer."""
    fl = x.numerator // x.denominator
    frac = x - fl
    return min(frac, 1 - frac)


def mediant_avoiding(lo: Fraction, hi: Fraction, forbidden) -> Fraction:
    """A rational strictly inside (lo, hi) avoiding a finite forbidden set.

    Deterministic: walks the sequence lo + (hi-lo)*k/(n+1) for growing n.
    """
    if not lo < hi:
        raise ValueError("empty interval")
    gap = hi - lo
    forbidden = set(forbidden)
    n = 2
    while True:
        for k in range(1, n):
            cand = lo + gap * Fraction(k, n)
            if cand not in forbidden:
                return cand
        n += 1
