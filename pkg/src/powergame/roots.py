"""Bracketed scalar root finding.

All characteristic-SINR equations used here cross zero exactly once, from
positive to negative.  The bracket is grown geometrically from a starting
point and then collapsed by plain bisection; bisection is preferred over
Newton steps because the second derivative of the efficiency models changes
sign inside the search interval.
"""

from __future__ import annotations

from typing import Callable

from .errors import SolverError

BRACKET_FLOOR = 1e-12


def expand_bracket(
    fn: Callable[[float], float],
    start: float = 1.0,
    floor: float = BRACKET_FLOOR,
    max_doublings: int = 200,
) -> tuple[float, float] | None:
    """Find [lo, hi] with fn(lo) > 0 >= fn(hi) around a sign change.

    Doubles upward from `start` while fn is positive, halves downward while
    it is negative.  Returns None when fn stays negative all the way down to
    `floor`, which callers interpret as "no positive root".
    """
    f0 = fn(start)
    if f0 == 0.0:
        return start, start
    if f0 > 0.0:
        lo, hi = start, 2.0 * start
        for _ in range(max_doublings):
            if fn(hi) <= 0.0:
                return lo, hi
            lo, hi = hi, 2.0 * hi
        raise SolverError(f"no sign change found expanding up from {start}")
    lo, hi = 0.5 * start, start
    for _ in range(max_doublings):
        if lo < floor:
            return None
        if fn(lo) > 0.0:
            return lo, hi
        lo, hi = 0.5 * lo, lo
    raise SolverError(f"no sign change found contracting down from {start}")


def bisect(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    rel_tol: float = 1e-15,
    max_iter: int = 200,
) -> float:
    """Bisection on a bracket with fn(lo) > 0 >= fn(hi)."""
    if lo == hi:
        return lo
    if not lo < hi:
        raise SolverError(f"invalid bracket [{lo}, {hi}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break  # interval collapsed to adjacent floats
        if fn(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rel_tol * hi:
            break
    return 0.5 * (lo + hi)
