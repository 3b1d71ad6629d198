"""Independent cross-checks for the test suite.

Everything here recomputes answers from first principles and shares as
little machinery with the library as it can get away with.  Covers come
from digit expansions, intersection questions are settled by sweeps over
sorted endpoint lists or plain brute force, and floating recomputations
go through mpmath.  Agreement between a library result and one of these
oracles is the point of the exercise; neither side is trusted alone.
"""

from fractions import Fraction
from functools import lru_cache
from itertools import product

import mpmath


@lru_cache(maxsize=None)
def thirds_cover(depth):
    """Level-``depth`` intervals of the middle-thirds set on [0, 1].

    Built straight from ternary digits: a surviving interval corresponds to
    a digit string over {0, 2}, its left endpoint is the digit sum.  No gap
    trees involved.  Cached, so treat the returned list as read-only.
    """
    third = Fraction(1, 3)
    out = []
    for bits in range(1 << depth):
        lo = Fraction(0)
        for i in range(depth):
            if (bits >> (depth - 1 - i)) & 1:
                lo += 2 * third ** (i + 1)
        out.append((lo, lo + third ** depth))
    out.sort()
    return out


def tree_cover(tree, level):
    """Sorted closed intervals covering the tree at one level."""
    return sorted((iv.lo, iv.hi) for iv in tree.level_intervals(level))


def covers_intersect(a, b, shift=Fraction(0)):
    """Does any interval of ``a`` meet any interval of ``b + shift``?

    Both inputs are sorted lists of (lo, hi) pairs, treated as closed, so
    touching endpoints count as a hit.  Two-pointer sweep, linear time.
    """
    i = j = 0
    while i < len(a) and j < len(b):
        alo, ahi = a[i]
        blo = b[j][0] + shift
        bhi = b[j][1] + shift
        if ahi < blo:
            i += 1
        elif bhi < alo:
            j += 1
        else:
            return True
    return False


def minkowski_difference_cover(a, b):
    """Merged interval list of {x - y : x in a-intervals, y in b-intervals}.

    Quadratic in the cover sizes, fine at the scales the tests use.  The
    result is sorted and overlap-free, so membership checks afterwards are
    a bisect away.
    """
    raw = sorted((xlo - yhi, xhi - ylo) for xlo, xhi in a for ylo, yhi in b)
    merged = []
    for lo, hi in raw:
        if merged and lo <= merged[-1][1]:
            if hi > merged[-1][1]:
                merged[-1] = (merged[-1][0], hi)
        else:
            merged.append((lo, hi))
    return merged


def point_covered(cover, x):
    from bisect import bisect_right

    idx = bisect_right(cover, (x, x))
    for k in (idx - 1, idx):
        if 0 <= k < len(cover) and cover[k][0] <= x <= cover[k][1]:
            return True
    return False


# ---------------------------------------------------------------------------
# boxes in d dimensions

def cert_component_boxes(cert, level):
    """Bounding boxes of every certificate component at one chain depth."""
    boxes = []
    for node in cert.nodes_at_level(level):
        for comp in node.components:
            boxes.append(tuple((iv.lo, iv.hi) for iv in comp.bbox))
    return boxes


def companion_cell_boxes(companion, level):
    """All level-``level`` product cells of the companion cube tree."""
    axis = [(iv.lo, iv.hi) for iv in companion.base.level_intervals(level)]
    return [tuple(combo) for combo in product(axis, repeat=companion.dim)]


def boxes_intersect(boxes_a, boxes_b, shift):
    """Brute force: does any closed box of ``a`` meet any of ``b + shift``?"""
    d = len(shift)
    shifted = [
        tuple((lo + shift[ax], hi + shift[ax]) for ax, (lo, hi) in enumerate(box))
        for box in boxes_b
    ]
    for A in boxes_a:
        for B in shifted:
            for ax in range(d):
                if A[ax][1] < B[ax][0] or B[ax][1] < A[ax][0]:
                    break
            else:
                return True
    return False


# ---------------------------------------------------------------------------
# high-precision and exact recomputation for the slice solvers

def recheck_alpha_residual(alpha, c, x, y, dps=50):
    """|x**alpha + y**alpha - c| recomputed with mpmath at ``dps`` digits.

    Inputs are Fractions (alpha may be an int).  Independent of all the
    dyadic interval code in the package.
    """
    with mpmath.workdps(dps):
        def conv(r):
            r = Fraction(r)
            return mpmath.mpf(r.numerator) / mpmath.mpf(r.denominator)

        val = mpmath.power(conv(x), conv(alpha)) + mpmath.power(conv(y), conv(alpha)) - conv(c)
        return abs(val)


def sqrt_diff_at_least(s1, s2, m):
    """Exact test of sqrt(s1) - sqrt(s2) >= m for rationals s1 >= s2 >= 0, m >= 0.

    Squares twice instead of taking roots, so the answer never depends on
    rounding.  Used to check image-length lower bounds for y = sqrt(c - x^2).
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    if s1 < s2:
        return False
    # sqrt(s1) >= m + sqrt(s2); both sides nonnegative
    lhs = s1 - s2 - m * m
    if lhs < 0:
        return False
    return lhs * lhs >= 4 * m * m * s2


def circle_slope_at_least(eta, c, x):
    """Exact test of |g'(x)| >= eta for g(x) = sqrt(c - x^2).

    |g'| = x / sqrt(c - x^2); squaring clears the root.  Requires
    0 < x and x^2 < c.
    """
    if x <= 0 or x * x >= c:
        raise ValueError("need 0 < x with x^2 < c")
    return x * x >= eta * eta * (c - x * x)
