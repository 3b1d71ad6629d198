"""Outward-rounded dyadic arithmetic.

Everything in the package that can stay an exact rational does.  This module
is the single entry point for the operations that cannot (square roots,
rational powers) and for snapping exact rationals onto a dyadic grid so that
box endpoints stay small.  All rounding here is outward: lower bounds round
down, upper bounds round up, so enclosures computed downstream are sound.

The grid resolution is ``2**-bits`` with ``bits`` taken from the
``CANTOR_FORGE_PRECISION_BITS`` environment variable (default 64) unless a
caller passes an explicit value.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction

DEFAULT_PRECISION_BITS = 64
PRECISION_ENV = "CANTOR_FORGE_PRECISION_BITS"

Rat = Fraction


def precision_bits(override: int | None = None) -> int:
    """Resolve the working precision in fractional bits."""
    if override is not None:
        bits = int(override)
    else:
        bits = int(os.environ.get(PRECISION_ENV, DEFAULT_PRECISION_BITS))
    if bits < 1:
        raise ValueError(f"precision must be at least 1 bit, got {bits}")
    return bits


def floor_div(x: Fraction) -> int:
    return x.numerator // x.denominator


def ceil_div(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def round_down(x: Fraction, bits: int) -> Fraction:
    """Largest multiple of 2**-bits that is <= x."""
    scale = 1 << bits
    return Fraction(floor_div(x * scale), scale)


def round_up(x: Fraction, bits: int) -> Fraction:
    scale = 1 << bits
    return Fraction(ceil_div(x * scale), scale)


def iroot_floor(n: int, k: int) -> int:
    """floor(n ** (1/k)) for non-negative integer n and k >= 1."""
    if n < 0:
        raise ValueError("negative radicand")
    if k == 1 or n in (0, 1):
        return n
    if k == 2:
        return math.isqrt(n)
    # Newton iteration on integers; the float seed is close enough that the
    # correction loop runs a handful of times even for huge n.
    x = int(n ** (1.0 / k)) + 1
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def root_bounds(x: Fraction, k: int, bits: int) -> tuple[Fraction, Fraction]:
    """Certified enclosure of x ** (1/k) for x >= 0, integer k >= 1.

    Returns an exact degenerate pair whenever x is a perfect k-th power of a
    rational (both numerator and denominator are k-th powers).  That exactness
    matters: several certified quantities (derivative floors among them) land
    on rational values that a one-ulp-outward answer would spoil.
    """
    if x < 0:
        raise ValueError("negative radicand")
    if k < 1:
        raise ValueError("root index must be positive")
    if k == 1 or x == 0:
        return (x, x)
    num_r = iroot_floor(x.numerator, k)
    den_r = iroot_floor(x.denominator, k)
    if num_r ** k == x.numerator and den_r ** k == x.denominator:
        exact = Fraction(num_r, den_r)
        return (exact, exact)
    scale = 1 << bits
    # (r / 2**bits) ** k <= x  <=>  r ** k <= x * 2**(k*bits)
    target = x * Fraction(scale) ** k
    r = iroot_floor(floor_div(target), k)
    lo = Fraction(r, scale)
    hi = Fraction(r + 1, scale)
    # Tighten hi when r+1 overshoots but r is already an upper bound
    # (can happen when target is just above an integer k-th power).
    if Fraction(r) ** k >= target:
        hi = lo
    return (lo, hi)


def sqrt_bounds(x: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    return root_bounds(x, 2, bits)


def pow_bounds(x: Fraction, e: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    """Certified enclosure of x ** e for x > 0 and rational e.

    Exact when the true value is rational (integer exponents, perfect
    roots).  Negative exponents go through the reciprocal.
    """
    if x <= 0:
        raise ValueError("pow_bounds requires a positive base")
    if e < 0:
        lo, hi = pow_bounds(x, -e, bits)
        return (1 / hi, 1 / lo)
    p = e.numerator
    q = e.denominator
    powed = x ** p
    if q == 1:
        return (powed, powed)
    return root_bounds(powed, q, bits)


@dataclass(frozen=True)
class IV:
    """Closed interval [lo, hi] with exact rational endpoints.

    Arithmetic is exact (no rounding per operation); callers round at the
    boundaries where dyadic endpoints are wanted.
    """

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval value [{self.lo}, {self.hi}]")

    @staticmethod
    def point(x) -> "IV":
        x = Fraction(x)
        return IV(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __add__(self, other: "IV") -> "IV":
        return IV(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "IV") -> "IV":
        return IV(self.lo - other.hi, self.hi - other.lo)

    def __neg__(self) -> "IV":
        return IV(-self.hi, -self.lo)

    def __mul__(self, other: "IV") -> "IV":
        products = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return IV(min(products), max(products))

    def scaled(self, c: Fraction) -> "IV":
        if c >= 0:
            return IV(self.lo * c, self.hi * c)
        return IV(self.hi * c, self.lo * c)

    def __truediv__(self, other: "IV") -> "IV":
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError("interval divisor contains zero")
        quotients = (
            self.lo / other.lo,
            self.lo / other.hi,
            self.hi / other.lo,
            self.hi / other.hi,
        )
        return IV(min(quotients), max(quotients))

    def abs(self) -> "IV":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return IV(Fraction(0), max(-self.lo, self.hi))

    def contains(self, x: Fraction) -> bool:
        return self.lo <= x <= self.hi

    def strictly_positive(self) -> bool:
        return self.lo > 0

    def sign_definite(self) -> bool:
        return self.lo > 0 or self.hi < 0

    def rounded(self, bits: int) -> "IV":
        return IV(round_down(self.lo, bits), round_up(self.hi, bits))


def iv_sqrt(v: IV, bits: int) -> IV:
    lo, _ = sqrt_bounds(v.lo, bits)
    _, hi = sqrt_bounds(v.hi, bits)
    return IV(lo, hi)


def iv_pow(v: IV, e: Fraction, bits: int) -> IV:
    """v ** e for v.lo > 0; monotone in the base for e of fixed sign."""
    if v.lo <= 0:
        raise ValueError("iv_pow requires a strictly positive interval")
    a_lo, a_hi = pow_bounds(v.lo, e, bits)
    b_lo, b_hi = pow_bounds(v.hi, e, bits)
    if e >= 0:
        return IV(a_lo, b_hi)
    return IV(b_lo, a_hi)
