"""Slice curves H(x, y) = c, their certified companions, and two demos.

A relation H(x, y) = c with a sign-definite partial in y defines y as a
monotone function g of x on a box.  Once |g'| is pinned between certified
rationals eta and B, the image g(K1) of a gap tree is again a gap tree
whose stage gaps are at least eta times the originals, so the 1-D
containment machinery applies verbatim to the curved image.  That is the
whole trick behind the pinned-distance demo; the obstruction demo works in
the other direction, tiling a window with translated companions and
pinning every admissible affine copy of the base set to the tile grid.

Floating point appears in exactly one place, the numeric slice solver,
and nothing certified depends on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from concurrent.futures import ThreadPoolExecutor

from .cantor1d import (
    CantorForgeError,
    GapTree,
    Interval,
    LevelOutOfRange,
    SymmetricGapTree,
    affine_image,
    as_rat,
    build_binary_ifs,
    rat_pair,
)
from .containment1d import (
    ChainBroken,
    build_companion,
    certify_difference_interior,
    check_dominance,
    dominance_slack,
    find_chain,
    grid_values,
)
from .dyadic import IV, iv_pow, pow_bounds, precision_bits

__all__ = [
    "HSpec",
    "SliceResult",
    "SliceDerivative",
    "MonotoneImageTree",
    "InteriorPoint",
    "InteriorReport",
    "DistanceDemoReport",
    "ObstructionSet",
    "MapRecord",
    "ObstructionReport",
    "NoBracket",
    "NoConvergence",
    "SignNotDefinite",
    "FamilyOutOfSlack",
    "implicit_slice",
    "derivative_bound",
    "nonlinear_companion",
    "verify_H_interior",
    "pinned_distance_demo",
    "erdos_obstruction",
]


class NoBracket(CantorForgeError):
    pass


class NoConvergence(CantorForgeError):
    def __init__(self, iterations: int):
        self.iterations = iterations
        super().__init__(f"slice solver did not converge within {iterations} iterations")


class SignNotDefinite(CantorForgeError):
    pass


class FamilyOutOfSlack(CantorForgeError):
    def __init__(self, offenders, slack: Fraction):
        self.offenders = tuple(offenders)
        self.slack = slack
        shown = ", ".join(f"(lam={l}, t={t})" for l, t in self.offenders[:4])
        more = "" if len(self.offenders) <= 4 else f" and {len(self.offenders) - 4} more"
        super().__init__(
            f"maps outside the slack window (1/{slack}, {slack}): {shown}{more}"
        )


_FAMILIES = ("affine-sum", "alpha-norm", "custom-1d")


@dataclass(frozen=True)
class HSpec:
    """A two-variable relation family plus the boxes it is studied on.

    lam_box is the parameter range (the slope for affine-sum, the exponent
    for alpha-norm), x_box/y_box the coordinate boxes.  Custom relations
    supply float callables h(lam, x, y) and hy(lam, x, y) and only the
    numeric solver accepts them; certified operations need one of the
    built-in families.
    """

    family: str
    lam_box: Interval
    x_box: Interval
    y_box: Interval | None = None
    h: object = None
    hy: object = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown family {self.family!r}, expected one of {_FAMILIES}")
        if self.family == "custom-1d" and (self.h is None or self.hy is None):
            raise ValueError("custom-1d needs h and hy callables")
        if self.family == "alpha-norm":
            if self.lam_box.lo != self.lam_box.hi:
                raise ValueError("alpha-norm takes a single exponent, not a range")
            if self.lam_box.lo <= 1:
                raise ValueError("alpha-norm exponent must exceed 1")

    # -- float side, used by the numeric solver only ---------------------

    def value_float(self, lam: float, x: float, y: float) -> float:
        if self.family == "affine-sum":
            return lam * x + y
        if self.family == "alpha-norm":
            return x**lam + y**lam
        return self.h(lam, x, y)

    def dy_float(self, lam: float, x: float, y: float) -> float:
        if self.family == "affine-sum":
            return 1.0
        if self.family == "alpha-norm":
            return lam * y ** (lam - 1.0)
        return self.hy(lam, x, y)

    # -- certified side ---------------------------------------------------

    def _require_builtin(self):
        if self.family == "custom-1d":
            raise ValueError("custom-1d relations support numeric slicing only")

    def slice_enclosure(self, lam_iv: IV, c_iv: IV, x_iv: IV, bits: int) -> IV:
        """Enclosure of g(x) = the y solving H = c, over boxes of inputs."""
        self._require_builtin()
        if self.family == "affine-sum":
            return c_iv - lam_iv * x_iv
        alpha = self.lam_box.lo
        inner = c_iv - iv_pow(x_iv, alpha, bits)
        if inner.lo <= 0:
            raise SignNotDefinite("c - x^alpha is not positive on the box")
        return iv_pow(inner, 1 / alpha, bits)

    def slice_point(self, lam: Fraction, c: Fraction, x: Fraction, bits: int) -> IV:
        return self.slice_enclosure(IV.point(lam), IV.point(c), IV.point(x), bits)

    def residual_enclosure(self, lam, c, x, y, bits: int) -> IV:
        """Enclosure of H(lam, x, y) - c at rational arguments."""
        self._require_builtin()
        if self.family == "affine-sum":
            return IV.point(lam * x + y - c)
        alpha = self.lam_box.lo
        xa = pow_bounds(x, alpha, bits)
        ya = pow_bounds(y, alpha, bits)
        return IV(xa[0] + ya[0] - c, xa[1] + ya[1] - c)


@dataclass(frozen=True)
class SliceResult:
    y: float
    residual: float
    iterations: int


def implicit_slice(
    spec: HSpec,
    lam,
    c,
    x,
    bracket=None,
    tol: float = 1e-12,
    max_iters: int = 200,
) -> SliceResult:
    """Solve H(lam, x, y) = c for y numerically.

    Damped Newton inside a sign-change bracket, falling back to bisection
    whenever the Newton step misbehaves.  Raises NoBracket if the bracket
    endpoints do not straddle a root and NoConvergence past max_iters.
    This is the only float path in the package; use it for exploration,
    not certification.
    """
    lam_f, c_f, x_f = float(lam), float(c), float(x)
    if bracket is None:
        if spec.y_box is None:
            raise NoBracket("no bracket given and the relation has no y box")
        a, b = float(spec.y_box.lo), float(spec.y_box.hi)
    else:
        a, b = float(bracket[0]), float(bracket[1])
    if a > b:
        a, b = b, a

    def f(y):
        return spec.value_float(lam_f, x_f, y) - c_f

    fa, fb = f(a), f(b)
    if fa == 0.0:
        return SliceResult(a, 0.0, 0)
    if fb == 0.0:
        return SliceResult(b, 0.0, 0)
    if fa * fb > 0.0:
        raise NoBracket(f"no sign change on [{a}, {b}]")
    y = 0.5 * (a + b)
    for it in range(1, max_iters + 1):
        fy = f(y)
        if abs(fy) <= tol:
            return SliceResult(y, fy, it)
        if fa * fy < 0.0:
            b, fb = y, fy
        else:
            a, fa = y, fy
        dy = spec.dy_float(lam_f, x_f, y)
        step_ok = dy != 0.0 and math.isfinite(dy)
        if step_ok:
            cand = y - fy / dy
            step_ok = a < cand < b
        y = cand if step_ok else 0.5 * (a + b)
        if b - a <= tol * max(1.0, abs(y)):
            return SliceResult(y, f(y), it)
    raise NoConvergence(max_iters)


@dataclass(frozen=True)
class SliceDerivative:
    """Certified facts about the slice x -> y on given boxes."""

    decreasing: bool
    lower: Fraction
    upper: Fraction
    y_range: Interval


def _slice_derivative_data(
    spec: HSpec, lam_box: Interval, c_box: Interval, x_box: Interval, bits: int
) -> SliceDerivative:
    spec._require_builtin()
    if spec.family == "affine-sum":
        if lam_box.lo <= 0 <= lam_box.hi:
            raise SignNotDefinite("slope range contains zero")
        lam_iv = IV(lam_box.lo, lam_box.hi)
        y_iv = IV(c_box.lo, c_box.hi) - lam_iv * IV(x_box.lo, x_box.hi)
        lower = min(abs(lam_box.lo), abs(lam_box.hi))
        upper = max(abs(lam_box.lo), abs(lam_box.hi))
        return SliceDerivative(lam_box.lo > 0, lower, upper, Interval(y_iv.lo, y_iv.hi))
    alpha = spec.lam_box.lo
    if x_box.lo <= 0:
        raise SignNotDefinite("x box must be strictly positive for alpha-norm")
    x_hi_pow = pow_bounds(x_box.hi, alpha, bits)[1]
    x_lo_pow = pow_bounds(x_box.lo, alpha, bits)[0]
    if c_box.lo - x_hi_pow <= 0:
        raise SignNotDefinite("y^alpha = c - x^alpha can reach zero on the box")
    y_lo = iv_pow(IV.point(c_box.lo - x_hi_pow), 1 / alpha, bits).lo
    y_hi = iv_pow(IV.point(c_box.hi - x_lo_pow), 1 / alpha, bits).hi
    lower = pow_bounds(x_box.lo / y_hi, alpha - 1, bits)[0]
    upper = pow_bounds(x_box.hi / y_lo, alpha - 1, bits)[1]
    if lower <= 0:
        raise SignNotDefinite("derivative lower bound collapsed to zero")
    return SliceDerivative(True, lower, upper, Interval(y_lo, y_hi))


def derivative_bound(spec: HSpec, c_box: Interval, lam_box: Interval, x_box: Interval, bits=None) -> Fraction:
    """Certified positive lower bound on |dy/dx| along slices H = c.

    Exact when the arithmetic stays rational: squares, integer exponents
    and perfect powers come out on the nose, everything else is rounded
    outward at the working precision.
    """
    return _slice_derivative_data(spec, lam_box, c_box, x_box, precision_bits(bits)).lower


class MonotoneImageTree(GapTree):
    """Image of a gap tree under a certified monotone slice map.

    Intervals are mapped lazily and outward; for a decreasing slice the
    address bits flip so that lexicographic order still means left to
    right.  Per-level gap bounds come from the certified derivative range
    rather than from the (outward, hence overstated) mapped endpoints,
    which is why gap_bounds_certified_only is true here.
    """

    def __init__(self, base: GapTree, spec: HSpec, lam, c, data: SliceDerivative, bits=None):
        self.base = base
        self.spec = spec
        self.lam = as_rat(lam)
        self.c = as_rat(c)
        self.data = data
        self.bits = precision_bits(bits)
        a = spec.slice_point(self.lam, self.c, base.hull.lo, self.bits)
        b = spec.slice_point(self.lam, self.c, base.hull.hi, self.bits)
        self.hull = Interval(min(a.lo, b.lo), max(a.hi, b.hi))
        self.depth = base.depth

    def _base_addr(self, addr: str) -> str:
        if not self.data.decreasing:
            return addr
        return "".join("1" if ch == "0" else "0" for ch in addr)

    def _map_outward(self, iv: Interval) -> Interval:
        a = self.spec.slice_point(self.lam, self.c, iv.lo, self.bits)
        b = self.spec.slice_point(self.lam, self.c, iv.hi, self.bits)
        return Interval(min(a.lo, b.lo), max(a.hi, b.hi))

    def interval(self, addr: str) -> Interval:
        if len(addr) > self.depth:
            raise LevelOutOfRange(len(addr), self.depth)
        return self._map_outward(self.base.interval(self._base_addr(addr)))

    def gap(self, addr: str) -> Interval:
        # Inward enclosure: a reported gap must sit inside the true one.
        g = self.base.gap(self._base_addr(addr))
        a = self.spec.slice_point(self.lam, self.c, g.lo, self.bits)
        b = self.spec.slice_point(self.lam, self.c, g.hi, self.bits)
        lo, hi = min(a.hi, b.hi), max(a.lo, b.lo)
        if lo > hi:
            mid = (lo + hi) / 2
            lo = hi = mid
        return Interval(lo, hi)

    def gap_bounds_certified_only(self) -> bool:
        return True

    def level_min_gap(self, n: int) -> Fraction:
        return self.data.lower * self.base.level_min_gap(n)

    def level_max_gap(self, n: int) -> Fraction:
        return self.data.upper * self.base.level_max_gap(n)

    def level_max_length(self, n: int) -> Fraction:
        return self.data.upper * self.base.level_max_length(n)


def nonlinear_companion(
    k1: GapTree,
    spec: HSpec,
    lam_box: Interval,
    c_box: Interval,
    depth: int | None = None,
    shrink=Fraction(1, 2),
    pad=None,
    anchor="gap-right",
    bits=None,
) -> SymmetricGapTree:
    """Symmetric companion sized for every slice image of k1 on the boxes.

    Stage-n gaps are shrink * eta * (stage-n min gap of k1), capped at
    feasibility, so any single slice image dominates the companion no
    matter which (lam, c) in the boxes produced it.  The hull is the
    certified image range padded on both sides.  The anchor is a recorded
    base point (default: right endpoint of the root gap) kept in the
    returned tree's meta dict along with eta and the padding.
    """
    bits = precision_bits(bits)
    depth = k1.depth if depth is None else depth
    if depth < 1 or depth > k1.depth:
        raise LevelOutOfRange(depth, k1.depth)
    data = _slice_derivative_data(spec, lam_box, c_box, k1.hull, bits)
    image = spec.slice_enclosure(
        IV(lam_box.lo, lam_box.hi),
        IV(c_box.lo, c_box.hi),
        IV(k1.hull.lo, k1.hull.hi),
        bits,
    )
    if pad is None:
        pad = (image.hi - image.lo) / 64 + Fraction(1, 1 << 40)
    pad = as_rat(pad)
    if pad <= 0:
        raise ValueError("pad must be positive")
    hull = Interval(image.lo - pad, image.hi + pad)
    shrink = as_rat(shrink)
    if not Fraction(0) < shrink < 1:
        raise ValueError("shrink must lie strictly between 0 and 1")
    gaps = []
    length = hull.length
    for n in range(depth):
        want = shrink * data.lower * k1.level_min_gap(n)
        cap = length / 2
        g = want if want < cap else cap
        gaps.append(g)
        length = (length - g) / 2
    tree = SymmetricGapTree(hull, tuple(gaps))
    if anchor == "gap-right":
        anchor_pt = k1.gap("").hi
    else:
        anchor_pt = as_rat(anchor)
    mid_lam = lam_box.midpoint()
    mid_c = c_box.midpoint()
    a_img = spec.slice_point(mid_lam, mid_c, anchor_pt, bits)
    tree.meta = {
        "eta": data.lower,
        "upper": data.upper,
        "decreasing": data.decreasing,
        "pad": pad,
        "anchor": anchor_pt,
        "anchor_image": (a_img.lo, a_img.hi),
    }
    return tree


@dataclass(frozen=True)
class InteriorPoint:
    c: Fraction
    lam: Fraction
    ok: bool
    reason: str | None
    residual: Fraction | None
    witness_x: Fraction | None
    witness_y: Fraction | None
    bound: Fraction | None

    def to_json_obj(self):
        return {
            "c": rat_pair(self.c),
            "lam": rat_pair(self.lam),
            "ok": self.ok,
            "reason": self.reason,
            "residual": None if self.residual is None else rat_pair(self.residual),
            "witness": None
            if self.witness_x is None
            else [rat_pair(self.witness_x), rat_pair(self.witness_y)],
            "bound": None if self.bound is None else rat_pair(self.bound),
        }


@dataclass(frozen=True)
class InteriorReport:
    eta: Fraction
    upper: Fraction
    decreasing: bool
    levels: int
    tol: Fraction
    points: tuple[InteriorPoint, ...]
    all_ok: bool
    certified_c: Interval | None

    @property
    def ok_count(self) -> int:
        return sum(1 for p in self.points if p.ok)

    def to_json_obj(self):
        return {
            "eta": rat_pair(self.eta),
            "derivative_upper": rat_pair(self.upper),
            "decreasing": self.decreasing,
            "levels": self.levels,
            "tol": rat_pair(self.tol),
            "ok_count": self.ok_count,
            "total": len(self.points),
            "all_ok": self.all_ok,
            "certified_c": None
            if self.certified_c is None
            else [rat_pair(self.certified_c.lo), rat_pair(self.certified_c.hi)],
            "points": [p.to_json_obj() for p in self.points],
        }


def verify_H_interior(
    spec: HSpec,
    k1: GapTree,
    k2: GapTree,
    c_values,
    lam_values,
    levels: int,
    tol,
    bits=None,
    threads: int = 1,
) -> InteriorReport:
    """Chain every (c, lam) grid point through the slice image of k1 into k2.

    One derivative certificate covers the whole grid (computed on the hulls
    of the value lists), then each point gets its own image tree, dominance
    check, chain, and an exact-rational residual at the pinned witness
    pair.  A point passes when the chain lands and the residual is at most
    tol.  certified_c is the longest contiguous run of c values whose every
    lam row passed, None if there is none.
    """
    bits = precision_bits(bits)
    tol = as_rat(tol)
    c_values = [as_rat(c) for c in c_values]
    lam_values = [as_rat(l) for l in lam_values]
    if not c_values or not lam_values:
        raise ValueError("need at least one c and one lam value")
    lam_box = Interval(min(lam_values), max(lam_values))
    c_box = Interval(min(c_values), max(c_values))
    data = _slice_derivative_data(spec, lam_box, c_box, k1.hull, bits)

    def run_point(pair):
        c, lam = pair
        image = MonotoneImageTree(k1, spec, lam, c, data, bits)
        report = check_dominance(image, k2, levels)
        if not report.overall:
            bad = [r.level for r in report.levels if not r.passed]
            why = "hull" if not report.hull_contained else f"dominance-{bad[0]}"
            return InteriorPoint(c, lam, False, why, None, None, None, None)
        try:
            chain = find_chain(image, k2, levels)
        except ChainBroken as exc:
            return InteriorPoint(c, lam, False, f"chain-broken-{exc.level}", None, None, None, None)
        addr_img, addr_k2 = chain.final_addresses
        x_pt = k1.interval(image._base_addr(addr_img)).midpoint()
        y_iv = spec.slice_point(lam, c, x_pt, bits)
        cell = k2.interval(addr_k2)
        lo = max(y_iv.lo, cell.lo)
        hi = min(y_iv.hi, cell.hi)
        if lo > hi:
            return InteriorPoint(c, lam, False, "witness-escaped-cell", None, None, None, None)
        y_pt = (lo + hi) / 2
        resid = _abs_hi(spec.residual_enclosure(lam, c, x_pt, y_pt, bits))
        ok = resid <= tol
        reason = None if ok else "residual"
        return InteriorPoint(c, lam, ok, reason, resid, x_pt, y_pt, chain.bound)

    grid = [(c, lam) for c in c_values for lam in lam_values]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = tuple(pool.map(run_point, grid))
    else:
        points = tuple(run_point(p) for p in grid)

    per_c_ok = []
    m = len(lam_values)
    for i in range(len(c_values)):
        per_c_ok.append(all(p.ok for p in points[i * m : (i + 1) * m]))
    certified = _longest_true_run(c_values, per_c_ok)
    return InteriorReport(
        eta=data.lower,
        upper=data.upper,
        decreasing=data.decreasing,
        levels=levels,
        tol=tol,
        points=points,
        all_ok=all(p.ok for p in points),
        certified_c=certified,
    )


def _abs_hi(iv: IV) -> Fraction:
    return max(abs(iv.lo), abs(iv.hi))


def _longest_true_run(values, flags) -> Interval | None:
    best = None
    start = None
    for i, ok in enumerate(flags + [False]):
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            if best is None or (i - start) > (best[1] - best[0]):
                best = (start, i)
            start = None
    if best is None:
        return None
    return Interval(values[best[0]], values[best[1] - 1])


@dataclass(frozen=True)
class DistanceDemoReport:
    dimension: int
    alpha: Fraction
    depth: int
    base_hull: Interval
    companion_hull: Interval
    eta: Fraction
    interior: InteriorReport
    coverage: Interval | None

    def to_json_obj(self):
        return {
            "dimension": self.dimension,
            "alpha": rat_pair(self.alpha),
            "depth": self.depth,
            "base_hull": [rat_pair(self.base_hull.lo), rat_pair(self.base_hull.hi)],
            "companion_hull": [
                rat_pair(self.companion_hull.lo),
                rat_pair(self.companion_hull.hi),
            ],
            "eta": rat_pair(self.eta),
            "coverage": None
            if self.coverage is None
            else [rat_pair(self.coverage.lo), rat_pair(self.coverage.hi)],
            "interior": self.interior.to_json_obj(),
        }


def pinned_distance_demo(
    alpha=2,
    dimension: int = 2,
    depth: int = 12,
    c_range: Interval | None = None,
    grid: int = 101,
    tol=Fraction(1, 10**8),
    bits=None,
    threads: int = 1,
) -> DistanceDemoReport:
    """Certify an interval of distances pinned at the origin.

    The planar set is a product of a thin self-similar set with itself
    (higher even dimensions just carry passthrough coordinates pinned at
    the hull midpoint); distances from the origin are values of
    x^alpha + y^alpha up to the alpha-th root, so an interior interval of
    c values becomes an interval of achieved distances.  alpha must exceed
    1: at alpha = 1 the slice derivative degenerates to -1 everywhere and
    the distance reading breaks down at the axes, so it is rejected.
    """
    alpha = as_rat(alpha)
    if alpha <= 1:
        raise ValueError("alpha must exceed 1; the alpha = 1 slice degenerates")
    if dimension < 2 or dimension % 2 != 0:
        raise ValueError("dimension must be an even integer at least 2")
    if c_range is None:
        c_range = Interval(Fraction(19, 20), Fraction(21, 20))
    k1 = build_binary_ifs(Interval(Fraction(11, 20), Fraction(13, 20)), Fraction(1, 10), depth)
    spec = HSpec("alpha-norm", Interval(alpha, alpha), k1.hull)
    c_values = grid_values(c_range, grid)
    k2 = nonlinear_companion(k1, spec, spec.lam_box, c_range, depth=depth, bits=bits)
    interior = verify_H_interior(
        spec, k1, k2, c_values, [alpha], depth, tol, bits=bits, threads=threads
    )
    coverage = None
    if interior.certified_c is not None:
        b = precision_bits(bits)
        lo = iv_pow(IV.point(interior.certified_c.lo), 1 / alpha, b).lo
        hi = iv_pow(IV.point(interior.certified_c.hi), 1 / alpha, b).hi
        coverage = Interval(lo, hi)
    return DistanceDemoReport(
        dimension=dimension,
        alpha=alpha,
        depth=depth,
        base_hull=k1.hull,
        companion_hull=k2.hull,
        eta=interior.eta,
        interior=interior,
        coverage=coverage,
    )


@dataclass(frozen=True)
class ObstructionSet:
    """Translates of one companion tree tiling a window."""

    companion: SymmetricGapTree
    spacing: Fraction
    window: Interval
    k_lo: int
    k_hi: int

    @property
    def translate_count(self) -> int:
        return self.k_hi - self.k_lo + 1

    def translate(self, index: int) -> SymmetricGapTree:
        return affine_image(self.companion, Fraction(1), index * self.spacing)


@dataclass(frozen=True)
class MapRecord:
    lam: Fraction
    t: Fraction
    ok: bool
    translate_index: int | None
    reason: str | None
    bound: Fraction | None
    witness_map: Fraction | None
    witness_set: Fraction | None

    def to_json_obj(self):
        return {
            "lam": rat_pair(self.lam),
            "t": rat_pair(self.t),
            "ok": self.ok,
            "translate_index": self.translate_index,
            "reason": self.reason,
            "bound": None if self.bound is None else rat_pair(self.bound),
            "witness_map": None if self.witness_map is None else rat_pair(self.witness_map),
            "witness_set": None if self.witness_set is None else rat_pair(self.witness_set),
        }


@dataclass(frozen=True)
class ObstructionReport:
    window: Interval
    spacing: Fraction
    certified: Interval
    slack: Fraction
    k_range: tuple[int, int]
    records: tuple[MapRecord, ...]
    all_ok: bool

    def to_json_obj(self):
        return {
            "window": [rat_pair(self.window.lo), rat_pair(self.window.hi)],
            "spacing": rat_pair(self.spacing),
            "certified": [rat_pair(self.certified.lo), rat_pair(self.certified.hi)],
            "slack": rat_pair(self.slack),
            "k_range": list(self.k_range),
            "translate_count": self.k_range[1] - self.k_range[0] + 1,
            "all_ok": self.all_ok,
            "hits": sum(1 for r in self.records if r.ok),
            "total": len(self.records),
            "records": [r.to_json_obj() for r in self.records],
        }


def erdos_obstruction(
    k: GapTree,
    family,
    window: Interval,
    levels: int,
    margin=Fraction(1, 10),
    factor=Fraction(1, 2),
    threads: int = 1,
) -> ObstructionReport:
    """One bounded set meeting every in-slack affine copy of k in a window.

    The obstruction is a grid of translates of k's companion spaced by the
    certified difference-interval length, so consecutive translates leave
    no uncovered offsets: for any map x -> lam*x + t with 1/slack < |lam|
    < slack, some translate admits a containment chain against the moved
    tree, pinning an intersection point.  Maps outside the slack bounds
    and maps whose image escapes the window are both rejected upfront
    with FamilyOutOfSlack.
    """
    family = [(as_rat(l), as_rat(t)) for l, t in family]
    khat = build_companion(k, levels, margin=margin, factor=factor)
    certified = certify_difference_interior(k, khat, levels)
    spacing = certified.length
    slack = dominance_slack(k, khat, levels)

    def image_hull(lam: Fraction, t: Fraction) -> tuple[Fraction, Fraction]:
        a, b = lam * k.hull.lo + t, lam * k.hull.hi + t
        return (a, b) if a <= b else (b, a)

    offenders = []
    for l, t in family:
        if l == 0 or not (1 / slack < abs(l) < slack):
            offenders.append((l, t))
            continue
        mh_lo, mh_hi = image_hull(l, t)
        if mh_lo < window.lo or mh_hi > window.hi:
            offenders.append((l, t))
    if offenders:
        raise FamilyOutOfSlack(offenders, slack)
    # Every translate that meets the window; an in-window image hull then
    # always finds its covering translate inside this range.
    k_lo = -((khat.hull.hi - window.lo) // spacing)  # ceil((w.lo - hull.hi)/spacing)
    k_hi = (window.hi - khat.hull.lo) // spacing
    k_lo, k_hi = int(k_lo), int(k_hi)
    if k_lo > k_hi:
        raise ValueError("window cannot hold a single companion translate")
    obstruction = ObstructionSet(khat, spacing, window, k_lo, k_hi)

    def run_map(pair):
        lam, t = pair
        moved = affine_image(k, lam, t)
        i_hi = (moved.hull.lo - khat.hull.lo) // spacing
        i_lo = -((khat.hull.hi - moved.hull.hi) // spacing)
        i_lo, i_hi = int(i_lo), int(i_hi)
        i = max(i_lo, k_lo)
        if i > min(i_hi, k_hi):
            return MapRecord(lam, t, False, None, "no-translate-in-window", None, None, None)
        target = obstruction.translate(i)
        report = check_dominance(moved, target, levels)
        if not report.overall:
            return MapRecord(lam, t, False, i, "dominance", None, None, None)
        try:
            chain = find_chain(moved, target, levels)
        except ChainBroken as exc:
            return MapRecord(lam, t, False, i, f"chain-broken-{exc.level}", None, None, None)
        return MapRecord(
            lam, t, True, i, None, chain.bound, chain.witness_k, chain.witness_kt
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = tuple(pool.map(run_map, family))
    else:
        records = tuple(run_map(p) for p in family)
    return ObstructionReport(
        window=window,
        spacing=spacing,
        certified=certified,
        slack=slack,
        k_range=(k_lo, k_hi),
        records=records,
        all_ok=all(r.ok for r in records),
    )
