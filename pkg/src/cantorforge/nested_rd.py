"""Nested cube representations and non-degeneracy certificates in R^d.

The geometry model is a product of one-dimensional pieces (gap trees or
single points), optionally pushed through an affine map whose entries are
tiny intervals.  At dyadic scale 2**-m the set is covered by the closed
cubes of that side meeting it; connected components of the cover (cubes
that share even a corner count as adjacent) are the nodes of the nested
representation.

A non-degeneracy certificate picks, inside every node, d+1 descendant
components that are pairwise separated on every coordinate axis.  All
separations are reported as certified lower bounds computed from outward
boxes, so a certificate that exists is a proof.  Ratio bounds for the
kappa-comparability test are evaluated per cell pair at the corners of the
joint difference box, which is where a coordinate ratio of affine
functions attains its extremes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .cantor1d import (
    CantorForgeError,
    GapTree,
    Interval,
    SymmetricGapTree,
    as_rat,
    canonical_json,
    rat_pair,
    rat_from_pair,
)
from .dyadic import IV, precision_bits, round_down, round_up, sqrt_bounds

DEFAULT_SEPARATION_MARGIN = Fraction(1, 1 << 40)

# A cell is a tuple over factors of (addr, lo, hi); addr is None for a point
# factor.  The endpoints ride along so refinement never re-walks a tree.


class EmptyGeometry(CantorForgeError):
    pass


class DegeneratePair(CantorForgeError):
    def __init__(self, axis: int, message: str | None = None):
        self.axis = axis
        super().__init__(message or f"component pair not separated along axis {axis}")


class CertificateNotFound(CantorForgeError):
    def __init__(self, node_path: str, max_k: int, explanation: str):
        self.node_path = node_path
        self.max_k = max_k
        self.explanation = explanation
        super().__init__(
            f"no separated selection at node {node_path!r} within {max_k} descent steps: {explanation}"
        )


class AllCandidatesFailed(CantorForgeError):
    def __init__(self, failures: list[tuple[str, str]]):
        self.failures = failures
        detail = "; ".join(f"{name}: {why}" for name, why in failures)
        super().__init__(f"every rotation candidate failed ({detail})")


class InvalidCertificate(CantorForgeError):
    pass


# ---------------------------------------------------------------------------
# rotation matrices


def _as_iv(e) -> IV:
    if isinstance(e, IV):
        return e
    return IV.point(as_rat(e))


def _mat_mul(a, b):
    d = len(a)
    return [
        [sum((a[i][k] * b[k][j] for k in range(d)), IV.point(0)) for j in range(d)]
        for i in range(d)
    ]


class RotationMatrix:
    """Near-orthogonal matrix with interval entries and a verified defect.

    The defect is an exact upper bound on max |(O^T O - I)_{ij}| over all
    real matrices inside the entry intervals.  Candidates are only usable
    below the caller's orthogonality tolerance.
    """

    def __init__(self, name: str, rows):
        self.name = name
        self.rows = tuple(tuple(_as_iv(e) for e in row) for row in rows)
        d = len(self.rows)
        if any(len(row) != d for row in self.rows):
            raise ValueError("rotation matrix must be square")
        self.dim = d
        defect = Fraction(0)
        for i in range(d):
            for j in range(d):
                acc = IV.point(0)
                for k in range(d):
                    acc = acc + self.rows[k][i] * self.rows[k][j]
                if i == j:
                    acc = acc - IV.point(1)
                defect = max(defect, acc.abs().hi)
        self.defect = defect

    @staticmethod
    def identity(d: int) -> "RotationMatrix":
        rows = [[IV.point(1 if i == j else 0) for j in range(d)] for i in range(d)]
        return RotationMatrix("identity", rows)

    @staticmethod
    def axis_mixing(d: int, bits: int | None = None) -> "RotationMatrix":
        """Quarter-turn mix so no coordinate direction survives unmixed.

        For d = 2 this sends e1 to (-e1 + e2)/sqrt(2) and e2 to
        (e1 + e2)/sqrt(2); higher d chains the same turn through the
        coordinate planes (0,1), (1,2), ...
        """
        bits = precision_bits(bits)
        lo, hi = sqrt_bounds(Fraction(1, 2), bits + 16)
        s = IV(lo, hi)
        result = [[IV.point(1 if i == j else 0) for j in range(d)] for i in range(d)]
        for axis in range(d - 1):
            givens = [[IV.point(1 if i == j else 0) for j in range(d)] for i in range(d)]
            givens[axis][axis] = -s
            givens[axis][axis + 1] = s
            givens[axis + 1][axis] = s
            givens[axis + 1][axis + 1] = s
            result = _mat_mul(givens, result)
        return RotationMatrix("axis-mixing", result)

    @staticmethod
    def quasi_random(d: int, seed: int, bits: int | None = None) -> "RotationMatrix":
        """Seeded near-rotation from exact Gram-Schmidt.

        Projections are exact rational arithmetic, so distinct columns come
        out exactly orthogonal; only the normalization is approximate,
        leaving a diagonal defect around 2**-(bits+14).
        """
        import random

        bits = precision_bits(bits)
        rng = random.Random(seed)
        while True:
            cols = [
                [Fraction(rng.getrandbits(48) - (1 << 47), 1 << 47) for _ in range(d)]
                for _ in range(d)
            ]
            ortho: list[list[Fraction]] = []
            ok = True
            for v in cols:
                u = list(v)
                for w in ortho:
                    ww = sum(x * x for x in w)
                    vw = sum(x * y for x, y in zip(u, w))
                    coef = vw / ww
                    u = [x - coef * y for x, y in zip(u, w)]
                if all(x == 0 for x in u):
                    ok = False
                    break
                ortho.append(u)
            if ok:
                break
        rows: list[list[IV]] = [[IV.point(0)] * d for _ in range(d)]
        for j, u in enumerate(ortho):
            norm_sq = sum(x * x for x in u)
            lo, hi = sqrt_bounds(norm_sq, bits + 16)
            mid = (lo + hi) / 2
            for i in range(d):
                rows[i][j] = IV.point(u[i] / mid)
        return RotationMatrix(f"quasi-random-{seed}", rows)

    def to_json_obj(self):
        return {
            "name": self.name,
            "rows": [[[rat_pair(e.lo), rat_pair(e.hi)] for e in row] for row in self.rows],
            "defect": rat_pair(self.defect),
        }

    @staticmethod
    def from_json_obj(obj) -> "RotationMatrix":
        rows = [
            [IV(rat_from_pair(e[0]), rat_from_pair(e[1])) for e in row] for row in obj["rows"]
        ]
        return RotationMatrix(obj["name"], rows)


# ---------------------------------------------------------------------------
# geometry


class ProductGeometry:
    """Product of 1-D factors (gap trees or fixed points), optionally mapped.

    The map, when present, applies to the whole product vector; entries may
    be exact rationals or thin intervals (irrational rotations).
    """

    def __init__(self, factors, matrix: RotationMatrix | None = None, shift=None):
        factors = tuple(factors)
        if not factors:
            raise EmptyGeometry("a product geometry needs at least one factor")
        self.factors = tuple(f if isinstance(f, GapTree) else as_rat(f) for f in factors)
        self.dim = len(self.factors)
        if matrix is not None and matrix.dim != self.dim:
            raise ValueError("matrix dimension does not match the factor count")
        self.matrix = matrix
        if shift is None:
            shift = (Fraction(0),) * self.dim
        self.shift = tuple(_as_iv(s) for s in shift)
        # Unmapped products take integer fast paths in the cover build.
        self._plain = matrix is None and all(s.lo == 0 and s.hi == 0 for s in self.shift)

    def with_matrix(self, matrix: RotationMatrix) -> "ProductGeometry":
        if self.matrix is not None:
            composed = RotationMatrix(
                f"{matrix.name}*{self.matrix.name}", _mat_mul(matrix.rows, self.matrix.rows)
            )
        else:
            composed = matrix
        return ProductGeometry(self.factors, composed, self.shift)

    def top_cell(self) -> tuple:
        parts = []
        for f in self.factors:
            if isinstance(f, GapTree):
                parts.append(("", f.hull.lo, f.hull.hi))
            else:
                parts.append((None, f, f))
        return tuple(parts)

    def cell_image_box(self, cell) -> tuple[IV, ...]:
        """Exact interval box of the cell's image, before any rounding."""
        if self.matrix is None:
            return tuple(
                IV(lo, hi) + self.shift[i] for i, (_, lo, hi) in enumerate(cell)
            )
        out = []
        for i in range(self.dim):
            acc = self.shift[i]
            row = self.matrix.rows[i]
            for j, (_, lo, hi) in enumerate(cell):
                acc = acc + row[j] * IV(lo, hi)
            out.append(acc)
        return tuple(out)

    def exact_hull_box(self) -> tuple[IV, ...]:
        return self.cell_image_box(self.top_cell())

    def refine_cells(self, cells, target: Fraction) -> list[tuple]:
        """Split cells until every tree factor's interval is <= target wide.

        A factor whose tree runs out of depth stays at its leaf interval;
        the cover just stays coarser there, which is sound.
        """
        for j, f in enumerate(self.factors):
            if not isinstance(f, GapTree):
                continue
            split = f.split_interval
            depth = f.depth
            # Symmetric trees have one interval width per level, so the
            # stopping depth is a function of the target alone and the
            # per-cell width checks can be skipped.
            uniform_stop = None
            if isinstance(f, SymmetricGapTree):
                uniform_stop = depth
                for lvl, width in enumerate(f.level_lengths):
                    if width <= target:
                        uniform_stop = lvl
                        break
            done = []
            for cell in cells:
                part = cell[j]
                if uniform_stop is not None:
                    parts = [part]
                    for _ in range(uniform_stop - len(part[0])):
                        parts = [half for p in parts for half in split(*p)]
                else:
                    stack = [part]
                    parts = []
                    while stack:
                        part = stack.pop()
                        addr, lo, hi = part
                        if hi - lo <= target or len(addr) >= depth:
                            parts.append(part)
                        else:
                            left, right = split(addr, lo, hi)
                            stack.append(right)
                            stack.append(left)
                for part in parts:
                    item = list(cell)
                    item[j] = part
                    done.append(tuple(item))
            cells = done
        return cells


# ---------------------------------------------------------------------------
# cube covers and components

class Component:
    """One connected component of the cube cover at level ``m``.

    Keeps the source cells it came from (ratio bounds need them), the
    outward bounding box, and the cube index ranges for export.  Children
    are the components of the refined cover one step deeper, computed on
    first use and cached.
    """

    __slots__ = ("rep", "level", "cells", "rects", "bbox", "path", "_children")

    def __init__(self, rep, level, cells, rects, bbox, path):
        self.rep = rep
        self.level = level
        self.cells = cells
        self.rects = rects
        self.bbox = bbox
        self.path = path
        self._children = None

    def diam_sq(self) -> Fraction:
        return sum((iv.hi - iv.lo) ** 2 for iv in self.bbox)

    def children(self) -> list["Component"]:
        if self._children is None:
            if not self.cells:
                raise EmptyGeometry(f"component {self.path} was stripped and cannot expand")
            level = self.level + self.rep.refine_step
            if level > self.rep.max_level:
                self._children = []
            else:
                self._children = self.rep._cover_components(self.cells, level, self.path)
                if self._children and max(c.diam_sq() for c in self._children) >= self.diam_sq():
                    self.rep.not_shrinking.append(self.path)
        return self._children

    def descendants(self, k: int) -> list["Component"]:
        comps = [self]
        for _ in range(k):
            comps = [child for c in comps for child in c.children()]
        return comps

    def strip(self):
        """Drop cell-level data to keep deep certificate searches small.

        The bounding box and path survive, which is all that separation
        sequences and chains need."""
        self.cells = ()
        self.rects = ()

    def cube_coords(self) -> list[tuple[int, ...]]:
        seen = set()
        for rect in self.rects:
            for coords in itertools.product(*(range(lo, hi + 1) for lo, hi in rect)):
                seen.add(coords)
        return sorted(seen)

    def to_json_obj(self, with_cubes: bool = True) -> dict:
        if not self.cells:
            raise InvalidCertificate("component was stripped; rebuild with keep_cells=True to export")
        obj = {
            "level": self.level,
            "bbox": [[rat_pair(iv.lo), rat_pair(iv.hi)] for iv in self.bbox],
            "source_cells": [
                [[rat_pair(lo), rat_pair(hi)] for (_, lo, hi) in cell] for cell in self.cells
            ],
        }
        if with_cubes:
            obj["cubes"] = [self.level, [list(c) for c in self.cube_coords()]]
        return obj


class NestedRep:
    """Lazily expanded tree of cube-cover components.

    ``root_components`` are the components at level ``m0``; each component
    hands out its own children at ``m0 + refine_step`` and so on down to
    ``max_level``.  Nodes that fail to shrink are recorded on
    ``not_shrinking`` as they are discovered, never raised.
    """

    def __init__(self, geometry: ProductGeometry, m0: int, max_level: int, refine_step: int, bits: int):
        self.geometry = geometry
        self.m0 = m0
        self.max_level = max_level
        self.refine_step = refine_step
        self.bits = bits
        self.not_shrinking: list[str] = []
        self.exact_hull = geometry.exact_hull_box()
        self.root_components = self._cover_components([geometry.top_cell()], m0, "r")

    @property
    def dim(self) -> int:
        return self.geometry.dim

    def _cover_components(self, cells, m: int, parent_path: str) -> list["Component"]:
        target = Fraction(1, 1 << m)
        refined = self.geometry.refine_cells(list(cells), target)
        if not refined:
            raise EmptyGeometry("no cells to cover")
        scale = 1 << m
        d = self.geometry.dim
        boxes = []
        rects = []
        plain = self.geometry._plain
        for cell in refined:
            if plain:
                box = tuple((part[1], part[2]) for part in cell)
            else:
                box = tuple((v.lo, v.hi) for v in self.geometry.cell_image_box(cell))
            boxes.append(box)
            rect = []
            for lo, hi in box:
                dn, dd = lo.numerator, lo.denominator
                un, ud = hi.numerator, hi.denominator
                # ceil(lo*scale - 1) and floor(hi*scale) in plain ints
                rect.append((-((dd - dn * scale) // dd), (un * scale) // ud))
            rects.append(tuple(rect))

        # Union-find over cells.  Each cell's cubes form one block, and two
        # blocks touch (corners included) exactly when their cube index
        # ranges come within one cube of each other on every axis, so cube
        # enumeration is never needed.  A sweep along axis 0 keeps the pair
        # scan short.
        n = len(rects)
        parent = list(range(n))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        def union(i: int, j: int):
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[rj] = ri

        order = sorted(range(n), key=lambda i: rects[i][0][0])
        for pos, i in enumerate(order):
            ri = rects[i]
            reach = ri[0][1] + 1
            for j in order[pos + 1:]:
                rj = rects[j]
                if rj[0][0] > reach:
                    break
                if all(
                    rj[axis][0] <= ri[axis][1] + 1 and ri[axis][0] <= rj[axis][1] + 1
                    for axis in range(1, d)
                ):
                    union(i, j)

        groups: dict[int, list[int]] = {}
        for i in range(n):
            groups.setdefault(find(i), []).append(i)
        comps = []
        for members in groups.values():
            bbox = []
            for axis in range(d):
                lo = min(boxes[i][axis][0] for i in members)
                hi = max(boxes[i][axis][1] for i in members)
                if plain:
                    # Cell endpoints already have small denominators; the
                    # dyadic snap only matters once a map has mixed them.
                    bbox.append(Interval(lo, hi))
                else:
                    bbox.append(Interval(round_down(lo, self.bits), round_up(hi, self.bits)))
            comps.append(
                (
                    tuple(min(rects[i][axis][0] for i in members) for axis in range(d)),
                    tuple(refined[i] for i in members),
                    tuple(sorted({rects[i] for i in members})),
                    tuple(bbox),
                )
            )
        comps.sort(key=lambda item: item[0])
        return [
            Component(self, m, cells_, rects_, bbox_, f"{parent_path}.{idx}")
            for idx, (_, cells_, rects_, bbox_) in enumerate(comps)
        ]


def build_nested_rep(
    geometry: ProductGeometry,
    m0: int,
    max_level: int,
    refine_step: int = 2,
    bits: int | None = None,
) -> NestedRep:
    """Cover the geometry at dyadic levels m0, m0+step, ... up to max_level."""
    if m0 < 0:
        raise ValueError("m0 must be non-negative")
    if max_level <= m0:
        raise ValueError("max_level must exceed m0")
    if refine_step < 1:
        raise ValueError("refine_step must be at least 1")
    return NestedRep(geometry, m0, max_level, refine_step, precision_bits(bits))


def components_at(rep: NestedRep, level_index: int) -> list[Component]:
    """Components at the level_index-th cover level (0 = the m0 cover)."""
    comps = rep.root_components
    for _ in range(level_index):
        comps = [child for c in comps for child in c.children()]
    return comps


# ---------------------------------------------------------------------------
# separations and ratios


def d_min(a, b) -> Fraction:
    """Certified axis-wise separation lower bound for two components.

    Per axis this is the gap between the bounding-box projections (zero if
    they overlap or touch); the result is the minimum over axes.  Boxes are
    outward, so the true sets are at least this far apart on every axis.
    """
    box_a = a.bbox if isinstance(a, Component) else a
    box_b = b.bbox if isinstance(b, Component) else b
    best = None
    for ia, ib in zip(box_a, box_b):
        gap = max(ib.lo - ia.hi, ia.lo - ib.hi, Fraction(0))
        best = gap if best is None else min(best, gap)
    return best


def _corner_ratio_scan(diff_ivs, matrix_rows, d):
    """Min/max |delta_i|/|delta_j| over corners of a difference box.

    diff_ivs are per-factor difference intervals; matrix_rows (or None)
    maps source differences to ambient ones.  Raises DegeneratePair when a
    denominator's sign cannot be pinned.
    """
    lo_best = None
    hi_best = None
    corners = itertools.product(*((v.lo, v.hi) if v.lo != v.hi else (v.lo,) for v in diff_ivs))
    for corner in corners:
        if matrix_rows is None:
            mags = [(abs(x), abs(x)) for x in corner]
        else:
            mags = []
            for i in range(d):
                acc = IV.point(0)
                for j in range(d):
                    acc = acc + matrix_rows[i][j].scaled(corner[j])
                a = acc.abs()
                mags.append((a.lo, a.hi))
        for i in range(d):
            for j in range(d):
                if i == j:
                    continue
                if mags[j][0] <= 0:
                    raise DegeneratePair(j)
                lo = mags[i][0] / mags[j][1]
                hi = mags[i][1] / mags[j][0]
                lo_best = lo if lo_best is None else min(lo_best, lo)
                hi_best = hi if hi_best is None else max(hi_best, hi)
    return lo_best, hi_best


def kappa_ratios(a: Component, b: Component) -> tuple[Fraction, Fraction]:
    """Certified enclosure of the extreme coordinate ratios between two
    components: (lower bound of the min ratio, upper bound of the max).

    Works cell pair by cell pair.  Both coordinates of a difference vector
    are affine along each edge of the joint cell box, so their ratio is
    monotone edge by edge once signs are pinned, and corner evaluation is
    exhaustive.  An axis whose sign cannot be pinned makes the pair
    degenerate.
    """
    sep = d_min(a, b)
    if sep <= 0:
        for axis, (ia, ib) in enumerate(zip(a.bbox, b.bbox)):
            if max(ib.lo - ia.hi, ia.lo - ib.hi, Fraction(0)) <= 0:
                raise DegeneratePair(axis, f"components overlap along axis {axis}")
    geometry = a.rep.geometry
    matrix_rows = geometry.matrix.rows if geometry.matrix is not None else None
    d = geometry.dim
    lo_best = None
    hi_best = None
    for cell_a in a.cells:
        for cell_b in b.cells:
            diff = [
                IV(la - hb, ha - lb)
                for (_, la, ha), (_, lb, hb) in zip(cell_a, cell_b)
            ]
            lo, hi = _corner_ratio_scan(diff, matrix_rows, d)
            lo_best = lo if lo_best is None else min(lo_best, lo)
            hi_best = hi if hi_best is None else max(hi_best, hi)
    return lo_best, hi_best


# ---------------------------------------------------------------------------
# certificates


@dataclass
class CertNode:
    """Selection of dim+1 separated components below one parent node."""

    k_used: int
    components: tuple[Component, ...]
    dmins: dict
    ratios: dict | None
    children: tuple["CertNode", ...]

    def min_dmin(self) -> Fraction:
        return min(self.dmins.values())

    def to_json_obj(self, with_cubes: bool = True) -> dict:
        return {
            "k": self.k_used,
            "components": [c.to_json_obj(with_cubes) for c in self.components],
            "dmin": {f"{i},{j}": rat_pair(v) for (i, j), v in sorted(self.dmins.items())},
            "ratios": None
            if self.ratios is None
            else {
                f"{i},{j}": [rat_pair(lo), rat_pair(hi)]
                for (i, j), (lo, hi) in sorted(self.ratios.items())
            },
            "children": [child.to_json_obj(with_cubes) for child in self.children],
        }


@dataclass
class UndCertificate:
    """Arity-(dim+1) tree of separated selections, ``depth`` levels deep.

    Existence shows the covered set is spread out in every direction at
    every certified scale.  It says nothing beyond the certified depth and
    is not a non-degeneracy proof for the limit set.
    """

    dimension: int
    kappa: Fraction | None
    depth: int
    margin: Fraction
    bits: int
    root: CertNode
    matrix: RotationMatrix | None

    def nodes_at_level(self, k: int) -> list[CertNode]:
        nodes = [self.root]
        for _ in range(k - 1):
            nodes = [child for node in nodes for child in node.children]
        return nodes

    def all_ratio_bounds(self) -> list[tuple[Fraction, Fraction]]:
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.ratios:
                out.extend(node.ratios.values())
            stack.extend(node.children)
        return out

    def to_json_obj(self, with_cubes: bool = True) -> dict:
        return {
            "kind": "und-certificate",
            "dimension": self.dimension,
            "kappa": rat_pair(self.kappa) if self.kappa is not None else None,
            "depth": self.depth,
            "margin": rat_pair(self.margin),
            "bits": self.bits,
            "matrix": self.matrix.to_json_obj() if self.matrix is not None else None,
            "root": self.root.to_json_obj(with_cubes),
        }

    def to_json(self) -> str:
        return canonical_json(self.to_json_obj())


def _confinement_explanation(dim: int, comps: list[Component], margin: Fraction) -> str:
    if len(comps) < dim + 1:
        return f"only {len(comps)} component(s) available"
    for axis in range(dim):
        # Max pairwise separation on this axis is max(lo) - min(hi) over
        # distinct components; track the two extremes of each to avoid the
        # quadratic pair scan.
        los = sorted(range(len(comps)), key=lambda i: comps[i].bbox[axis].lo, reverse=True)[:2]
        his = sorted(range(len(comps)), key=lambda i: comps[i].bbox[axis].hi)[:2]
        best = None
        for i in los:
            for j in his:
                if i != j:
                    sep = comps[i].bbox[axis].lo - comps[j].bbox[axis].hi
                    best = sep if best is None else max(best, sep)
        if best is not None and best < margin:
            return (
                f"components appear confined near a hyperplane orthogonal to axis {axis} "
                f"(no axis-{axis} separation above {margin})"
            )
    return "no separated selection among the available components"


def _find_selection(comps, need: int, margin: Fraction, kappa: Fraction | None):
    """First clique (in deterministic order) of ``need`` pairwise-separated
    components, honoring the ratio cap when one is demanded."""
    n = len(comps)
    pair_cache: dict[tuple[int, int], tuple | None] = {}

    def pair_data(i: int, j: int):
        key = (i, j)
        if key not in pair_cache:
            sep = d_min(comps[i], comps[j])
            if sep < margin:
                pair_cache[key] = None
            elif kappa is None:
                pair_cache[key] = (sep, None)
            else:
                try:
                    lo, hi = kappa_ratios(comps[i], comps[j])
                except DegeneratePair:
                    pair_cache[key] = None
                    return None
                pair_cache[key] = (sep, (lo, hi)) if hi <= kappa else None
        return pair_cache[key]

    # Depth-first clique growth with ascending indices finds the same
    # lexicographically-first clique a combinations scan would, but prunes
    # as soon as a pair fails; with no valid pairs at all (the degenerate
    # geometries) the cost stays quadratic instead of C(n, need).
    stack: list[int] = []

    def extend(start: int):
        if len(stack) == need:
            return tuple(stack)
        for cand in range(start, n):
            if all(pair_data(i, cand) is not None for i in stack):
                stack.append(cand)
                found = extend(cand + 1)
                if found:
                    return found
                stack.pop()
        return None

    combo = extend(0)
    if combo is None:
        return None
    remap = {orig: pos for pos, orig in enumerate(combo)}
    dmins = {}
    ratios = {} if kappa is not None else None
    for i, j in itertools.combinations(combo, 2):
        sep, rat = pair_data(i, j)
        dmins[(remap[i], remap[j])] = sep
        if rat is not None:
            ratios[(remap[i], remap[j])] = rat
    return tuple(comps[i] for i in combo), dmins, ratios


def und_certificate(
    rep: NestedRep,
    kappa=None,
    max_k: int = 2,
    depth: int = 1,
    margin=DEFAULT_SEPARATION_MARGIN,
    keep_cells: bool = True,
) -> UndCertificate:
    """Search for a nested separated selection of arity dim+1.

    At each node the search looks among descendants 1, 2, ..., max_k
    refinement steps down for dim+1 components pairwise separated by at
    least ``margin`` on every axis (kappa-comparable too when ``kappa`` is
    given), then recurses into each selected component.  ``keep_cells=False``
    releases cell-level data as the search retreats, which keeps deep
    certificates in tens of megabytes instead of gigabytes; stripped
    certificates still chain and report separations but cannot be exported
    with their cells.
    """
    if depth < 1:
        raise ValueError("certificate depth must be at least 1")
    kappa = as_rat(kappa) if kappa is not None else None
    margin = as_rat(margin)
    if margin <= 0:
        raise ValueError("separation margin must be positive")
    dim = rep.dim
    need = dim + 1

    def descend(candidates_of, path: str, remaining: int) -> CertNode:
        probe_comps: list[Component] = []
        for k in range(1, max_k + 1):
            comps = candidates_of(k)
            # Remember the deepest probe with enough components: if the
            # search fails, that level gives the most informative diagnosis
            # (confinement patterns only show once the cover has split).
            if not probe_comps or len(comps) >= need:
                probe_comps = comps
            if len(comps) < need:
                continue
            found = _find_selection(comps, need, margin, kappa)
            if found is not None:
                selected, dmins, ratios = found
                if remaining > 1:
                    children = tuple(
                        descend(comp.descendants, comp.path, remaining - 1) for comp in selected
                    )
                else:
                    children = ()
                if not keep_cells:
                    for comp in candidates_of(1):
                        _strip_subtree(comp)
                return CertNode(k, selected, dmins, ratios, children)
        raise CertificateNotFound(path, max_k, _confinement_explanation(dim, probe_comps, margin))

    def root_candidates(k: int) -> list[Component]:
        comps = rep.root_components
        for _ in range(k - 1):
            comps = [child for c in comps for child in c.children()]
        return comps

    root = descend(root_candidates, "r", depth)
    if not keep_cells:
        for comp in rep.root_components:
            _strip_subtree(comp)
    return UndCertificate(dim, kappa, depth, margin, rep.bits, root, rep.geometry.matrix)


def _strip_subtree(comp: Component):
    if not comp.cells:
        return  # stripping runs bottom-up, so this subtree is already done
    comp.strip()
    if comp._children:
        for child in comp._children:
            _strip_subtree(child)


def dk_sequence(cert: UndCertificate) -> tuple[Fraction, ...]:
    """Per-level separation floors d_k = min over level-k nodes of the
    minimum pairwise separation in that node's selection."""
    out = []
    for k in range(1, cert.depth + 1):
        nodes = cert.nodes_at_level(k)
        value = min(node.min_dmin() for node in nodes)
        if value <= 0:
            raise InvalidCertificate(f"certificate has a non-positive separation at level {k}")
        out.append(value)
    return tuple(out)


# ---------------------------------------------------------------------------
# independent re-check of an exported certificate


def verify_certificate(obj: dict) -> tuple[bool, list[str]]:
    """Re-check an exported certificate from its own data alone.

    Bounding boxes are recomputed from the embedded source cells (through
    the embedded matrix when one is present), separations from those, and
    every claimed ratio interval is re-derived by a direct corner scan.
    No geometry objects from this package are rebuilt, so agreement is a
    genuine second opinion on the arithmetic.
    """
    problems: list[str] = []
    if obj.get("kind") != "und-certificate":
        return False, ["not a certificate object"]
    dim = int(obj["dimension"])
    margin = rat_from_pair(obj["margin"])
    kappa = rat_from_pair(obj["kappa"]) if obj["kappa"] is not None else None
    rows = None
    if obj.get("matrix") is not None:
        rows = [
            [IV(rat_from_pair(e[0]), rat_from_pair(e[1])) for e in row]
            for row in obj["matrix"]["rows"]
        ]

    def image_hull(cells):
        per_axis = None
        for cell in cells:
            if rows is None:
                box = [IV(rat_from_pair(v[0]), rat_from_pair(v[1])) for v in cell]
            else:
                box = []
                for i in range(dim):
                    acc = IV.point(0)
                    for j in range(dim):
                        lo, hi = rat_from_pair(cell[j][0]), rat_from_pair(cell[j][1])
                        acc = acc + rows[i][j] * IV(lo, hi)
                    box.append(acc)
            if per_axis is None:
                per_axis = box
            else:
                per_axis = [IV(min(a.lo, b.lo), max(a.hi, b.hi)) for a, b in zip(per_axis, box)]
        return per_axis

    def check_node(node, path, parent_box):
        comps = node["components"]
        if len(comps) != dim + 1:
            problems.append(f"{path}: expected {dim + 1} components, found {len(comps)}")
            return
        hulls = []
        for idx, comp in enumerate(comps):
            hull = image_hull(comp["source_cells"])
            hulls.append(hull)
            claimed = [(rat_from_pair(v[0]), rat_from_pair(v[1])) for v in comp["bbox"]]
            for axis in range(dim):
                if claimed[axis][0] > hull[axis].lo or claimed[axis][1] < hull[axis].hi:
                    problems.append(
                        f"{path}.c{idx}: claimed bbox does not enclose its cells on axis {axis}"
                    )
            if parent_box is not None:
                for axis in range(dim):
                    if hull[axis].lo < parent_box[axis].lo or hull[axis].hi > parent_box[axis].hi:
                        problems.append(
                            f"{path}.c{idx}: not nested inside its parent on axis {axis}"
                        )
        for key, pair in node["dmin"].items():
            i, j = (int(x) for x in key.split(","))
            claimed = rat_from_pair(pair)
            actual = None
            for axis in range(dim):
                gap = max(
                    hulls[j][axis].lo - hulls[i][axis].hi,
                    hulls[i][axis].lo - hulls[j][axis].hi,
                    Fraction(0),
                )
                actual = gap if actual is None else min(actual, gap)
            if claimed > actual:
                problems.append(f"{path}: claimed separation {key} exceeds recomputed value")
            if claimed < margin:
                problems.append(f"{path}: separation {key} below margin")
        if kappa is not None:
            if not node.get("ratios"):
                problems.append(f"{path}: kappa given but no ratio bounds recorded")
            else:
                for key, (lo_pair, hi_pair) in node["ratios"].items():
                    i, j = (int(x) for x in key.split(","))
                    lo_claim = rat_from_pair(lo_pair)
                    hi_claim = rat_from_pair(hi_pair)
                    if hi_claim > kappa:
                        problems.append(f"{path}: ratio bound {key} exceeds kappa")
                    try:
                        lo_new, hi_new = _reverify_ratios(
                            comps[i]["source_cells"], comps[j]["source_cells"], rows, dim
                        )
                    except DegeneratePair:
                        problems.append(f"{path}: ratio pair {key} degenerate on re-evaluation")
                        continue
                    if lo_claim > lo_new or hi_claim < hi_new:
                        problems.append(f"{path}: ratio claim {key} fails corner re-evaluation")
        for idx, child in enumerate(node.get("children", ())):
            check_node(child, f"{path}.{idx}", hulls[idx])

    check_node(obj["root"], "root", None)
    return (not problems), problems


def _reverify_ratios(cells_a, cells_b, rows, dim):
    lo_best = None
    hi_best = None
    for cell_a in cells_a:
        for cell_b in cells_b:
            diff = []
            for axis in range(dim):
                a_lo, a_hi = (rat_from_pair(p) for p in cell_a[axis])
                b_lo, b_hi = (rat_from_pair(p) for p in cell_b[axis])
                diff.append(IV(a_lo - b_hi, a_hi - b_lo))
            lo, hi = _corner_ratio_scan(diff, rows, dim)
            lo_best = lo if lo_best is None else min(lo_best, lo)
            hi_best = hi if hi_best is None else max(hi_best, hi)
    return lo_best, hi_best


# ---------------------------------------------------------------------------
# rotations as a repair step


@dataclass
class RotationResult:
    index: int
    matrix: RotationMatrix
    certificate: UndCertificate
    rep: NestedRep
    failures: list[tuple[str, str]]


def default_candidates(d: int, seed: int = 0, count: int = 3, bits: int | None = None):
    cands = [RotationMatrix.identity(d), RotationMatrix.axis_mixing(d, bits)]
    for i in range(count):
        cands.append(RotationMatrix.quasi_random(d, seed + i, bits))
    return cands


def rotation_search(
    geometry: ProductGeometry,
    candidates=None,
    kappa=None,
    max_k: int = 2,
    depth: int = 1,
    *,
    m0: int,
    max_level: int,
    refine_step: int = 2,
    bits: int | None = None,
    margin=DEFAULT_SEPARATION_MARGIN,
    ortho_tol=DEFAULT_SEPARATION_MARGIN,
    seed: int = 0,
) -> RotationResult:
    """Try rotation candidates in order until one admits a certificate.

    Candidates whose verified orthogonality defect exceeds ``ortho_tol``
    are rejected without being tried.  First success wins; if none works
    the per-candidate failure reasons travel with the exception.
    """
    if candidates is None:
        candidates = default_candidates(geometry.dim, seed=seed, bits=bits)
    failures: list[tuple[str, str]] = []
    for index, cand in enumerate(candidates):
        if cand.defect > ortho_tol:
            failures.append(
                (cand.name, f"orthogonality defect {float(cand.defect):.3e} above tolerance")
            )
            continue
        rotated = geometry.with_matrix(cand)
        try:
            rep = build_nested_rep(rotated, m0, max_level, refine_step, bits)
            cert = und_certificate(rep, kappa, max_k, depth, margin)
        except (CertificateNotFound, DegeneratePair, EmptyGeometry) as exc:
            failures.append((cand.name, str(exc)))
            continue
        return RotationResult(index, cand, cert, rep, failures)
    raise AllCandidatesFailed(failures)


# ---------------------------------------------------------------------------
# separations after a nearly-rigid map


def image_separations(cert: UndCertificate, rows, shift) -> tuple[Fraction, ...]:
    """Per-level separation floors after applying an affine map to the
    certified geometry.  Boxes are recomputed exactly from the source cells
    through the map, so the result is again a certified lower bound."""
    rows = tuple(tuple(_as_iv(e) for e in row) for row in rows)
    shift = tuple(_as_iv(s) for s in shift)
    d = cert.dimension

    def image_bbox(comp: Component):
        if not comp.cells:
            raise InvalidCertificate("certificate was stripped; rebuild with keep_cells=True")
        geometry = comp.rep.geometry
        per_axis = None
        for cell in comp.cells:
            src = geometry.cell_image_box(cell)
            box = []
            for i in range(d):
                acc = shift[i]
                for j in range(d):
                    acc = acc + rows[i][j] * src[j]
                box.append(acc)
            if per_axis is None:
                per_axis = box
            else:
                per_axis = [IV(min(a.lo, b.lo), max(a.hi, b.hi)) for a, b in zip(per_axis, box)]
        return tuple(Interval(v.lo, v.hi) for v in per_axis)

    out = []
    for k in range(1, cert.depth + 1):
        level_min = None
        for node in cert.nodes_at_level(k):
            boxes = [image_bbox(c) for c in node.components]
            for a, b in itertools.combinations(boxes, 2):
                sep = d_min(a, b)
                level_min = sep if level_min is None else min(level_min, sep)
        out.append(level_min)
    return tuple(out)
