"""Show a whole interval of distances realized from a pinned point.

For the planar Cantor square and the squared-norm relation, every c in
the certified range admits points x, y of the square (one pinned to a
companion translate) with x^2 + y^2 = c up to the stated tolerance.
The slice solver resolves the witness y for each grid c, and the
derivative floor eta certifies the relation is monotone enough to trust
the bisection everywhere in between.

Pass a depth on the command line to rebuild at another scale
(default 12, matching the packaged scenario).
"""

import sys

from cantorforge import pinned_distance_demo

depth = int(sys.argv[1]) if len(sys.argv) > 1 else 12

report = pinned_distance_demo(alpha=2, dimension=2, depth=depth, grid=101)

print(f"alpha = {report.alpha}, dimension = {report.dimension}, depth = {report.depth}")
print(f"derivative floor eta = {report.eta} ~ {float(report.eta):.4f}")
print(f"companion hull per axis: "
      f"[{float(report.companion_hull.lo):.6f}, {float(report.companion_hull.hi):.6f}]")
if report.coverage is not None:
    print(f"distance values covered: "
          f"[{float(report.coverage.lo):.4f}, {float(report.coverage.hi):.4f}]")

pts = report.interior.points
worst = max(p.residual for p in pts if p.residual is not None)
print(f"{len(pts)} grid values of c, all_ok={report.interior.all_ok}, "
      f"worst residual {float(worst):.3e}")

mid = pts[len(pts) // 2]
print(f"sample witness at c={float(mid.c):.4f}: "
      f"x={float(mid.witness_x):.9f}, y={float(mid.witness_y):.9f}, "
      f"x^2+y^2-c ~ {float(mid.witness_x**2 + mid.witness_y**2 - mid.c):.2e}")
