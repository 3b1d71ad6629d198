"""Walk the basic one-dimensional pipeline end to end.

Build the middle-thirds set to depth 20, derive its fat companion, verify
gap dominance level by level, then descend a nested interval chain that
pins a point of the set next to a point of the companion.
"""

import time
from fractions import Fraction

from cantorforge import (
    build_companion,
    certify_difference_interior,
    check_dominance,
    find_chain,
    middle_thirds,
)

DEPTH = 20


def main():
    t0 = time.monotonic()
    k = middle_thirds(DEPTH)
    kt = build_companion(k, DEPTH, Fraction(1, 10), Fraction(1, 2))
    print(f"set hull       [{k.hull.lo}, {k.hull.hi}]")
    print(f"companion hull [{kt.hull.lo}, {kt.hull.hi}]")

    report = check_dominance(k, kt, DEPTH)
    worst = min(rec.min_gap_k / rec.max_gap_kt for rec in report.levels)
    print(f"dominance      {'ok' if report.overall else 'FAILED'} "
          f"(tightest gap ratio {worst} = {float(worst):.3f})")

    chain = find_chain(k, kt, DEPTH)
    print(f"chain depth    {len(chain.pairs)}")
    print(f"chain bound    {chain.bound} ~ {float(chain.bound):.3e}")
    print(f"witness pair   {float(chain.witness_k):.12f} vs {float(chain.witness_kt):.12f}")

    box = certify_difference_interior(k, kt, DEPTH)
    print(f"interior box   [{box.lo}, {box.hi}] certified around 0")
    print(f"elapsed        {time.monotonic() - t0:.3f}s")


if __name__ == "__main__":
    main()
