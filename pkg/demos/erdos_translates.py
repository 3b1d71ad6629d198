"""Every map in a near-identity affine family must hit the sparse set.

Take the self-similar set with ratio 1/10 on [0, 1].  Its certified
difference interior tiles the line by integer translates, so any affine
image of the set that lands in the window meets the original, provided
the scaling stays within the certified slack.  We check a family of 100
maps and report, for each, the translate index and a witness pair.
A map scaled beyond the slack is refused up front rather than half
checked.
"""

from fractions import Fraction

from cantorforge import FamilyOutOfSlack, Interval, build_binary_ifs, erdos_obstruction

k = build_binary_ifs(Interval(Fraction(0), Fraction(1)), Fraction(1, 10), 12)

family = [(Fraction(99, 100) + i * Fraction(1, 5000), i * Fraction(1, 20)) for i in range(100)]
window = Interval(Fraction(-1), Fraction(6))

report = erdos_obstruction(k, family, window, 12)
print(f"window [{report.window.lo}, {report.window.hi}], spacing {report.spacing}")
print(f"certified interval [{report.certified.lo}, {report.certified.hi}] "
      f"(length equals spacing: {report.certified.length == report.spacing})")
print(f"translate indices used: {report.k_range[0]} .. {report.k_range[1]}")
hits = sum(1 for r in report.records if r.ok)
print(f"{hits}/{len(report.records)} maps intersect the set, all_ok={report.all_ok}")

r = report.records[73]
print(f"example: lambda={r.lam} t={r.t} -> translate {r.translate_index}, "
      f"|map point - set point| <= {float(r.bound):.2e}")

try:
    erdos_obstruction(k, family + [(Fraction(5, 2), Fraction(0))], window, 12)
except FamilyOutOfSlack as err:
    print(f"family with lambda=5/2 rejected: slack is {err.slack}, "
          f"offenders {[(str(l), str(t)) for l, t in err.offenders]}")
