#!/usr/bin/env python3
# Vector-valued metrics on the real line, their axioms, and sequence verdicts.
#
# Both builtin metrics send a pair of reals to a cone element:
#   product:  d(x, y) = (|x - y|, alpha |x - y|)        in R^2
#   exp:      d(x, y) = |x - y| (e^t_1, ..., e^t_m)     on a [0,1] grid
# Convergence and Cauchy checks go through norms of these vectors, which is
# exactly what a normal cone licenses.

from conefix import (
    check_metric_axioms,
    diagnose_sequence,
    distance,
    exp_space,
    product_space,
    scalar_distance,
)

plane = product_space(alpha=2.0)
print("product distance d(1, 3)     =", distance(plane, 1.0, 3.0).coords)
print("scalar form ||d(1, 3)||      =", scalar_distance(plane, 1.0, 3.0))

curve = exp_space(grid_m=5)
print("exp-weighted d(0, 1) on 5 pts =", tuple(round(v, 6) for v in distance(curve, 0.0, 1.0).coords))
print("sup norm of that vector       =", scalar_distance(curve, 0.0, 1.0), "(= e)")

# The axiom checker samples triples; fault-injected variants prove it bites.
print()
print("metric axioms on 10000 sampled triples")
for label, space in [("product", plane), ("exp", curve)]:
    print(f"  {label}: all passed =", check_metric_axioms(space, 10_000, seed=0).all_passed)
shift = check_metric_axioms(plane.with_fault("shift"), 1000, seed=0)
print("  shift fault   -> d1 passed =", shift.d1.passed, "witness x:", shift.d1.witness["x"])
asym = check_metric_axioms(plane.with_fault("asymmetric"), 1000, seed=0)
print("  asymmetric    -> d2 passed =", asym.d2.passed)

# Sequence diagnostics: evidence from finitely many terms, never proofs.
print()
print("sequence verdicts (window 10)")
d1 = diagnose_sequence(plane, lambda n: 1.0 / (n + 1), limit=0.0, epsilon=1e-2, max_n=2000)
print("  x_n = 1/n, candidate limit 0:", d1.verdict)
d2 = diagnose_sequence(plane, lambda n: float(n), epsilon=1e-2, max_n=200)
print("  x_n = n:                     ", d2.verdict)
d3 = diagnose_sequence(plane, lambda n: (-1.0) ** n, epsilon=0.1, max_n=200)
print("  x_n = (-1)^n:                ", d3.verdict,
      "(consecutive gaps constant at", round(d3.tail_norms[0], 6), ")")
