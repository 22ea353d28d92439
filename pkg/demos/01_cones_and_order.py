#!/usr/bin/env python3
# Ordered vectors, cones, and how badly a norm can disorder the order.
#
# Elements live in R^n or on a uniform grid over [0, 1]. A cone of
# componentwise-nonnegative vectors induces the partial order
# x <= y  iff  y - x is a member. The normal constant K is the price of
# passing from order to norms: 0 <= x <= y guarantees ||x|| <= K ||y||.

import numpy as np

from conefix import (
    CandidateSet,
    SpaceElement,
    estimate_normal_constant,
    in_cone,
    leq,
    nonneg_grid,
    norm,
    orthant,
    strictly_less,
    verify_cone_axioms,
)

plane = orthant(2)  # nonnegative quadrant of R^2, euclidean norm

a = SpaceElement.finite([1.0, 2.0])
b = SpaceElement.finite([2.0, 3.0])
print("membership:", in_cone(SpaceElement.finite([0.0, 0.0]), plane),
      in_cone(SpaceElement.finite([1.0, -1.0]), plane))
print("order:      (1,2) <= (2,3):", leq(a, b, plane), "   (2,3) <= (1,2):", leq(b, a, plane))
print("interior:   (0,0) << (1,1):",
      strictly_less(SpaceElement.finite([0, 0]), SpaceElement.finite([1, 1]), plane))

# Grid layout: a sampled exponential is a member of the nonnegative-grid cone.
grid_cone = nonneg_grid(33)
phi = SpaceElement.grid(np.exp(np.linspace(0, 1, 33)))
print("sampled exponential is nonnegative on the grid:", in_cone(phi, grid_cone))

# Sampled axiom checking; a shifted half-plane is not closed under scaling,
# and a union of opposite quadrants contains a vector together with its
# negation.
print()
print("axiom reports")
print("  orthant:", verify_cone_axioms(plane, n_samples=5000, seed=0).all_passed)
half = CandidateSet(2, lambda v: v[0] >= 1.0, label="v1 >= 1")
rep = verify_cone_axioms(half, n_samples=5000, seed=0)
print("  v1 >= 1: P2 passed =", rep.p2.passed, "witness:", rep.p2.witness)
quad = CandidateSet(2, lambda v: v[0] * v[1] >= 0.0, label="v1*v2 >= 0")
rep = verify_cone_axioms(quad, n_samples=5000, seed=0)
print("  v1*v2 >= 0: P3 passed =", rep.p3.passed, "witness:", rep.p3.witness)

# Monotone norms (euclidean, sup) cannot disorder the orthant: K = 1.
# The skew norm N(u, v) = |u - v| + eps |u + v| can: the pair
# x = (1, 0) <= y = (1, 1) has N(x)/N(y) = 1.1/0.2 = 5.5.
print()
print("measured normal constants (1e6 ordered pairs each)")
for tag, cone in [
    ("euclidean", orthant(2, "euclidean")),
    ("sup      ", orthant(2, "sup")),
    ("skew(0.1)", orthant(2, "skew", 0.1)),
]:
    print(f"  {tag}: K >= {estimate_normal_constant(cone, 1_000_000, seed=42)}")

x = SpaceElement.finite([1.0, 0.0])
y = SpaceElement.finite([1.0, 1.0])
sk = orthant(2, "skew", 0.1)
print("  skew witness ratio:", norm(x, sk), "/", norm(y, sk), "=", norm(x, sk) / norm(y, sk))
