#!/usr/bin/env python3
# Maps from expression text, and the sampled certificates the solver needs.
#
# The headline quantity is the interleaved contraction modulus: the smallest
# a with d(TSx, RSy) <= a d(Tx, Ry) in the cone order over sampled pairs.
# For S = x+1, T = e^-x, R = 2e^-x the ratio is exactly 1/e at every pair,
# even though S itself moves every point by a full unit.

import math

from conefix import (
    classify_family,
    estimate_tr_modulus,
    exp_space,
    parse_map,
    probe_injectivity,
    probe_subsequential_convergence,
    probe_triple,
    product_space,
)

S = parse_map("x+1")
T = parse_map("exp(-x)")
R = parse_map("2*exp(-x)")
space = exp_space(33, domain=(-1e9, 1e9))

triple = probe_triple(S, T, R, space, box=(-5.0, 5.0), seed=42)
print("injectivity probes: T ->", triple.injectivity_T.detail)
print("                    R ->", triple.injectivity_R.detail)

est = estimate_tr_modulus(triple, space, box=(-5.0, 5.0), n_pairs=100_000, seed=42)
print()
print(f"sampled modulus a_hat = {est.a_hat!r}  (1/e = {1/math.e!r})")
print("witness pair:", est.witness_pair, " box:", est.box)
print("norm-ratio diagnostic:", est.norm_ratio_sup)

# S alone is no contraction at all: it translates, so |Sx - Sy| = |x - y|.
plane = product_space(alpha=1.0, domain=(-1e9, 1e9))
print()
print("family classification on [-5, 5]")
for text in ("x/2", "x+1", "exp(-x)"):
    cls = classify_family(parse_map(text), plane, (-5.0, 5.0), seed=0)
    print(f"  {text:10s} -> {cls.category:18s} ratio_sup = {cls.ratio_sup:.6g}")

# A non-injective map is caught with an explicit collision pair.
bad = probe_injectivity(parse_map("x*x"), (-2.0, 2.0), seed=0)
print()
print("x*x collision witness:", bad.witness)

# The decay map squeezes the whole half-line into a vanishing interval:
# its images converge while the inputs run away. That is exactly the
# behavior the subsequential-convergence probe hunts for.
probe = probe_subsequential_convergence(T, space, S=S, x0=0.0, bound=50.0, n_max=200)
print()
print("subsequential probe on exp(-x):", probe.verdict, "-", probe.detail)
