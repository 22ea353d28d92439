#!/usr/bin/env python3
# Picard iteration with error envelopes, and every way a run can end.
#
# The solver tracks ||d(T x_n, R x_{n+1})|| against the geometric envelope
# a^n K D0. Four endings: the fixed point is found and its residual
# re-checked; the declared modulus is falsified by an envelope violation;
# the images converge while the iterates escape; or the budget runs out.

import math

from conefix import (
    SolveConfig,
    SpaceElement,
    exp_space,
    parse_map,
    probe_triple,
    product_space,
    solve,
    solve_localized,
    solve_power,
    verify_uniqueness,
)

plane = product_space(alpha=1.0, domain=(-1e9, 1e9))
cubed = probe_triple(parse_map("x/2"), parse_map("x^3"), parse_map("x^3"),
                     plane, (-5.0, 5.0), seed=42)

result, trace = solve(cubed, plane, SolveConfig(x0=1.0, a=0.125))
print("S = x/2 with cubed images:", result.status.value,
      "v0 =", result.v0, "residual =", result.residual)
print("first rows (gap vs envelope):")
for n in range(4):
    print(f"  n={n}  gap={trace.image_gap[n]:.6e}  envelope={trace.envelope[n]:.6e}")

# Understate the modulus and the trace itself falsifies it.
wrong, trace_wrong = solve(
    probe_triple(parse_map("x/2"), parse_map("x"), parse_map("x"), plane, (-5.0, 5.0)),
    plane, SolveConfig(x0=1.0, a=0.1),
)
print()
print("declared a = 0.1 for a true 1/2-contraction:", wrong.status.value,
      "violating row:", wrong.violating_row)

# Localized run: hypothesis d(TSx0, Tx0) <= (1-a)c checked exactly up front,
# then every image is asserted to stay inside the ball.
halving = probe_triple(parse_map("x/2"), parse_map("x"), parse_map("x"),
                       plane, (-5.0, 5.0), seed=42)
res_loc, _, ball_log = solve_localized(
    halving, plane, 1.0, SpaceElement.finite([1.2, 1.2]), SolveConfig(x0=1.0, a=0.5)
)
print()
print("localized run:", res_loc.status.value, "v0 =", res_loc.v0,
      "all images in ball:", all(b.inside for b in ball_log))

# Power variant: certify S∘S instead, then check the base map fixes the point.
res_pow, _, est = solve_power(halving, plane, 2, SolveConfig(x0=1.0, a=0.5),
                              box=(-5.0, 5.0), n_pairs=20_000, seed=42)
print("power run: modulus of S∘S =", est.a_hat, "->", res_pow.status.value,
      "v0 =", res_pow.v0)

# Multi-start agreement.
rep = verify_uniqueness(cubed, plane, SolveConfig(x0=1.0, a=0.125), [-100.0, 1.0, 100.0])
print("uniqueness across starts {-100, 1, 100}: passed =", rep.passed,
      "spread =", rep.max_spread)

# The cautionary ending: S = x+1 with decaying image maps. Every image
# sequence converges (the modulus is 1/e) yet S has no fixed point; the
# iterates march off to infinity and the solver says exactly that.
curve = exp_space(33, domain=(-1e9, 1e9))
runaway = probe_triple(parse_map("x+1"), parse_map("exp(-x)"), parse_map("2*exp(-x)"),
                       curve, (-5.0, 5.0), seed=42)
res_cex, trace_cex = solve(runaway, curve, SolveConfig(x0=0.0, a=1 / math.e, max_iter=200))
print()
print("translation with decaying images:", res_cex.status.value,
      "after", res_cex.iterations, "iterations")
print("  image limits y0 =", res_cex.y0, " z0 =", res_cex.z0)
print("  every step costs exactly e in norm:", set(trace_cex.step) == {math.e})
