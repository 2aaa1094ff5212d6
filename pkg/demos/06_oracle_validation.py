"""Validate both search schemes against the brute-force oracle.

On a two-user instance the oracle grids each load-curve segment finely and
solves the exact inner problem for every ratio vector. It must dominate both
schemes (it searches a superset of the fixed-ratio scheme's candidates and
is not restricted to the proportional scheme's power shape), and with the
grid collapsed to the knots alone it must reproduce the fixed-ratio scheme
exactly. This is the library-level twin of `pscom-alloc oracle-check`.
"""

import time

from pscom_alloc import (
    SystemParams,
    default_curve,
    generate_channel_gains,
    solve_method1,
    solve_method2,
    solve_oracle,
)

params = SystemParams()
curve = default_curve()
channel = generate_channel_gains(2, 1e-10, 1e-8, 42)
print(f"gains: {channel.gains}")

r1 = solve_method1(channel, curve, params)
r2 = solve_method2(channel, curve, params)
print(f"proportional-power scheme: tau={r1.tau_bps:.8e} bit/s")
print(f"fixed-ratio scheme:        tau={r2.tau_bps:.8e} bit/s")

for grid in (0, 5, 25, 50):
    start = time.perf_counter()
    ro = solve_oracle(channel, curve, params, grid)
    wall = time.perf_counter() - start
    print(
        f"oracle grid={grid:2d}/segment: tau={ro.tau_bps:.8e} bit/s  "
        f"({ro.outer_candidates_evaluated} vectors, {wall:.2f} s)"
    )
    assert ro.tau_bps >= max(r1.tau_bps, r2.tau_bps) - params.epsilon

knots_only = solve_oracle(channel, curve, params, 0)
assert abs(knots_only.tau_bps - r2.tau_bps) <= 1e-9 * abs(r2.tau_bps)
print("\nknots-only oracle reproduces the fixed-ratio scheme, and every grid")
print("refinement stays at or above both schemes: validation passed.")
