"""Tour of the closed-form building blocks.

Walks through the three formulas everything else stands on: Shannon capacity
of one uplink user, the equivalent rate after semantic compression, and the
piecewise-linear computation load curve with its power cost.
"""

import numpy as np

from pscom_alloc import (
    SystemParams,
    channel_capacity,
    comp_load,
    comp_power,
    default_curve,
    equivalent_rate,
)

params = SystemParams()
print("stock parameters:")
print(f"  bandwidth      {params.bandwidth_hz:.0e} Hz")
print(f"  noise power    {params.noise_power_w:.0e} W (-90 dBm)")
print(f"  power budget   {params.p_max_w} W")
print(f"  compute coeff  {params.p0_w_per_load} W per load unit")
print()

# capacity rises with transmit power; the equivalent rate divides by the
# compression ratio, so deeper compression multiplies the delivered rate
h = 1e-9
print("transmit power -> capacity -> equivalent rate at ratio 0.5:")
for p_t in (1e-4, 1e-3, 1e-2, 1e-1):
    cap = channel_capacity(p_t, h, params)
    print(f"  p_t={p_t:7.0e} W   C={cap:12.4e} bit/s   R(0.5)={equivalent_rate(cap, 0.5):12.4e} bit/s")
print()

curve = default_curve()
print(f"load curve: {curve.num_segments} segments, knots {curve.knots}")
print(f"segment slopes: {curve.slopes}")
print()
print("ratio -> load -> computation power:")
for eta in np.linspace(1.0, curve.eta_floor, 9):
    load = comp_load(curve, float(eta))
    print(f"  eta={eta:4.2f}   g={load:7.1f}   p_c={comp_power(curve, float(eta), params):7.4f} W")
print()
print("compressing below the last knot is outside the curve's domain;")
print("solvers treat such ratios as infeasible rather than extrapolating.")
