"""Sweep the channel noise power from -100 to -80 dBm.

Rising noise depresses every scheme, but not equally: the no-compression
baseline spends all power on transmission and therefore declines the most
slowly in relative terms, while the compression-heavy schemes give back some
of their advantage. Outputs land in demos/output/noise/.
"""

from pathlib import Path

from pscom_alloc import (
    DEFAULT_NOISE_SWEEP_DBM,
    SweepParam,
    SweepSpec,
    default_scenario_config,
    emit_plot,
    export_csv,
    run_sweep,
)

out_dir = Path(__file__).parent / "output" / "noise"
config = default_scenario_config()
sweep = SweepSpec(SweepParam.NOISE, DEFAULT_NOISE_SWEEP_DBM)

records = run_sweep(config, sweep)
summary, detail = export_csv(records, out_dir)
plot = emit_plot(records, out_dir / "sweep_noise.svg")

series = {}
for r in records:
    series.setdefault(r.report.method.value, []).append(r.report.tau_bps)

print(f"{'noise dBm':>10}" + "".join(f"{m:>15}" for m in series))
for i, dbm in enumerate(sweep.values):
    print(f"{dbm:10.0f}" + "".join(f"{taus[i]:15.4e}" for taus in series.values()))

print("\nrelative drop from -100 dBm to -80 dBm:")
for method, taus in series.items():
    print(f"  {method:<13} {(taus[0] - taus[-1]) / taus[0]:6.1%}")
print(f"\nwrote {summary}, {detail}, {plot}")
