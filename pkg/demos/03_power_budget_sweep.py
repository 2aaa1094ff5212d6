"""Sweep the total power budget and export CSV plus an SVG chart.

Every scheme's worst-user rate grows with the budget; the search schemes
pull away from the baselines as soon as there is slack to buy computation.
Outputs land in demos/output/pmax/.
"""

from pathlib import Path

from pscom_alloc import (
    SweepParam,
    SweepSpec,
    default_scenario_config,
    emit_plot,
    export_csv,
    run_sweep,
)

out_dir = Path(__file__).parent / "output" / "pmax"
config = default_scenario_config()
sweep = SweepSpec(SweepParam.PMAX, (3.0, 4.0, 5.0, 6.0, 7.0))

records = run_sweep(config, sweep)
summary, detail = export_csv(records, out_dir)
plot = emit_plot(records, out_dir / "sweep_pmax.svg")

print(f"{'budget W':>9}", end="")
methods = []
for r in records:
    if r.report.method not in methods:
        methods.append(r.report.method)
print("".join(f"{m.value:>15}" for m in methods))
for value in sweep.values:
    row = [r for r in records if r.sweep_value == value]
    taus = {r.report.method: r.report.tau_bps for r in row}
    print(f"{value:9.1f}" + "".join(f"{taus[m]:15.4e}" for m in methods))

print()
print(f"wrote {summary}")
print(f"wrote {detail}")
print(f"wrote {plot}")
