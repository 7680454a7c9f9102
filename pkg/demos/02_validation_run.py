"""Coupled run of the validation deck: a foil winding in an isothermal box.

The 30-turn winding is driven with a 15 A current at 50 Hz; the magnetic
problem is solved as complex phasors, the heat equation marches 10 hours in
2-minute steps with the averaged Joule losses as source, and the winding
conductivity follows the temperature. Outputs land in out/validation.

Runtime: a few seconds.
"""
import numpy as np

from foilfem import load_config, run

cfg = load_config("decks/validation.json")
report = run(cfg)

print(f"thermal steps:          {report.thermal_steps}")
print(f"magnetic solves:        {report.magnetic_solves}")
print(f"final total losses:     {report.total_losses_W:.4f} W")
print(f"final internal energy:  {report.internal_energy_J:.1f} J")
print(f"winding mean / peak:    {report.winding_mean_T_C['winding']:.1f} C"
      f" / {report.T_max_C:.1f} C")

# temperature history at the winding-center probe, from the written CSV
hist = np.genfromtxt(f"{report.output_dir}/history.csv", delimiter=",", names=True)
t_h = hist["t_s"] / 3600.0
T_C = hist["T_winding_center_K"] - 273.15
for frac in (0, len(t_h) // 8, len(t_h) // 4, len(t_h) // 2, -1):
    print(f"  t = {t_h[frac]:5.2f} h  T_center = {T_C[frac]:6.2f} C")
