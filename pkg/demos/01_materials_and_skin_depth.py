"""Homogenized material tensors of a foil winding.

A foil winding is a radial stack of thin copper and insulation layers.
Instead of meshing every layer, the solver replaces the stack with one
anisotropic material: properties along the layers average arithmetically,
properties across the stack average harmonically. This script prints the
effective tensors for the copper/insulation pairing used by the shipped
decks and checks the thin-foil assumption against the skin depth.

Runtime: instant.
"""
from foilfem import MU0, MaterialSpec, TemperatureModel, conductivity_at, homogenize, skin_depth

copper = MaterialSpec(sigma=60e6, lam=385.0, c_v=3.45e6)
insulation = MaterialSpec(sigma=0.0, lam=0.09, c_v=1.03e6)

for ff in (0.5, 0.8, 0.95):
    hom = homogenize(copper, insulation, ff)
    print(f"fill factor {ff:.2f}:")
    print(f"  sigma  along/across the layers: {hom.sigma_par:.3e} / {hom.sigma_perp:.3e} S/m")
    print(f"  lambda along/across the layers: {hom.lam_par:8.3f} / {hom.lam_perp:.5f} W/(m K)")
    print(f"  volumetric heat capacity:       {hom.c_v:.4e} J/(m^3 K)")

print()
print("skin depth of the copper foil:")
for f in (50.0, 1e3, 5e3, 50e3):
    print(f"  f = {f:8.0f} Hz -> delta = {skin_depth(f, MU0, copper.sigma) * 1e3:7.3f} mm")
print("a 0.27 mm foil (validation deck) stays well below the skin depth up to ~50 kHz")

print()
model = TemperatureModel(sigma_ref=60e6, alpha_ref=3.93e-3, T_ref=293.15)
print("copper conductivity over temperature:")
for T_C in (20.0, 60.0, 100.0, 140.0):
    sigma = conductivity_at(273.15 + T_C, model)
    print(f"  T = {T_C:5.1f} C -> sigma = {sigma:.4e} S/m")
