"""Verification of the heat-conduction solver by manufactured solutions.

A smooth temperature field is postulated on a rectangle, the matching
volumetric source is derived analytically, and the steady solver is run on
a sequence of uniformly refined meshes. Second-order L2 convergence
confirms assembly, axisymmetric weighting and Dirichlet handling, for an
isotropic and a strongly anisotropic conductivity tensor.

Runtime: a few seconds.
"""
from foilfem import mms_convergence

for aniso in (False, True):
    label = "anisotropic (0.5 / 10 W/(m K))" if aniso else "isotropic (5 W/(m K))"
    print(f"{label}:")
    print("  level    h [mm]   elements   L2 error      rate")
    for row in mms_convergence(4, anisotropic=aniso):
        rate = "  -  " if row["rate"] != row["rate"] else f"{row['rate']:5.2f}"
        print(f"  {row['level']:<8d} {row['h'] * 1e3:<8.3f} {row['n_elems']:<10d} "
              f"{row['l2_error']:<13.4e} {rate}")
    print()
