"""Axisymmetric finite-element magneto-thermal solver for foil windings.

Weakly coupled magnetoquasistatic and heat-conduction simulation of devices
with homogenized foil windings: anisotropic mixing rules replace the layer
stack, a voltage function distributes the turn voltage across the winding
build, Joule losses feed a transient thermal solve and the temperature
feeds back into the conductivities.
"""

__version__ = "0.1.0"

from .materials import (MU0, HomogenizedTensors, MaterialSpec,
                        TemperatureModel, conductivity_at, homogenize,
                        skin_depth)
from .mesh import Mesh, RegionRect, generate, import_msh, refine_uniform, write_msh
from .foil_winding import (FoilWindingSpec, VoltageBasis, build_voltage_basis,
                           coupling_vector, dc_resistance, foil_cut_current,
                           foil_cut_currents, winding_function_at)
from .mqs import (CircuitSpec, MagneticAssembler, MagneticState,
                  MagneticSystem, ResolvedWindingSpec, StrandedWindingSpec,
                  assemble_stranded, solve_frequency, solve_resolved_reference,
                  source_vector, step_time)
from .thermal import (ThermalBC, ThermalState, ThermalSystem, internal_energy,
                      mms_convergence)
from .coupling import (CouplingOptions, adapt_macro_step, losses_harmonic,
                       losses_time_domain, run_weak_coupling, total_losses)
from .post import Probe, convergence_study, export_vtk, sample_line
from .config import ProblemConfig, from_dict, load_config
from .runner import RunReport, run

__all__ = [
    "MU0", "HomogenizedTensors", "MaterialSpec", "TemperatureModel",
    "conductivity_at", "homogenize", "skin_depth",
    "Mesh", "RegionRect", "generate", "import_msh", "refine_uniform", "write_msh",
    "FoilWindingSpec", "VoltageBasis", "build_voltage_basis", "coupling_vector",
    "dc_resistance", "foil_cut_current", "foil_cut_currents", "winding_function_at",
    "CircuitSpec", "MagneticAssembler", "MagneticState", "MagneticSystem",
    "ResolvedWindingSpec", "StrandedWindingSpec", "assemble_stranded",
    "solve_frequency", "solve_resolved_reference", "source_vector", "step_time",
    "ThermalBC", "ThermalState", "ThermalSystem", "internal_energy",
    "mms_convergence",
    "CouplingOptions", "adapt_macro_step", "losses_harmonic",
    "losses_time_domain", "run_weak_coupling", "total_losses",
    "Probe", "convergence_study", "export_vtk", "sample_line",
    "ProblemConfig", "from_dict", "load_config",
    "RunReport", "run",
]
