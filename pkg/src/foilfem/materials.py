"""Constitutive data and homogenization mixing rules for layered windings.

A foil winding is a stack of thin conductor/insulator layers. Resolving the
layers is replaced by an anisotropic effective material: properties parallel
to the layers mix arithmetically, properties across the stack mix
harmonically. The local frame is (perpendicular-to-layers, winding direction,
layer plane towards the tips); in the axisymmetric solver the stack direction
is radial, so "perpendicular" maps to rho and "parallel" to phi and z.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

MU0 = 4.0e-7 * math.pi


@dataclass(frozen=True)
class TemperatureModel:
    """Linear-in-resistivity conductivity model sigma(T) = sigma_ref / (1 + alpha*(T - T_ref))."""

    sigma_ref: float   # S/m at T_ref
    alpha_ref: float   # 1/K
    T_ref: float       # K

    def __post_init__(self):
        if self.sigma_ref < 0:
            raise ValueError("temperature model: sigma_ref must be >= 0")
        if self.alpha_ref < 0:
            raise ValueError("temperature model: alpha_ref must be >= 0")


@dataclass(frozen=True)
class MaterialSpec:
    """Isotropic material data: sigma (S/m), mu (H/m), lam (W/(m K)), c_v (J/(m^3 K))."""

    sigma: float
    mu: float = MU0
    lam: float = 1.0
    c_v: float = 1.0
    temperature_model: TemperatureModel | None = None

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("material: sigma must be >= 0")
        if self.mu <= 0:
            raise ValueError("material: mu must be > 0")
        if self.lam <= 0:
            raise ValueError("material: lam must be > 0")
        if self.c_v <= 0:
            raise ValueError("material: c_v must be > 0")

    @property
    def nu(self) -> float:
        """Reluctivity 1/mu (m/H)."""
        return 1.0 / self.mu


@dataclass(frozen=True)
class HomogenizedTensors:
    """Diagonal effective tensors of a layered stack in its local frame.

    ``*_perp`` acts across the layers (stack direction), ``*_par`` within the
    layer planes. ``orientation`` names the global axis of the stack
    direction; only 'radial' is meaningful for the axisymmetric solver.
    """

    nu_perp: float
    nu_par: float
    sigma_perp: float
    sigma_par: float
    lam_perp: float
    lam_par: float
    c_v: float
    orientation: str = "radial"

    def __post_init__(self):
        if self.orientation not in ("radial", "axial"):
            raise ValueError(f"unknown stack orientation {self.orientation!r}")


def _arithmetic(a: float, b: float, ff: float) -> float:
    return ff * a + (1.0 - ff) * b


def _harmonic(a: float, b: float, ff: float) -> float:
    # zero on either side makes the series path insulating
    if a == 0.0 or b == 0.0:
        if ff == 1.0 and a != 0.0:
            return a
        if ff == 0.0 and b != 0.0:
            return b
        return 0.0
    return 1.0 / (ff / a + (1.0 - ff) / b)


def homogenize(conductor: MaterialSpec, insulator: MaterialSpec,
               fill_factor: float, orientation: str = "radial") -> HomogenizedTensors:
    """Mix conductor and insulator properties of one turn into effective tensors.

    fill_factor is the conductor fraction of the turn width, in (0, 1].
    Reluctivity mixes arithmetically across the stack and harmonically along
    it (fluxes crossing the layers see the materials in series); conductivity
    and thermal conductivity mix the other way around (currents/heat along
    the layers see them in parallel). Volumetric heat capacity is a plain
    volume average.
    """
    ff = float(fill_factor)
    if not 0.0 < ff <= 1.0:
        raise ValueError(f"fill_factor must be in (0, 1], got {ff}")
    return HomogenizedTensors(
        nu_perp=_arithmetic(conductor.nu, insulator.nu, ff),
        nu_par=_harmonic(conductor.nu, insulator.nu, ff),
        sigma_perp=_harmonic(conductor.sigma, insulator.sigma, ff),
        sigma_par=_arithmetic(conductor.sigma, insulator.sigma, ff),
        lam_perp=_harmonic(conductor.lam, insulator.lam, ff),
        lam_par=_arithmetic(conductor.lam, insulator.lam, ff),
        c_v=_arithmetic(conductor.c_v, insulator.c_v, ff),
        orientation=orientation,
    )


def conductivity_at(T, model: TemperatureModel):
    """Electric conductivity at temperature T (K); scalar or ndarray.

    sigma(T) = sigma_ref / (1 + alpha_ref*(T - T_ref)). The denominator must
    stay positive; anything else is an unphysically cold input.
    """
    import numpy as np

    denom = 1.0 + model.alpha_ref * (np.asarray(T, dtype=float) - model.T_ref)
    if np.any(denom <= 0.0):
        raise ValueError("conductivity_at: 1 + alpha_ref*(T - T_ref) must be > 0")
    out = model.sigma_ref / denom
    return float(out) if np.ndim(T) == 0 else out


def skin_depth(f: float, mu: float, sigma: float) -> float:
    """Skin depth sqrt(2/(omega*mu*sigma)) in m, for f, mu, sigma > 0."""
    if f <= 0 or mu <= 0 or sigma <= 0:
        raise ValueError("skin_depth requires f, mu, sigma > 0")
    omega = 2.0 * math.pi * f
    return math.sqrt(2.0 / (omega * mu * sigma))
