"""Foil-winding description: geometry, winding function and voltage basis.

A foil winding occupies a cylindrical shell [rho0, rho1] x [z0, z1] with N
radially stacked turns wound in the azimuthal direction. The winding
function chi = e_phi / (2 pi rho) encodes the current path of one turn; the
voltage drop per turn is a scalar function of the stack coordinate rho only
and is discretized with 1D hat functions on the turn interval.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .materials import MaterialSpec


@dataclass(frozen=True)
class FoilWindingSpec:
    region: str
    rho: tuple[float, float]      # radial extent [rho0, rho1] in m
    z: tuple[float, float]        # axial extent [z0, z1] in m
    turns: int
    fill_factor: float
    conductor: MaterialSpec
    insulator: MaterialSpec
    n_u: int = 7

    def __post_init__(self):
        if self.turns < 1:
            raise ValueError("foil winding needs at least one turn")
        if not 0.0 < self.fill_factor <= 1.0:
            raise ValueError("fill_factor must be in (0, 1]")
        if self.rho[0] <= 0:
            raise ValueError("foil winding must not touch the symmetry axis")
        if self.rho[1] <= self.rho[0] or self.z[1] <= self.z[0]:
            raise ValueError("foil winding extent is empty")
        if self.n_u < 2:
            raise ValueError("n_u must be >= 2")

    @property
    def width(self) -> float:
        return self.rho[1] - self.rho[0]

    @property
    def height(self) -> float:
        return self.z[1] - self.z[0]

    @property
    def turn_width(self) -> float:
        """Total width b of one turn (conductor plus insulation)."""
        return self.width / self.turns

    @property
    def conductor_width(self) -> float:
        return self.fill_factor * self.turn_width

    @property
    def insulator_width(self) -> float:
        return (1.0 - self.fill_factor) * self.turn_width

    def turn_centers(self) -> np.ndarray:
        b = self.turn_width
        return self.rho[0] + (np.arange(self.turns) + 0.5) * b

    def check_assumptions(self, f: float | None = None) -> list[str]:
        """Warn when the thin-layer model assumptions are violated.

        The homogenization assumes conductor layers much thinner than the
        skin depth and a winding much taller than one turn.
        """
        from .materials import skin_depth

        notes = []
        if self.height < 10.0 * self.turn_width:
            notes.append(
                f"winding height {self.height:.4g} m is less than 10 turn "
                f"widths ({self.turn_width:.4g} m); tall-winding assumption is weak")
        if f is not None and f > 0 and self.conductor.sigma > 0:
            delta = skin_depth(f, self.conductor.mu, self.conductor.sigma)
            if self.conductor_width > delta:
                notes.append(
                    f"conductor layer {self.conductor_width:.4g} m exceeds the "
                    f"skin depth {delta:.4g} m at {f:.4g} Hz")
        for msg in notes:
            warnings.warn(msg, stacklevel=2)
        return notes


def winding_function_at(point, spec: FoilWindingSpec) -> np.ndarray:
    """Winding function at (rho, z): azimuthal component 1/(2 pi rho), 1/m.

    Returned as (rho, phi, z) components. Its line integral along one full
    turn is exactly 1.
    """
    rho, z = float(point[0]), float(point[1])
    if not (spec.rho[0] <= rho <= spec.rho[1] and spec.z[0] <= z <= spec.z[1]):
        raise ValueError(f"point ({rho}, {z}) lies outside the foil winding region")
    return np.array([0.0, 1.0 / (2.0 * math.pi * rho), 0.0])


@dataclass(frozen=True)
class VoltageBasis:
    """Uniform 1D hat functions on the turn interval [rho0, rho1].

    The hats form a partition of unity; each basis function depends on rho
    only (constant in the winding direction and along the turn height).
    """

    nodes: np.ndarray   # (n_u,) radii, ascending
    spec: FoilWindingSpec = field(repr=False, default=None)

    def __post_init__(self):
        self.nodes.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def spacing(self) -> float:
        return self.nodes[1] - self.nodes[0]

    def eval(self, rho) -> np.ndarray:
        """Hat values at radii rho; shape (..., n_u)."""
        r = np.asarray(rho, dtype=float)
        x = (r[..., None] - self.nodes) / self.spacing
        return np.clip(1.0 - np.abs(x), 0.0, 1.0)

    def integrals(self) -> np.ndarray:
        """Exact integrals of each hat over the interval."""
        out = np.full(self.n, self.spacing)
        out[0] = out[-1] = 0.5 * self.spacing
        return out


def build_voltage_basis(spec: FoilWindingSpec, n_u: int | None = None) -> VoltageBasis:
    n = spec.n_u if n_u is None else n_u
    if n < 2:
        raise ValueError("voltage basis needs n_u >= 2")
    return VoltageBasis(nodes=np.linspace(spec.rho[0], spec.rho[1], n), spec=spec)


def coupling_vector(basis: VoltageBasis, spec: FoilWindingSpec) -> np.ndarray:
    """Turn-count weights c_i = (1/b) * integral of hat i over the interval.

    Because the hats are a partition of unity the entries sum to the turn
    count N exactly.
    """
    return basis.integrals() / spec.turn_width


def dc_resistance(spec: FoilWindingSpec) -> tuple[float, float]:
    """Series DC resistance of the winding, in Ohm.

    Returns (discrete, continuous): the discrete value sums the turns as
    rings at their center radii, R = (2 pi / (sigma_c b_c h)) * sum(rho_n);
    the continuous value replaces the sum with (1/b) * integral of rho.
    """
    sigma = spec.conductor.sigma
    if sigma <= 0:
        raise ValueError("dc_resistance needs a conducting foil")
    factor = 2.0 * math.pi / (sigma * spec.conductor_width * spec.height)
    discrete = factor * spec.turn_centers().sum()
    rho0, rho1 = spec.rho
    continuous = factor / spec.turn_width * 0.5 * (rho1**2 - rho0**2)
    return discrete, continuous


def foil_cut_currents(system, state, winding_index: int = 0) -> np.ndarray:
    """Current through the winding at every voltage-basis node, in A.

    Evaluates the discrete counterpart of the cut integral
    integral_over_cut sigma*(-dA/dt + u*chi) . chi dS, scaled to the turn
    current, in the same weak sense in which the assembled system enforces
    it. After a converged solve all entries match the terminal current to
    solver accuracy, i.e. the same current flows through every turn.
    """
    w = system.windings[winding_index]
    da = state.da()
    u = state.u[winding_index]
    weak = -w.X.T @ da + w.G @ u
    return weak / w.c


def foil_cut_current(system, state, spec: FoilWindingSpec, rho_star: float,
                     winding_index: int = 0) -> float | complex:
    """Cut current at radius rho_star, interpolated between basis nodes."""
    if not spec.rho[0] <= rho_star <= spec.rho[1]:
        raise ValueError("cut position lies outside the winding interval")
    nodal = foil_cut_currents(system, state, winding_index)
    basis = system.windings[winding_index].basis
    weights = basis.eval(rho_star)
    return (weights * nodal).sum() / weights.sum()
