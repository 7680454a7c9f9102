"""Transient heat conduction on the axisymmetric mesh.

Thermal conductivity is a diagonal tensor per region (anisotropic inside
homogenized windings: poor across the layer stack, good along it). The
boundary is convective (Robin), isothermal (Dirichlet, imposed by row/column
elimination with symmetric correction) or adiabatic (Neumann) per boundary
tag; the symmetry axis is naturally adiabatic. Temperatures are kelvin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ._fem import QP, QW, ElementData, assemble_csr, edge_geometry, interp_at_quad

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ThermalBC:
    """Boundary condition for one boundary tag.

    kind "robin" needs h_conv in W/(m^2 K); h_conv -> infinity corresponds
    to "dirichlet" (isothermal at ambient), h_conv = 0 to "neumann".
    """

    kind: str
    h_conv: float = 0.0

    def __post_init__(self):
        if self.kind not in ("robin", "dirichlet", "neumann"):
            raise ValueError(f"unknown boundary condition kind {self.kind!r}")
        if self.kind == "robin" and self.h_conv < 0:
            raise ValueError("h_conv must be >= 0")


@dataclass
class ThermalState:
    T: np.ndarray   # nodal temperatures, K
    t: float = 0.0


@dataclass
class ThermalSystem:
    mesh: object
    ed: ElementData
    K: sp.csr_matrix            # conduction stiffness
    M: sp.csr_matrix            # heat-capacity mass
    R: sp.csr_matrix            # Robin boundary matrix
    r: np.ndarray               # Robin boundary load (h*T_ambient)
    free: np.ndarray
    fixed: np.ndarray
    dirichlet_values: np.ndarray
    c_v_e: np.ndarray           # per-element volumetric heat capacity
    T_ambient: float
    load_weights: np.ndarray    # (m, 3): q_i from element-constant sources
    _lu_cache: dict = field(default_factory=dict, repr=False)

    @property
    def num_nodes(self) -> int:
        return self.mesh.num_nodes


def assemble(mesh, region_props: dict, bcs: dict[str, ThermalBC],
             T_ambient: float) -> ThermalSystem:
    """Build conduction, capacity and boundary operators.

    ``region_props`` maps region names to MaterialSpec (isotropic) or
    HomogenizedTensors (radially stacked: lam_perp across, lam_par along the
    axis). Every boundary tag of the mesh must appear in ``bcs``.
    """
    ed = ElementData(mesh)
    m = ed.num_elements
    tags = mesh.triangle_tags

    lam_rho = np.empty(m)
    lam_z = np.empty(m)
    c_v = np.empty(m)
    seen = np.zeros(m, dtype=bool)
    for name, props in region_props.items():
        sel = tags == mesh.region_id(name)
        if not np.any(sel):
            continue
        seen |= sel
        if hasattr(props, "lam_perp"):
            lam_rho[sel] = props.lam_perp
            lam_z[sel] = props.lam_par
        else:
            lam_rho[sel] = props.lam
            lam_z[sel] = props.lam
        c_v[sel] = props.c_v
    if not np.all(seen):
        missing = [mesh.region_names.get(int(t), str(t))
                   for t in np.unique(tags[~seen])]
        raise ValueError(f"regions without thermal material: {sorted(missing)}")

    g = ed.grad
    w_el = TWO_PI * ed.area * ed.w_rho
    ke = ((w_el * lam_rho)[:, None, None]
          * np.einsum("mi,mj->mij", g[:, :, 0], g[:, :, 0])
          + (w_el * lam_z)[:, None, None]
          * np.einsum("mi,mj->mij", g[:, :, 1], g[:, :, 1]))
    K = assemble_csr(ke, ed.tris, mesh.num_nodes)

    rho_w = QW[None, :] * ed.rho_q
    me = np.einsum("e,eq,qi,qj->eij", TWO_PI * c_v * ed.area, rho_w, QP, QP)
    M = assemble_csr(me, ed.tris, mesh.num_nodes)

    load_weights = np.einsum("e,eq,qi->ei", TWO_PI * ed.area, rho_w, QP)

    n = mesh.num_nodes
    robin_rows, robin_cols, robin_vals = [], [], []
    r = np.zeros(n)
    fixed_nodes: set[int] = set()
    for bid, name in mesh.boundary_names.items():
        if name not in bcs:
            raise ValueError(f"boundary tag {name!r} has no thermal condition")
        bc = bcs[name]
        idx = np.nonzero(mesh.boundary_edge_tags == bid)[0]
        if bc.kind == "neumann" or len(idx) == 0:
            continue
        if bc.kind == "dirichlet":
            fixed_nodes.update(np.unique(mesh.boundary_edges[idx]).tolist())
            continue
        edges, length, rho_q, vq = edge_geometry(mesh, idx)
        # 2-point Gauss on each edge: exact for v_i v_j rho
        ew = bc.h_conv * TWO_PI * length
        ke_edge = np.einsum("k,q,kq,qi,qj->kij",
                            ew, np.array([0.5, 0.5]), rho_q, vq, vq)
        robin_rows.append(np.repeat(edges, 2, axis=1).ravel())
        robin_cols.append(np.tile(edges, (1, 2)).ravel())
        robin_vals.append(ke_edge.ravel())
        re_edge = np.einsum("k,q,kq,qi->ki", ew * T_ambient,
                            np.array([0.5, 0.5]), rho_q, vq)
        np.add.at(r, edges.ravel(), re_edge.ravel())
    if robin_rows:
        R = sp.coo_matrix((np.concatenate(robin_vals),
                           (np.concatenate(robin_rows), np.concatenate(robin_cols))),
                          shape=(n, n)).tocsr()
    else:
        R = sp.csr_matrix((n, n))

    fixed = np.array(sorted(fixed_nodes), dtype=np.int64)
    mask = np.ones(n, dtype=bool)
    mask[fixed] = False
    free = np.nonzero(mask)[0]
    dirichlet_values = np.full(n, T_ambient)

    return ThermalSystem(mesh=mesh, ed=ed, K=K, M=M, R=R, r=r,
                         free=free, fixed=fixed,
                         dirichlet_values=dirichlet_values,
                         c_v_e=c_v, T_ambient=T_ambient,
                         load_weights=load_weights)


def load_from_elements(system: ThermalSystem, h_elem: np.ndarray) -> np.ndarray:
    """Nodal load vector from an element-constant source density (W/m^3)."""
    q = np.zeros(system.num_nodes)
    np.add.at(q, system.ed.tris.ravel(),
              (h_elem[:, None] * system.load_weights).ravel())
    return q


def load_from_function(system: ThermalSystem, fn) -> np.ndarray:
    """Nodal load vector from a source density fn(rho, z) evaluated pointwise."""
    ed = system.ed
    fq = fn(ed.pts[:, :, 0], ed.pts[:, :, 1])
    elem = np.einsum("e,eq,eq,qi->ei", TWO_PI * ed.area,
                     QW[None, :] * ed.rho_q, fq, QP)
    q = np.zeros(system.num_nodes)
    np.add.at(q, ed.tris.ravel(), elem.ravel())
    return q


def _solve_constrained(system: ThermalSystem, A: sp.csr_matrix, rhs: np.ndarray,
                       lu_key=None) -> np.ndarray:
    """Solve A T = rhs with Dirichlet values eliminated symmetrically."""
    f = system.free
    c = system.fixed
    Tc = system.dirichlet_values[c]
    rhs_f = rhs[f]
    if len(c):
        rhs_f = rhs_f - A[f][:, c] @ Tc
    if lu_key is not None and lu_key in system._lu_cache:
        lu = system._lu_cache[lu_key]
    else:
        try:
            lu = spla.splu(A[f][:, f].tocsc())
        except RuntimeError as exc:
            raise RuntimeError(f"singular thermal system: {exc}") from exc
        if lu_key is not None:
            system._lu_cache[lu_key] = lu
    T = np.empty(system.num_nodes)
    T[f] = lu.solve(rhs_f)
    T[c] = Tc
    return T


def step(system: ThermalSystem, state: ThermalState, dt: float,
         q: np.ndarray) -> ThermalState:
    """One backward-Euler step of length dt with the given load vector."""
    if dt <= 0:
        raise ValueError("thermal step needs dt > 0")
    A = (system.M / dt + system.K + system.R).tocsr()
    rhs = system.M @ state.T / dt + q + system.r
    T = _solve_constrained(system, A, rhs, lu_key=("step", dt))
    return ThermalState(T=T, t=state.t + dt)


def steady(system: ThermalSystem, q: np.ndarray) -> ThermalState:
    """Stationary solution (K + R) T = q + r."""
    if len(system.fixed) == 0 and system.R.nnz == 0:
        raise RuntimeError("singular thermal system: pure Neumann boundary "
                           "fixes no temperature level")
    A = (system.K + system.R).tocsr()
    return ThermalState(T=_solve_constrained(system, A, q + system.r), t=math.inf)


def internal_energy(system: ThermalSystem, T: np.ndarray) -> float:
    """Thermal internal energy integral(c_v * T) in J."""
    Tq = interp_at_quad(T, system.ed.tris)
    per_elem = np.einsum("e,eq,eq->e", TWO_PI * system.c_v_e * system.ed.area,
                         QW[None, :] * system.ed.rho_q, Tq)
    return float(per_elem.sum())


def boundary_outflow(system: ThermalSystem, T: np.ndarray,
                     q: np.ndarray) -> float:
    """Heat leaving through the boundary, from the discrete balance.

    Robin boundaries contribute the convective integral h*(T - T_ambient);
    isothermal boundaries contribute the reaction flux of their rows.
    """
    out = float(np.sum(system.R @ T - system.r))
    if len(system.fixed):
        out -= float(np.sum((system.K @ T - q)[system.fixed]))
    return out


def mms_convergence(levels: int, anisotropic: bool = False,
                    n0: int = 8) -> list[dict]:
    """Spatial convergence of the steady solver on a manufactured solution.

    Solves -div(lam grad T) = q on [10, 30] x [0, 20] mm with the source
    chosen so that T* = 300 + 10 sin(k_rho (rho-rho0)) cos(k_z (z-z0)) is
    the exact solution, Dirichlet values taken from T*. Returns one row per
    refinement with the mesh size, L2 error and observed rate.
    """
    if levels < 2:
        raise ValueError("need at least 2 levels to observe a rate")
    from . import mesh as meshmod

    rho0, rho1 = 0.01, 0.03
    z0, z1 = 0.0, 0.02
    lam_rho, lam_z = (0.5, 10.0) if anisotropic else (5.0, 5.0)
    k_rho = math.pi / (rho1 - rho0)
    k_z = math.pi / (z1 - z0)
    S = 10.0

    def exact(rho, z):
        return 300.0 + S * np.sin(k_rho * (rho - rho0)) * np.cos(k_z * (z - z0))

    def source(rho, z):
        s = np.sin(k_rho * (rho - rho0)) * np.cos(k_z * (z - z0))
        c = np.cos(k_rho * (rho - rho0)) * np.cos(k_z * (z - z0))
        return (lam_rho * S * k_rho ** 2 * s
                - lam_rho * S * k_rho * c / rho
                + lam_z * S * k_z ** 2 * s)

    class _Tensor:
        lam_perp = lam_rho
        lam_par = lam_z
        c_v = 1.0

    rows = []
    base = meshmod.generate(
        [meshmod.RegionRect("plate", (rho0, rho1), (z0, z1))],
        h=(rho1 - rho0) / n0)
    msh = base
    prev_err = None
    for lev in range(levels):
        system = assemble(msh, {"plate": _Tensor()},
                          {"outer": ThermalBC("dirichlet")}, T_ambient=300.0)
        system.dirichlet_values = exact(msh.nodes[:, 0], msh.nodes[:, 1])
        q = load_from_function(system, source)
        T = steady(system, q).T
        Tq = interp_at_quad(T, system.ed.tris)
        ex_q = exact(system.ed.pts[:, :, 0], system.ed.pts[:, :, 1])
        err2 = np.einsum("e,eq,eq->", TWO_PI * system.ed.area,
                         QW[None, :] * system.ed.rho_q, (Tq - ex_q) ** 2)
        err = math.sqrt(err2)
        h = (rho1 - rho0) / (n0 * 2 ** lev)
        rate = math.log2(prev_err / err) if prev_err else float("nan")
        rows.append({"level": lev, "h": h, "n_elems": msh.num_triangles,
                     "l2_error": err, "rate": rate})
        prev_err = err
        if lev < levels - 1:
            msh = meshmod.refine_uniform(msh)
    return rows
