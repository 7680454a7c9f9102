"""Axisymmetric magnetoquasistatic solver with homogenized foil windings.

The magnetic vector potential has a single azimuthal component; the nodal
unknown is the scaled potential p = rho * A_phi, which makes the operator
kernel (constant p) exactly representable and keeps all integrands at worst
1/rho. Flux components are B_rho = -dz(p)/rho and B_z = drho(p)/rho; in a
radially stacked foil winding the dz-term of the stiffness therefore sees
the across-stack reluctivity and the drho-term the in-plane one (see
docs/anisotropic_operator.md for the derivation).

The assembled blocks couple the field to one voltage-function unknown set
per foil-like winding and enforce the turn-current condition:

    K a + M da/dt - X u  = s*i_w + q
    -X^T da/dt + G u     = c*I
    V = c^T u

Solid (resolved) turns reuse the same block structure with one constant
voltage unknown per turn and unit coupling weights; stranded windings
contribute a uniform current-density vector and a series resistance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ._fem import QP, QW, ElementData, assemble_csr
from .foil_winding import FoilWindingSpec, VoltageBasis, build_voltage_basis, coupling_vector
from .materials import MaterialSpec

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class StrandedWindingSpec:
    """Wire winding with prescribed uniform current density; no eddy currents."""

    region: str
    turns: int
    fill_factor: float
    conductor: MaterialSpec
    insulator: MaterialSpec

    def __post_init__(self):
        if self.turns < 1:
            raise ValueError("stranded winding needs at least one turn")
        if not 0.0 < self.fill_factor <= 1.0:
            raise ValueError("fill_factor must be in (0, 1]")


@dataclass(frozen=True)
class ResolvedWindingSpec:
    """Series-connected solid turns, each meshed as its own region."""

    turn_regions: tuple[str, ...]
    conductor: MaterialSpec

    @property
    def turns(self) -> int:
        return len(self.turn_regions)


@dataclass(frozen=True)
class CircuitSpec:
    """Source-R1-primary loop and secondary-R2 loop, sinusoidal source."""

    V_s: float
    R1: float
    R2: float

    def __post_init__(self):
        if self.R1 < 0 or self.R2 < 0:
            raise ValueError("circuit resistances must be >= 0")


class _UWinding:
    """Precomputed assembly factors of one voltage-function winding."""

    def __init__(self, ed: ElementData, elems: np.ndarray, xi_q: np.ndarray,
                 c: np.ndarray, basis: VoltageBasis | None, label: str):
        self.elems = elems
        self.xi_q = xi_q          # (m_w, 3 qp, n_u)
        self.c = c
        self.basis = basis
        self.label = label
        self.n_u = len(c)
        area = ed.area[elems]
        inv_rho = QW[None, :] / ed.rho_q[elems]           # (m_w, 3)
        # XW[e, i, j] = A_e sum_q w_q v_i(q) xi_j(q) / rho_q
        self.XW = np.einsum("e,eq,qi,eqj->eij", area, inv_rho, QP, xi_q)
        # GW[e, j, k] = A_e/(2 pi) sum_q w_q xi_j(q) xi_k(q) / rho_q
        self.GW = np.einsum("e,eq,eqj,eqk->ejk", area / TWO_PI, inv_rho, xi_q, xi_q)


@dataclass
class WindingBlock:
    """Assembled coupling blocks of one voltage-function winding."""

    X: sp.csr_matrix        # (n_nodes, n_u)
    G: np.ndarray           # (n_u, n_u)
    c: np.ndarray           # (n_u,)
    basis: VoltageBasis | None
    elems: np.ndarray
    xi_q: np.ndarray
    label: str


@dataclass
class StrandedBlock:
    """Assembled data of one stranded winding."""

    s: np.ndarray           # (n_nodes,) flux-linkage / source vector
    R: float                # series DC resistance at the current temperatures
    elems: np.ndarray
    turns: int
    area: float
    fill_factor: float
    sigma_e: np.ndarray     # per-element wire conductivity
    label: str


@dataclass
class MagneticSystem:
    mesh: object
    ed: ElementData
    K: sp.csr_matrix
    M: sp.csr_matrix
    windings: list[WindingBlock]
    stranded: list[StrandedBlock]
    free: np.ndarray
    fixed: np.ndarray
    sigma_phi: np.ndarray   # per-element azimuthal conductivity used in M, X, G

    @property
    def num_nodes(self) -> int:
        return self.mesh.num_nodes


@dataclass
class MagneticState:
    """Field and terminal quantities of one magnetic solution.

    ``p`` holds the scaled potential rho*A_phi at the nodes. In frequency
    mode the arrays are complex peak phasors and ``omega`` is set; in time
    mode ``p_prev`` and ``dt`` carry the backward difference of the stepper.
    """

    p: np.ndarray
    u: list[np.ndarray]
    i: list
    v: list
    omega: float | None = None
    t: float = 0.0
    p_prev: np.ndarray | None = None
    dt: float | None = None

    def da(self) -> np.ndarray:
        """Time derivative of p consistent with the producing solve."""
        if self.omega is not None:
            return 1j * self.omega * self.p
        if self.p_prev is None or self.dt is None:
            return np.zeros_like(self.p)
        return (self.p - self.p_prev) / self.dt

    def a_phi(self, mesh) -> np.ndarray:
        """Nodal A_phi = p / rho (zero on the axis)."""
        rho = mesh.nodes[:, 0]
        out = np.zeros_like(self.p)
        nz = rho > 0
        out[nz] = self.p[nz] / rho[nz]
        return out


class MagneticAssembler:
    """Precomputes geometry factors; reassembles conductivity blocks cheaply.

    ``region_props`` maps region names to a MaterialSpec (isotropic) or to
    HomogenizedTensors (foil regions, radially stacked). Conductivities may
    carry a temperature model; ``assemble`` evaluates them at the supplied
    per-element temperatures.
    """

    def __init__(self, mesh, region_props: dict,
                 foil_windings: list[FoilWindingSpec] = (),
                 stranded_windings: list[StrandedWindingSpec] = (),
                 resolved_windings: list[ResolvedWindingSpec] = (),
                 dirichlet: tuple[str, ...] = ("axis", "outer")):
        self.mesh = mesh
        self.ed = ElementData(mesh)
        ed = self.ed
        m = ed.num_elements
        tags = mesh.triangle_tags

        nu_rho = np.empty(m)
        nu_z = np.empty(m)
        self._sig_ref = np.zeros(m)
        self._alpha = np.zeros(m)
        self._Tref = np.full(m, 293.15)
        self._sig_const = np.zeros(m)

        seen = np.zeros(m, dtype=bool)
        foil_by_region = {w.region: w for w in foil_windings}
        stranded_regions = {w.region for w in stranded_windings}

        for name, props in region_props.items():
            sel = tags == mesh.region_id(name)
            if not np.any(sel):
                continue
            seen |= sel
            if hasattr(props, "nu_perp"):   # homogenized layered tensors
                nu_rho[sel] = props.nu_perp
                nu_z[sel] = props.nu_par
            else:
                nu_rho[sel] = props.nu
                nu_z[sel] = props.nu
            if name in stranded_regions:
                continue                     # eddy currents disregarded there
            if name in foil_by_region:
                w = foil_by_region[name]
                ff = w.fill_factor
                self._sig_const[sel] = (1.0 - ff) * w.insulator.sigma
                mdl = w.conductor.temperature_model
                if mdl is None:
                    self._sig_const[sel] += ff * w.conductor.sigma
                else:
                    self._sig_ref[sel] = ff * mdl.sigma_ref
                    self._alpha[sel] = mdl.alpha_ref
                    self._Tref[sel] = mdl.T_ref
            else:
                mdl = getattr(props, "temperature_model", None)
                if mdl is None:
                    self._sig_const[sel] = getattr(props, "sigma", 0.0)
                else:
                    self._sig_ref[sel] = mdl.sigma_ref
                    self._alpha[sel] = mdl.alpha_ref
                    self._Tref[sel] = mdl.T_ref
        if not np.all(seen):
            missing = set(np.unique(tags[~seen]))
            names = [mesh.region_names.get(int(t), str(t)) for t in missing]
            raise ValueError(f"regions without material assignment: {sorted(names)}")

        # stiffness is temperature independent
        g = ed.grad
        w_el = TWO_PI * ed.area * ed.w_over_rho
        ke = ((w_el * nu_rho)[:, None, None]
              * np.einsum("mi,mj->mij", g[:, :, 1], g[:, :, 1])
              + (w_el * nu_z)[:, None, None]
              * np.einsum("mi,mj->mij", g[:, :, 0], g[:, :, 0]))
        self.K = assemble_csr(ke, ed.tris, mesh.num_nodes)

        # sigma-mass pattern: A_e sum_q w_q v_i v_j / rho_q
        inv_rho = QW[None, :] / ed.rho_q
        self._W2 = np.einsum("e,eq,qi,qj->eij", ed.area, inv_rho, QP, QP)

        self._uw: list[_UWinding] = []
        for spec in foil_windings:
            elems = mesh.triangles_in(spec.region)
            if len(elems) == 0:
                raise ValueError(f"foil winding region {spec.region!r} has no elements")
            basis = build_voltage_basis(spec)
            xi_q = basis.eval(ed.rho_q[elems])
            c = coupling_vector(basis, spec)
            self._uw.append(_UWinding(ed, elems, xi_q, c, basis, spec.region))

        for spec in resolved_windings:
            elems_list = [mesh.triangles_in(r) for r in spec.turn_regions]
            for r, el in zip(spec.turn_regions, elems_list):
                if _columns_across(mesh, el) < 2:
                    raise ValueError(
                        f"turn region {r!r} has fewer than 2 elements across")
            elems = np.concatenate(elems_list)
            xi_q = np.zeros((len(elems), 3, spec.turns))
            start = 0
            for j, el in enumerate(elems_list):
                xi_q[start:start + len(el), :, j] = 1.0
                start += len(el)
            self._uw.append(_UWinding(ed, elems, xi_q, np.ones(spec.turns),
                                      None, "resolved"))

        self._stranded: list[StrandedWindingSpec] = list(stranded_windings)
        self._stranded_cache = []
        for spec in self._stranded:
            elems = mesh.triangles_in(spec.region)
            area = float(ed.area[elems].sum())
            if len(elems) == 0 or area <= 0:
                raise ValueError(f"stranded winding region {spec.region!r} is empty")
            dens = TWO_PI * spec.turns / area
            s = np.zeros(mesh.num_nodes)
            np.add.at(s, ed.tris[elems].ravel(),
                      np.repeat(dens * ed.area[elems] / 3.0, 3))
            vol_e = TWO_PI * ed.w_rho[elems] * ed.area[elems]
            self._stranded_cache.append((elems, area, s, vol_e))

        fixed = set()
        for name in dirichlet:
            try:
                fixed.update(mesh.boundary_nodes(name).tolist())
            except KeyError:
                pass
        self.fixed = np.array(sorted(fixed), dtype=np.int64)
        mask = np.ones(mesh.num_nodes, dtype=bool)
        mask[self.fixed] = False
        self.free = np.nonzero(mask)[0]

    def sigma_at(self, T_elements: np.ndarray | None = None) -> np.ndarray:
        """Azimuthal conductivity per element at the given temperatures."""
        if T_elements is None:
            return self._sig_const + self._sig_ref
        denom = 1.0 + self._alpha * (T_elements - self._Tref)
        if np.any(denom <= 0):
            raise ValueError("temperature below validity of the conductivity model")
        return self._sig_const + self._sig_ref / denom

    def assemble(self, T_elements: np.ndarray | None = None) -> MagneticSystem:
        sigma = self.sigma_at(T_elements)
        n = self.mesh.num_nodes
        M = assemble_csr(TWO_PI * sigma[:, None, None] * self._W2, self.ed.tris, n)

        windings = []
        for uw in self._uw:
            sig_w = sigma[uw.elems]
            xw = sig_w[:, None, None] * uw.XW
            rows = np.repeat(self.ed.tris[uw.elems], uw.n_u, axis=1).ravel()
            cols = np.tile(np.arange(uw.n_u), 3 * len(uw.elems))
            X = sp.coo_matrix((xw.ravel(), (rows, cols)), shape=(n, uw.n_u)).tocsr()
            G = np.einsum("e,ejk->jk", sig_w, uw.GW)
            windings.append(WindingBlock(X=X, G=G, c=uw.c, basis=uw.basis,
                                         elems=uw.elems, xi_q=uw.xi_q, label=uw.label))

        stranded = []
        for spec, (elems, area, s, vol_e) in zip(self._stranded, self._stranded_cache):
            mdl = spec.conductor.temperature_model
            if mdl is not None and T_elements is not None:
                sig_e = mdl.sigma_ref / (1.0 + mdl.alpha_ref
                                         * (T_elements[elems] - mdl.T_ref))
            elif mdl is not None:
                sig_e = np.full(len(elems), mdl.sigma_ref)
            else:
                sig_e = np.full(len(elems), spec.conductor.sigma)
            if np.any(sig_e <= 0):
                raise ValueError("stranded winding conductor must conduct")
            R = float(((spec.turns / area) ** 2 / spec.fill_factor
                       * vol_e / sig_e).sum())
            stranded.append(StrandedBlock(s=s, R=R, elems=elems, turns=spec.turns,
                                          area=area, fill_factor=spec.fill_factor,
                                          sigma_e=sig_e, label=spec.region))

        return MagneticSystem(mesh=self.mesh, ed=self.ed, K=self.K, M=M,
                              windings=windings, stranded=stranded,
                              free=self.free, fixed=self.fixed, sigma_phi=sigma)


def _columns_across(mesh, elems: np.ndarray) -> int:
    mins = mesh.nodes[mesh.triangles[elems], 0].min(axis=1)
    return len(np.unique(np.round(mins, 12)))


def _restrict(system: MagneticSystem):
    f = system.free
    K = system.K[f][:, f]
    M = system.M[f][:, f]
    Xs = [w.X[f] for w in system.windings]
    ss = [b.s[f] for b in system.stranded]
    return K, M, Xs, ss


def _expand(system: MagneticSystem, af: np.ndarray) -> np.ndarray:
    p = np.zeros(system.num_nodes, dtype=af.dtype)
    p[system.free] = af
    return p


def _solve_block(blocks, rhs, what: str):
    A = sp.bmat(blocks, format="csc")
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        raise RuntimeError(f"singular {what}: {exc}") from exc
    return lu.solve(rhs)


def solve_frequency(system: MagneticSystem, omega: float, drive: dict) -> MagneticState:
    """One complex frequency-domain solve with peak-value phasors.

    ``drive`` is either {"kind": "current", "I": amplitude} applied to the
    single voltage-function winding, or {"kind": "circuit", "circuit":
    CircuitSpec} for the source-fed primary with a resistively loaded
    stranded secondary. omega = 0 gives the DC limit.
    """
    K, M, Xs, ss = _restrict(system)
    A0 = (K + 1j * omega * M).tocsr()
    na = A0.shape[0]

    if drive["kind"] == "current":
        if len(system.windings) != 1:
            raise ValueError("current drive expects exactly one voltage-function winding")
        w = system.windings[0]
        X = Xs[0]
        current = complex(drive["I"])
        blocks = [[A0, -X],
                  [-1j * omega * X.T, sp.csr_matrix(w.G)]]
        rhs = np.concatenate([np.zeros(na, dtype=complex), w.c * current])
        sol = _solve_block(blocks, rhs, "frequency-domain system")
        p = _expand(system, sol[:na])
        u = sol[na:]
        return MagneticState(p=p, u=[u], i=[current], v=[w.c @ u], omega=omega)

    if drive["kind"] == "circuit":
        cir: CircuitSpec = drive["circuit"]
        if len(system.windings) != 1 or len(system.stranded) != 1:
            raise ValueError("circuit drive expects one foil and one stranded winding")
        w = system.windings[0]
        b = system.stranded[0]
        X = Xs[0]
        s_col = sp.csr_matrix(ss[0][:, None])
        s_row = sp.csr_matrix(ss[0][None, :])
        blocks = [
            [A0, -X, None, -s_col],
            [-1j * omega * X.T, sp.csr_matrix(w.G), sp.csr_matrix(-w.c[:, None]), None],
            [None, sp.csr_matrix(w.c[None, :]), sp.csr_matrix([[cir.R1]]), None],
            [1j * omega * s_row, None, None, sp.csr_matrix([[b.R + cir.R2]])],
        ]
        nu = len(w.c)
        rhs = np.zeros(na + nu + 2, dtype=complex)
        rhs[na + nu] = cir.V_s
        sol = _solve_block(blocks, rhs, "field-circuit system")
        p = _expand(system, sol[:na])
        u = sol[na:na + nu]
        i1 = sol[na + nu]
        i2 = sol[na + nu + 1]
        v1 = w.c @ u
        v2 = 1j * omega * (ss[0] @ sol[:na]) + b.R * i2
        return MagneticState(p=p, u=[u], i=[i1, i2], v=[v1, v2], omega=omega)

    raise ValueError(f"unknown drive kind {drive['kind']!r}")


class TimeStepper:
    """Backward-Euler stepper with a reusable factorization.

    The step matrix stays valid while the conductivities and dt are frozen,
    which is exactly the situation inside one coupling window.
    """

    def __init__(self, system: MagneticSystem, dt: float, drive: dict):
        self.system = system
        self.dt = dt
        self.drive = drive
        K, M, Xs, ss = _restrict(system)
        self._Mf = M
        w = system.windings[0] if system.windings else None
        if drive["kind"] == "current":
            if len(system.windings) != 1:
                raise ValueError("current drive expects exactly one voltage-function winding")
            self._X = Xs[0]
            blocks = [[(K + M / dt).tocsr(), -self._X],
                      [-self._X.T / dt, sp.csr_matrix(w.G)]]
        elif drive["kind"] == "circuit":
            cir: CircuitSpec = drive["circuit"]
            if len(system.windings) != 1 or len(system.stranded) != 1:
                raise ValueError("circuit drive expects one foil and one stranded winding")
            b = system.stranded[0]
            self._X = Xs[0]
            self._sf = ss[0]
            s_col = sp.csr_matrix(self._sf[:, None])
            s_row = sp.csr_matrix(self._sf[None, :])
            blocks = [
                [(K + M / dt).tocsr(), -self._X, None, -s_col],
                [-self._X.T / dt, sp.csr_matrix(w.G), sp.csr_matrix(-w.c[:, None]), None],
                [None, sp.csr_matrix(w.c[None, :]), sp.csr_matrix([[cir.R1]]), None],
                [s_row / dt, None, None, sp.csr_matrix([[b.R + cir.R2]])],
            ]
        else:
            raise ValueError(f"unknown drive kind {drive['kind']!r}")
        A = sp.bmat(blocks, format="csc")
        try:
            self._lu = spla.splu(A)
        except RuntimeError as exc:
            raise RuntimeError(f"singular time-step matrix: {exc}") from exc

    def step(self, state: MagneticState, waveform) -> MagneticState:
        """Advance one dt; ``waveform(t_new)`` gives I(t) or V_s(t)."""
        system = self.system
        dt = self.dt
        t_new = state.t + dt
        af = state.p[system.free]
        w = system.windings[0]
        if self.drive["kind"] == "current":
            current = waveform(t_new)
            rhs = np.concatenate([self._Mf @ af / dt,
                                  -self._X.T @ af / dt + w.c * current])
            sol = self._lu.solve(rhs)
            na = len(af)
            p = _expand(system, sol[:na])
            u = sol[na:]
            return MagneticState(p=p, u=[u], i=[current], v=[w.c @ u],
                                 t=t_new, p_prev=state.p, dt=dt)
        b = system.stranded[0]
        na = len(af)
        nu = len(w.c)
        rhs = np.concatenate([self._Mf @ af / dt,
                              -self._X.T @ af / dt,
                              [waveform(t_new)],
                              [self._sf @ af / dt]])
        sol = self._lu.solve(rhs)
        p = _expand(system, sol[:na])
        u = sol[na:na + nu]
        i1 = sol[na + nu]
        i2 = sol[na + nu + 1]
        v1 = w.c @ u
        v2 = (b.s @ p - b.s @ state.p) / dt + b.R * i2
        return MagneticState(p=p, u=[u], i=[i1, i2], v=[v1, v2],
                             t=t_new, p_prev=state.p, dt=dt)


def step_time(system: MagneticSystem, state: MagneticState, dt: float,
              drive: dict, waveform) -> MagneticState:
    """Single implicit step; convenience wrapper around TimeStepper."""
    return TimeStepper(system, dt, drive).step(state, waveform)


def initial_state(system: MagneticSystem) -> MagneticState:
    nw = len(system.windings) + len(system.stranded)
    return MagneticState(p=np.zeros(system.num_nodes),
                         u=[np.zeros(len(w.c)) for w in system.windings],
                         i=[0.0] * nw, v=[0.0] * nw, t=0.0)


def source_vector(system: MagneticSystem, current_density: dict) -> np.ndarray:
    """Load vector of a prescribed azimuthal source current density.

    ``current_density`` maps region names to J_phi in A/m^2. Unused by the
    shipped decks (all excitation enters through windings or the circuit)
    but part of the assembly contract.
    """
    ed = system.ed
    mesh = system.mesh
    J_e = np.zeros(ed.num_elements)
    for name, J in current_density.items():
        J_e[mesh.triangles_in(name)] = J
    q = np.zeros(system.num_nodes)
    np.add.at(q, ed.tris.ravel(), np.repeat(TWO_PI * J_e * ed.area / 3.0, 3))
    return q


def assemble_stranded(mesh, spec: StrandedWindingSpec):
    """Coupling vector and DC resistance of a stranded winding alone."""
    props = {name: MaterialSpec(sigma=0.0) for name in mesh.region_names.values()}
    asm = MagneticAssembler(mesh, props, stranded_windings=[spec], dirichlet=())
    system = asm.assemble()
    blk = system.stranded[0]
    return blk.s, blk.R


def solve_resolved_reference(mesh, spec: ResolvedWindingSpec, omega: float,
                             current: float, region_props: dict | None = None):
    """Frequency solve with each turn resolved as a solid conductor.

    All turns are constrained to carry the terminal current; the winding
    voltage is the sum of the per-turn voltages. Returns (state, system).
    """
    if region_props is None:
        region_props = {}
        for name in mesh.region_names.values():
            if name in spec.turn_regions:
                region_props[name] = spec.conductor
            else:
                region_props[name] = MaterialSpec(sigma=0.0)
    asm = MagneticAssembler(mesh, region_props, resolved_windings=[spec])
    system = asm.assemble()
    state = solve_frequency(system, omega, {"kind": "current", "I": current})
    return state, system


def magnetic_energy(system: MagneticSystem, state: MagneticState) -> float:
    """Field energy 0.5 * p K p (time-domain states)."""
    p = state.p
    return 0.5 * float(np.real(np.conj(p) @ (system.K @ p)))


def input_power_harmonic(state: MagneticState) -> float:
    """Active power fed into all windings, peak-value convention."""
    return float(sum(0.5 * np.real(v * np.conj(i)) for v, i in zip(state.v, state.i)))
