"""Orchestration: from a validated deck to a finished coupled run.

Builds the mesh and both solvers from a ProblemConfig, executes the weak
coupling loop and writes the deterministic output set (resolved deck echo,
history CSV, field snapshots, summary report). Also hosts the mesh/model
variants used by the resolved-versus-homogenized convergence study.
"""
from __future__ import annotations

import dataclasses
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import coupling, mesh as meshmod, mqs, post, thermal
from .config import ProblemConfig, kelvin_to_celsius
from .materials import homogenize
from .mesh import RegionRect


@dataclass
class RunReport:
    name: str
    end_time_s: float
    thermal_steps: int
    magnetic_solves: int
    total_losses_W: float
    internal_energy_J: float
    T_min_C: float
    T_max_C: float
    winding_mean_T_C: dict[str, float]
    wall_time_s: float
    output_dir: str

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def build_mesh(cfg: ProblemConfig) -> meshmod.Mesh:
    msh = meshmod.generate(cfg.regions, cfg.mesh_h, background=cfg.background,
                           domain=cfg.domain)
    msh.validate()
    return msh


def magnetic_region_props(cfg: ProblemConfig) -> dict:
    props = dict(cfg.materials)
    for w in cfg.foil_windings:
        props[w.region] = homogenize(w.conductor, w.insulator, w.fill_factor)
    for w in cfg.stranded_windings:
        props[w.region] = homogenize(w.conductor, w.insulator, w.fill_factor)
    return props


def thermal_region_props(cfg: ProblemConfig) -> dict:
    """Thermal tensors per region.

    Foil windings conduct well along the foil (axially) and poorly across
    the radial stack. In a wire winding both in-plane directions cross
    insulation, so the transverse (harmonic) conductivity is used for both.
    """
    props = dict(cfg.materials)
    for w in cfg.foil_windings:
        props[w.region] = homogenize(w.conductor, w.insulator, w.fill_factor)
    for w in cfg.stranded_windings:
        hom = homogenize(w.conductor, w.insulator, w.fill_factor)
        props[w.region] = dataclasses.replace(hom, lam_par=hom.lam_perp)
    return props


def _drive_and_waveform(cfg: ProblemConfig):
    omega = cfg.omega
    if cfg.drive.kind == "current":
        amp = cfg.drive.amplitude
        return ({"kind": "current", "I": amp},
                lambda t: amp * math.cos(omega * t))
    cir = cfg.drive.circuit
    return ({"kind": "circuit", "circuit": cir},
            lambda t: cir.V_s * math.cos(omega * t))


def coupling_options(cfg: ProblemConfig) -> coupling.CouplingOptions:
    drive, waveform = _drive_and_waveform(cfg)
    return coupling.CouplingOptions(
        mode=cfg.magnetic_mode, frequency=cfg.drive.frequency, drive=drive,
        dt_initial=cfg.dt_initial, dt_max=cfg.dt_max, end_time=cfg.end_time,
        T_ambient=cfg.T_ambient, steps_per_period=cfg.steps_per_period,
        periods_per_window=cfg.periods_per_window,
        adapt_threshold=cfg.adapt_threshold, waveform=waveform)


def build_problem(cfg: ProblemConfig):
    """Mesh, magnetic assembler, thermal system, options and probe data."""
    msh = build_mesh(cfg)
    for w in cfg.foil_windings:
        w.check_assumptions(cfg.drive.frequency)
    assembler = mqs.MagneticAssembler(
        msh, magnetic_region_props(cfg),
        foil_windings=cfg.foil_windings,
        stranded_windings=cfg.stranded_windings)
    tsystem = thermal.assemble(msh, thermal_region_props(cfg), cfg.thermal_bcs,
                               cfg.T_ambient)
    probes = post.locate_probes(msh, cfg.probes)
    return msh, assembler, tsystem, coupling_options(cfg), probes


def region_mean_temperature(tsystem: thermal.ThermalSystem, msh,
                            T: np.ndarray, region: str) -> float:
    ed = tsystem.ed
    elems = msh.triangles_in(region)
    from ._fem import QW, interp_at_quad
    Tq = interp_at_quad(T, ed.tris[elems])
    w = (QW[None, :] * ed.rho_q[elems])
    vol = 2.0 * math.pi * (ed.area[elems] * w.sum(axis=1))
    mean = 2.0 * math.pi * (ed.area[elems] * np.einsum("eq,eq->e", w, Tq))
    return float(mean.sum() / vol.sum())


def run(cfg: ProblemConfig, out_dir=None) -> RunReport:
    """Execute the deck end to end and write all outputs."""
    t0 = time.perf_counter()
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    msh, assembler, tsystem, options, probes = build_problem(cfg)

    with open(out / "resolved_config.json", "w") as f:
        json.dump(cfg.to_dict(), f, indent=2)
        f.write("\n")

    snapshot = None
    if cfg.snapshot_every > 0:
        snap_dir = out / "snapshots"
        snap_dir.mkdir(exist_ok=True)

        def snapshot(step, t, T, h_e, state):
            if step % cfg.snapshot_every:
                return
            _write_fields_vtk(snap_dir / f"step_{step:06d}.vtk", msh, T, h_e, state)

    history = coupling.run_weak_coupling(assembler, tsystem, options,
                                         probes=probes, snapshot=snapshot)

    post.write_history_csv(out / "history.csv", history)
    _write_fields_vtk(out / "fields.vtk", msh, history.thermal_final.T,
                      history.losses_final, history.magnetic_final)

    T = history.thermal_final.T
    winding_means = {}
    for w in list(cfg.foil_windings) + list(cfg.stranded_windings):
        winding_means[w.region] = kelvin_to_celsius(
            region_mean_temperature(tsystem, msh, T, w.region))

    report = RunReport(
        name=cfg.name,
        end_time_s=history.thermal_final.t,
        thermal_steps=history.thermal_steps,
        magnetic_solves=history.magnetic_solves,
        total_losses_W=history.rows[-1][history.columns.index("P_total_W")],
        internal_energy_J=thermal.internal_energy(tsystem, T),
        T_min_C=kelvin_to_celsius(float(T.min())),
        T_max_C=kelvin_to_celsius(float(T.max())),
        winding_mean_T_C=winding_means,
        wall_time_s=time.perf_counter() - t0,
        output_dir=str(out))
    with open(out / "report.json", "w") as f:
        json.dump(report.to_dict(), f, indent=2)
        f.write("\n")
    return report


def _write_fields_vtk(path, msh, T, h_e, state) -> None:
    point_data = {"T_K": T}
    if state is not None:
        a = state.a_phi(msh)
        if np.iscomplexobj(a):
            point_data["A_phi_re"] = a.real
            point_data["A_phi_im"] = a.imag
        else:
            point_data["A_phi"] = a
    cell_data = {}
    if h_e is not None:
        cell_data["loss_density_W_m3"] = h_e
    post.export_vtk(msh, path, point_data=point_data, cell_data=cell_data)


def resolved_layout(cfg: ProblemConfig):
    """Per-turn rectangles replacing the homogenized foil winding region.

    Each turn is split into a centered conductor strip and two insulation
    half-strips; the strips carry local mesh sizes so even a coarse global
    target resolves every conductor with two elements across.
    """
    if len(cfg.foil_windings) != 1:
        raise ValueError("the resolved layout needs exactly one foil winding")
    w = cfg.foil_windings[0]
    b = w.turn_width
    b_c = w.conductor_width
    b_i = w.insulator_width
    regions = [r for r in cfg.regions if r.tag != w.region]
    turn_tags = []
    for k in range(w.turns):
        left = w.rho[0] + k * b
        tag = f"turn_{k:03d}"
        turn_tags.append(tag)
        if b_i > 0:
            regions.append(RegionRect("foil_ins", (left, left + b_i / 2), w.z,
                                      h=(b_i / 2, None)))
            regions.append(RegionRect("foil_ins",
                                      (left + b_i / 2 + b_c, left + b), w.z,
                                      h=(b_i / 2, None)))
        regions.append(RegionRect(tag, (left + b_i / 2, left + b_i / 2 + b_c),
                                  w.z, h=(b_c / 2, None)))
    return regions, tuple(turn_tags), w


def run_study_variant(cfg: ProblemConfig, variant: str, level: int) -> dict:
    """One leg of the convergence study at the given refinement level.

    variant "homogenized" runs the deck on an independently generated mesh
    with target size cfg.mesh_h / 2**level; "resolved" meshes every turn as
    a solid conductor at the base size and refines ``level`` times (the
    strips keep their local sizes, so refinement is the cheapest way to
    tighten an already layer-resolving mesh). Returns the final internal
    energy and the element count.
    """
    if cfg.drive.kind != "current":
        raise ValueError("the convergence study needs a current-driven deck")

    if variant == "homogenized":
        cfg = dataclasses.replace(cfg, mesh_h=cfg.mesh_h / 2 ** level)
        msh = build_mesh(cfg)
        assembler = mqs.MagneticAssembler(msh, magnetic_region_props(cfg),
                                          foil_windings=cfg.foil_windings)
        tprops = thermal_region_props(cfg)
    elif variant == "resolved":
        regions, turn_tags, w = resolved_layout(cfg)
        msh = meshmod.generate(regions, cfg.mesh_h, background=cfg.background,
                               domain=cfg.domain)
        for _ in range(level):
            msh = meshmod.refine_uniform(msh)
        spec = mqs.ResolvedWindingSpec(turn_regions=turn_tags,
                                       conductor=w.conductor)
        mprops = dict(cfg.materials)
        tprops = dict(cfg.materials)
        for tag in turn_tags:
            mprops[tag] = w.conductor
            tprops[tag] = w.conductor
        if w.insulator_width > 0:
            mprops["foil_ins"] = w.insulator
            tprops["foil_ins"] = w.insulator
        assembler = mqs.MagneticAssembler(msh, mprops, resolved_windings=[spec])
    else:
        raise ValueError(f"unknown study variant {variant!r}")

    tsystem = thermal.assemble(msh, tprops, cfg.thermal_bcs, cfg.T_ambient)
    history = coupling.run_weak_coupling(assembler, tsystem,
                                         coupling_options(cfg))
    return {"U": thermal.internal_energy(tsystem, history.thermal_final.T),
            "n_elems": msh.num_triangles,
            "history": history}
