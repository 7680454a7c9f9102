"""Weak magneto-thermal coupling.

One coupling iteration freezes the temperature, reassembles the
conductivity-dependent magnetic blocks, runs a magnetic window (a single
complex solve in harmonic mode, a few periods of time stepping otherwise),
averages the Joule losses per element over the window, advances the thermal
problem by one macro step with those losses as source, and finally grows
the macro step when the temperature field has nearly settled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._fem import QP, QW
from . import mqs, thermal

TWO_PI = 2.0 * math.pi


def _field_quantity_at_quad(system: mqs.MagneticSystem, da: np.ndarray,
                            u: list[np.ndarray]) -> np.ndarray:
    """Azimuthal electric field (-dA/dt + u*chi) at all quadrature points."""
    ed = system.ed
    da_q = np.einsum("qi,mi->mq", QP, da[ed.tris])
    e_q = -da_q.astype(complex if np.iscomplexobj(da) else float)
    for w, uw in zip(system.windings, u):
        u_q = np.einsum("eqj,j->eq", w.xi_q, uw)
        e_q[w.elems] = e_q[w.elems] + u_q / TWO_PI
    return e_q / ed.rho_q


def losses_harmonic(system: mqs.MagneticSystem, state: mqs.MagneticState) -> np.ndarray:
    """Element-averaged Joule loss density (W/m^3), peak-value phasors.

    h = 0.5 * sigma * |(-j omega A + u chi)|^2, volume-averaged per element;
    stranded windings dissipate their series-resistance losses uniformly.
    """
    if state.omega is None:
        raise ValueError("losses_harmonic needs a frequency-domain state")
    ed = system.ed
    e_q = _field_quantity_at_quad(system, state.da(), state.u)
    h_q = 0.5 * system.sigma_phi[:, None] * np.abs(e_q) ** 2
    h_e = np.einsum("eq,eq->e", QW[None, :] * ed.rho_q, h_q) / ed.w_rho
    for k, b in enumerate(system.stranded):
        i2 = state.i[len(system.windings) + k]
        mean_sq = 0.5 * abs(i2) ** 2
        h_e[b.elems] = (b.turns / b.area) ** 2 * mean_sq / (b.fill_factor * b.sigma_e)
    return h_e


def losses_time_domain(system: mqs.MagneticSystem,
                       states: list[mqs.MagneticState]) -> np.ndarray:
    """Joule loss density averaged over a window of time-domain states.

    Every state must carry the backward difference of its producing step;
    the window should span at least one full period of the excitation.
    """
    if not states:
        raise ValueError("loss averaging needs at least one magnetic step")
    for s in states:
        if s.p_prev is None or s.dt is None:
            raise ValueError("time-domain loss averaging needs stepped states")
    ed = system.ed
    acc = np.zeros(ed.num_elements)
    for s in states:
        e_q = _field_quantity_at_quad(system, s.da(), s.u)
        h_q = system.sigma_phi[:, None] * e_q ** 2
        acc += np.einsum("eq,eq->e", QW[None, :] * ed.rho_q, h_q) / ed.w_rho
    h_e = acc / len(states)
    for k, b in enumerate(system.stranded):
        mean_sq = sum(s.i[len(system.windings) + k] ** 2 for s in states) / len(states)
        h_e[b.elems] = (b.turns / b.area) ** 2 * mean_sq / (b.fill_factor * b.sigma_e)
    return h_e


def total_losses(system: mqs.MagneticSystem, h_e: np.ndarray) -> float:
    """Volume integral of the loss density, W."""
    vol = TWO_PI * system.ed.w_rho * system.ed.area
    return float(h_e @ vol)


def adapt_macro_step(dT_max: float, dt_current: float, dt_initial: float,
                     dt_max: float, threshold: float = 0.5) -> float:
    """Double the thermal macro step once the per-step change is small.

    The step grows (never shrinks) when the largest nodal temperature change
    of the last step fell below ``threshold``; it is capped at dt_max and
    floored at dt_initial.
    """
    dt = dt_current
    if dT_max < threshold:
        dt = min(2.0 * dt, dt_max)
    return min(max(dt, dt_initial), dt_max)


@dataclass
class CouplingOptions:
    mode: str                      # "harmonic" | "time"
    frequency: float
    drive: dict                    # drive dict for the magnetic solves
    dt_initial: float
    dt_max: float
    end_time: float
    T_ambient: float
    steps_per_period: int = 200
    periods_per_window: int = 2
    adapt_threshold: float = 0.5
    waveform: object = None        # time mode: I(t) or V_s(t)

    def __post_init__(self):
        if self.mode not in ("harmonic", "time"):
            raise ValueError(f"unknown magnetic mode {self.mode!r}")
        if self.mode == "time" and self.waveform is None:
            raise ValueError("time mode needs an excitation waveform")


@dataclass
class CouplingHistory:
    columns: list[str]
    rows: list[list[float]] = field(default_factory=list)
    thermal_final: thermal.ThermalState = None
    magnetic_final: mqs.MagneticState = None
    losses_final: np.ndarray = None
    magnetic_solves: int = 0
    thermal_steps: int = 0

    def column(self, name: str) -> np.ndarray:
        k = self.columns.index(name)
        return np.array([row[k] for row in self.rows])


def run_weak_coupling(assembler: mqs.MagneticAssembler,
                      tsystem: thermal.ThermalSystem,
                      options: CouplingOptions,
                      probes: list = (),
                      snapshot=None) -> CouplingHistory:
    """Alternate magnetic windows and thermal macro steps until end_time.

    ``probes`` is a list of (label, tri_index, barycentric) triples sampled
    into the history; ``snapshot`` is an optional callback
    (step, t, T, h_e, state) invoked after each thermal step.
    """
    omega = TWO_PI * options.frequency
    n_w = len(assembler._uw) + len(assembler._stranded)
    columns = (["t_s", "dt_s", "P_total_W", "U_J", "T_min_K", "T_max_K"]
               + [f"T_{label}_K" for label, _, _ in probes])
    for k in range(n_w):
        columns += [f"i{k + 1}_re", f"i{k + 1}_im", f"v{k + 1}_re", f"v{k + 1}_im"]
    hist = CouplingHistory(columns=columns)

    mesh = assembler.mesh
    T = np.full(mesh.num_nodes, options.T_ambient)
    t = 0.0
    dt = options.dt_initial
    mg_state: mqs.MagneticState | None = None
    h_e = None
    step_idx = 0

    while t < options.end_time * (1.0 - 1e-12):
        dt = min(dt, options.end_time - t)
        T_e = T[mesh.triangles].mean(axis=1)
        try:
            msys = assembler.assemble(T_e)
            if options.mode == "harmonic":
                mg_state = mqs.solve_frequency(msys, omega, options.drive)
                h_e = losses_harmonic(msys, mg_state)
                hist.magnetic_solves += 1
            else:
                dt_mg = 1.0 / (options.frequency * options.steps_per_period)
                stepper = mqs.TimeStepper(msys, dt_mg, options.drive)
                if mg_state is None:
                    mg_state = mqs.initial_state(msys)
                window = []
                n_steps = options.steps_per_period * options.periods_per_window
                for k in range(n_steps):
                    mg_state = stepper.step(mg_state, options.waveform)
                    if k >= n_steps - options.steps_per_period:
                        window.append(mg_state)
                h_e = losses_time_domain(msys, window)
                hist.magnetic_solves += n_steps
            q = thermal.load_from_elements(tsystem, h_e)
            new_state = thermal.step(tsystem, thermal.ThermalState(T=T, t=t), dt, q)
        except Exception as exc:
            raise RuntimeError(
                f"coupled run failed at t = {t:.6g} s: {exc}") from exc

        dT_max = float(np.max(np.abs(new_state.T - T)))
        T = new_state.T
        t = new_state.t
        step_idx += 1
        hist.thermal_steps += 1

        row = [t, dt, total_losses(msys, h_e),
               thermal.internal_energy(tsystem, T),
               float(T.min()), float(T.max())]
        for _, tri, lam in probes:
            row.append(float(T[mesh.triangles[tri]] @ lam))
        for k in range(n_w):
            ik = complex(mg_state.i[k])
            vk = complex(mg_state.v[k])
            row += [ik.real, ik.imag, vk.real, vk.imag]
        hist.rows.append(row)

        if snapshot is not None:
            snapshot(step_idx, t, T, h_e, mg_state)

        dt = adapt_macro_step(dT_max, dt, options.dt_initial, options.dt_max,
                              options.adapt_threshold)

    hist.thermal_final = thermal.ThermalState(T=T, t=t)
    hist.magnetic_final = mg_state
    hist.losses_final = h_e
    return hist
