"""Declarative problem decks.

A deck is a single JSON file describing geometry, materials, windings,
drive, solver settings and outputs. Temperatures appear in the file in
degrees Celsius with an explicit ``_C`` key suffix and are converted to
kelvin on load; everything else is plain SI. ``load_config`` resolves all
defaults, so the echoed configuration re-fed as a deck reproduces the run.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .foil_winding import FoilWindingSpec
from .materials import MU0, MaterialSpec, TemperatureModel
from .mesh import RegionRect
from .mqs import CircuitSpec, StrandedWindingSpec
from .post import Probe
from .thermal import ThermalBC

KELVIN_OFFSET = 273.15


def celsius_to_kelvin(c: float) -> float:
    return c + KELVIN_OFFSET


def kelvin_to_celsius(k: float) -> float:
    return k - KELVIN_OFFSET


class DeckError(ValueError):
    """Invalid deck content; the message names the offending field."""


def _req(d: dict, key: str, path: str):
    if key not in d:
        raise DeckError(f"{path}.{key} is missing")
    return d[key]


def _num(d: dict, key: str, path: str, default=None, minimum=None,
         strict_min=None):
    if key not in d:
        if default is None:
            raise DeckError(f"{path}.{key} is missing")
        val = default
    else:
        val = d[key]
    try:
        val = float(val)
    except (TypeError, ValueError):
        raise DeckError(f"{path}.{key} must be a number") from None
    if minimum is not None and val < minimum:
        raise DeckError(f"{path}.{key} must be >= {minimum}")
    if strict_min is not None and val <= strict_min:
        raise DeckError(f"{path}.{key} must be > {strict_min}")
    return val


@dataclass
class DriveConfig:
    kind: str                       # "current" | "circuit"
    frequency: float
    amplitude: float = 0.0          # current amplitude for kind="current"
    circuit: CircuitSpec | None = None


@dataclass
class ProblemConfig:
    name: str
    mesh_h: float
    domain: tuple[tuple[float, float], tuple[float, float]]
    background: str | None
    regions: list[RegionRect]
    materials: dict[str, MaterialSpec]
    foil_windings: list[FoilWindingSpec]
    stranded_windings: list[StrandedWindingSpec]
    drive: DriveConfig
    magnetic_mode: str              # "harmonic" | "time"
    steps_per_period: int
    periods_per_window: int
    dt_initial: float
    dt_max: float
    end_time: float
    T_ambient: float                # K
    adapt_threshold: float
    thermal_bcs: dict[str, ThermalBC]
    probes: list[Probe] = field(default_factory=list)
    snapshot_every: int = 0
    output_dir: str = "out"

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.drive.frequency

    @property
    def dt_magnetic(self) -> float:
        return 1.0 / (self.drive.frequency * self.steps_per_period)

    def region_rect(self, tag: str) -> RegionRect:
        for r in self.regions:
            if r.tag == tag:
                return r
        raise DeckError(f"winding region {tag!r} not found in geometry.regions")

    def to_dict(self) -> dict:
        """Fully resolved deck; feeding it back reproduces the run."""
        def mat(m: MaterialSpec) -> dict:
            out = {"sigma": m.sigma, "mu_r": m.mu / MU0, "lambda": m.lam,
                   "c_v": m.c_v}
            if m.temperature_model is not None:
                out["alpha_per_K"] = m.temperature_model.alpha_ref
                out["T_ref_C"] = kelvin_to_celsius(m.temperature_model.T_ref)
            return out

        windings = []
        for w in self.foil_windings:
            windings.append({"kind": "foil", "region": w.region,
                             "turns": w.turns, "fill_factor": w.fill_factor,
                             "n_u": w.n_u, "conductor": mat(w.conductor),
                             "insulator": mat(w.insulator)})
        for w in self.stranded_windings:
            windings.append({"kind": "stranded", "region": w.region,
                             "turns": w.turns, "fill_factor": w.fill_factor,
                             "conductor": mat(w.conductor),
                             "insulator": mat(w.insulator)})

        drive = {"type": self.drive.kind, "frequency": self.drive.frequency}
        if self.drive.kind == "current":
            drive["amplitude"] = self.drive.amplitude
        else:
            drive.update({"V_s": self.drive.circuit.V_s,
                          "R1": self.drive.circuit.R1,
                          "R2": self.drive.circuit.R2})

        bcs = {}
        for tag, bc in self.thermal_bcs.items():
            bcs[tag] = {"type": bc.kind}
            if bc.kind == "robin":
                bcs[tag]["h_conv"] = bc.h_conv

        return {
            "name": self.name,
            "mesh": {"h": self.mesh_h},
            "geometry": {
                "domain": {"rho": list(self.domain[0]), "z": list(self.domain[1])},
                "background": self.background,
                "regions": [{"tag": r.tag, "rho": list(r.rho), "z": list(r.z)}
                            for r in self.regions],
            },
            "materials": {k: mat(v) for k, v in self.materials.items()},
            "windings": windings,
            "drive": drive,
            "magnetic": {"mode": self.magnetic_mode,
                         "steps_per_period": self.steps_per_period,
                         "periods_per_window": self.periods_per_window},
            "thermal": {"dt_initial": self.dt_initial, "dt_max": self.dt_max,
                        "end_time": self.end_time,
                        "ambient_C": kelvin_to_celsius(self.T_ambient),
                        "adapt_threshold_K": self.adapt_threshold,
                        "boundaries": bcs},
            "probes": [{"label": p.label, "rho": p.rho, "z": p.z}
                       for p in self.probes],
            "output": {"dir": self.output_dir,
                       "snapshot_every": self.snapshot_every},
        }


def _parse_material(d: dict, path: str, T_ambient: float) -> MaterialSpec:
    if not isinstance(d, dict):
        raise DeckError(f"{path} must be an object")
    sigma = _num(d, "sigma", path, minimum=0.0)
    mu_r = _num(d, "mu_r", path, default=1.0, strict_min=0.0)
    lam = _num(d, "lambda", path, strict_min=0.0)
    c_v = _num(d, "c_v", path, strict_min=0.0)
    model = None
    if "alpha_per_K" in d:
        alpha = _num(d, "alpha_per_K", path, minimum=0.0)
        if "T_ref_C" in d:
            T_ref = celsius_to_kelvin(_num(d, "T_ref_C", path))
        else:
            T_ref = T_ambient
        model = TemperatureModel(sigma_ref=sigma, alpha_ref=alpha, T_ref=T_ref)
    return MaterialSpec(sigma=sigma, mu=mu_r * MU0, lam=lam, c_v=c_v,
                        temperature_model=model)


def from_dict(deck: dict) -> ProblemConfig:
    """Validate a parsed deck and resolve every default."""
    if not isinstance(deck, dict):
        raise DeckError("deck must be a JSON object")

    name = deck.get("name", "unnamed")
    mesh_h = _num(_req(deck, "mesh", "deck"), "h", "mesh", strict_min=0.0)

    geo = _req(deck, "geometry", "deck")
    background = geo.get("background")
    regions = []
    for k, r in enumerate(_req(geo, "regions", "geometry")):
        path = f"geometry.regions[{k}]"
        tag = _req(r, "tag", path)
        rho = _req(r, "rho", path)
        z = _req(r, "z", path)
        try:
            regions.append(RegionRect(tag=tag, rho=(float(rho[0]), float(rho[1])),
                                      z=(float(z[0]), float(z[1]))))
        except (ValueError, TypeError, IndexError) as exc:
            raise DeckError(f"{path}: {exc}") from None
    if "domain" in geo:
        dom = geo["domain"]
        domain = ((float(dom["rho"][0]), float(dom["rho"][1])),
                  (float(dom["z"][0]), float(dom["z"][1])))
    elif regions:
        domain = ((min(r.rho[0] for r in regions), max(r.rho[1] for r in regions)),
                  (min(r.z[0] for r in regions), max(r.z[1] for r in regions)))
    else:
        raise DeckError("geometry.domain is missing (no regions to infer it from)")
    region_tags = {r.tag for r in regions}
    if background is not None:
        region_tags.add(background)

    th = _req(deck, "thermal", "deck")
    if "ambient_C" in th:
        T_ambient = celsius_to_kelvin(_num(th, "ambient_C", "thermal"))
    elif "ambient_K" in th:
        T_ambient = _num(th, "ambient_K", "thermal", strict_min=0.0)
    else:
        T_ambient = celsius_to_kelvin(20.0)

    materials = {}
    for tag, mat in _req(deck, "materials", "deck").items():
        if tag not in region_tags:
            raise DeckError(f"materials.{tag}: no geometry region with this tag")
        materials[tag] = _parse_material(mat, f"materials.{tag}", T_ambient)

    foil = []
    stranded = []
    for k, w in enumerate(deck.get("windings", [])):
        path = f"windings[{k}]"
        kind = _req(w, "kind", path)
        region = _req(w, "region", path)
        if region not in region_tags:
            raise DeckError(f"{path}.region: no geometry region named {region!r}")
        turns = int(_num(w, "turns", path, strict_min=0.0))
        ff = _num(w, "fill_factor", path, strict_min=0.0)
        if ff > 1.0:
            raise DeckError(f"{path}.fill_factor must be <= 1")
        conductor = _parse_material(_req(w, "conductor", path),
                                    f"{path}.conductor", T_ambient)
        insulator = _parse_material(_req(w, "insulator", path),
                                    f"{path}.insulator", T_ambient)
        if kind == "foil":
            n_u = int(_num(w, "n_u", path, default=7))
            if n_u < 2:
                raise DeckError(f"{path}.n_u must be >= 2")
            rect = next((r for r in regions if r.tag == region), None)
            if rect is None:
                raise DeckError(f"{path}.region must be an explicit geometry region")
            try:
                foil.append(FoilWindingSpec(region=region, rho=rect.rho, z=rect.z,
                                            turns=turns, fill_factor=ff,
                                            conductor=conductor, insulator=insulator,
                                            n_u=n_u))
            except ValueError as exc:
                raise DeckError(f"{path}: {exc}") from None
        elif kind == "stranded":
            stranded.append(StrandedWindingSpec(region=region, turns=turns,
                                                fill_factor=ff, conductor=conductor,
                                                insulator=insulator))
        else:
            raise DeckError(f"{path}.kind must be 'foil' or 'stranded'")

    for tag in region_tags:
        has_material = tag in materials
        is_winding = any(w.region == tag for w in foil + stranded)
        if not has_material and not is_winding:
            raise DeckError(f"region {tag!r} has neither a material nor a winding")

    dr = _req(deck, "drive", "deck")
    kind = _req(dr, "type", "drive")
    frequency = _num(dr, "frequency", "drive", strict_min=0.0)
    if kind == "current":
        drive = DriveConfig(kind="current", frequency=frequency,
                            amplitude=_num(dr, "amplitude", "drive"))
        if len(foil) != 1:
            raise DeckError("drive.type 'current' needs exactly one foil winding")
    elif kind == "circuit":
        circuit = CircuitSpec(V_s=_num(dr, "V_s", "drive"),
                              R1=_num(dr, "R1", "drive", minimum=0.0),
                              R2=_num(dr, "R2", "drive", minimum=0.0))
        drive = DriveConfig(kind="circuit", frequency=frequency, circuit=circuit)
        if len(foil) != 1 or len(stranded) != 1:
            raise DeckError("drive.type 'circuit' needs one foil and one stranded winding")
    else:
        raise DeckError("drive.type must be 'current' or 'circuit'")

    mg = deck.get("magnetic", {})
    mode = mg.get("mode", "harmonic")
    if mode not in ("harmonic", "time"):
        raise DeckError("magnetic.mode must be 'harmonic' or 'time'")
    steps_per_period = int(_num(mg, "steps_per_period", "magnetic", default=200,
                                strict_min=0.0))
    periods_per_window = int(_num(mg, "periods_per_window", "magnetic",
                                  default=2, strict_min=0.0))

    dt_initial = _num(th, "dt_initial", "thermal", strict_min=0.0)
    dt_max = _num(th, "dt_max", "thermal", default=16.0 * dt_initial,
                  strict_min=0.0)
    end_time = _num(th, "end_time", "thermal", strict_min=0.0)
    adapt_threshold = _num(th, "adapt_threshold_K", "thermal", default=0.5,
                           strict_min=0.0)
    if dt_max < dt_initial:
        raise DeckError("thermal.dt_max must be >= thermal.dt_initial")
    dt_mg = 1.0 / (frequency * steps_per_period)
    if dt_initial < dt_mg:
        raise DeckError(
            "thermal.dt_initial must be >= the magnetic time step "
            f"1/(frequency*steps_per_period) = {dt_mg:.3g} s")

    bcs = {}
    for tag, bc in _req(th, "boundaries", "thermal").items():
        path = f"thermal.boundaries.{tag}"
        kind_bc = _req(bc, "type", path)
        if kind_bc == "robin":
            h_conv = _num(bc, "h_conv", path, minimum=0.0)
            if math.isinf(h_conv):
                bcs[tag] = ThermalBC("dirichlet")
            elif h_conv == 0.0:
                bcs[tag] = ThermalBC("neumann")
            else:
                bcs[tag] = ThermalBC("robin", h_conv=h_conv)
        elif kind_bc in ("dirichlet", "neumann"):
            bcs[tag] = ThermalBC(kind_bc)
        else:
            raise DeckError(f"{path}.type must be 'robin', 'dirichlet' or 'neumann'")

    probes = []
    for k, p in enumerate(deck.get("probes", [])):
        path = f"probes[{k}]"
        probes.append(Probe(label=str(_req(p, "label", path)),
                            rho=_num(p, "rho", path),
                            z=_num(p, "z", path)))

    out = deck.get("output", {})
    output_dir = out.get("dir", "out")
    snapshot_every = int(_num(out, "snapshot_every", "output", default=0,
                              minimum=0.0))

    return ProblemConfig(
        name=name, mesh_h=mesh_h, domain=domain, background=background,
        regions=regions, materials=materials, foil_windings=foil,
        stranded_windings=stranded, drive=drive, magnetic_mode=mode,
        steps_per_period=steps_per_period, periods_per_window=periods_per_window,
        dt_initial=dt_initial, dt_max=dt_max, end_time=end_time,
        T_ambient=T_ambient, adapt_threshold=adapt_threshold, thermal_bcs=bcs,
        probes=probes, snapshot_every=snapshot_every, output_dir=output_dir)


def load_config(path) -> ProblemConfig:
    """Read and validate a JSON deck."""
    try:
        with open(path) as f:
            deck = json.load(f)
    except FileNotFoundError:
        raise DeckError(f"deck file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise DeckError(f"deck is not valid JSON: {exc}") from None
    return from_dict(deck)
