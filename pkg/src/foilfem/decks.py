"""Builders for the decks shipped with the repository.

The validation deck is a 30-turn foil winding centered in an air box with
isothermal walls, driven in the frequency domain at 50 Hz. The pot
transformer couples a 100-turn foil primary and a 500-turn wire secondary
through a gapped pot core and a small source/load circuit. The convergence
deck is a 10-turn variant of the validation setup small enough to mesh
every turn individually.
"""
from __future__ import annotations

import json
from pathlib import Path

COPPER = {"sigma": 60.0e6, "mu_r": 1.0, "lambda": 385.0, "c_v": 3.45e6,
          "alpha_per_K": 3.93e-3}
INSULATION = {"sigma": 0.0, "mu_r": 1.0, "lambda": 0.09, "c_v": 1.03e6}
IRON = {"sigma": 0.0, "mu_r": 5000.0, "lambda": 72.0, "c_v": 3.53e6}
AIR = {"sigma": 0.0, "mu_r": 1.0, "lambda": 0.026, "c_v": 1.0e3}


def validation_deck() -> dict:
    """Foil winding in an air box; frequency-domain magnetics at 50 Hz.

    The winding is 10 mm wide and 20 mm tall with 30 turns and a mean turn
    length of about 50 mm (mean radius 8 mm); the box walls sit 10 mm out
    and are isothermal at ambient.
    """
    return {
        "name": "validation",
        "mesh": {"h": 0.001},
        "geometry": {
            "domain": {"rho": [0.0, 0.023], "z": [-0.02, 0.02]},
            "background": "air",
            "regions": [
                {"tag": "winding", "rho": [0.003, 0.013], "z": [-0.01, 0.01]},
            ],
        },
        "materials": {"air": dict(AIR)},
        "windings": [
            {"kind": "foil", "region": "winding", "turns": 30,
             "fill_factor": 0.8, "n_u": 7,
             "conductor": dict(COPPER), "insulator": dict(INSULATION)},
        ],
        "drive": {"type": "current", "amplitude": 15.0, "frequency": 50.0},
        "magnetic": {"mode": "harmonic", "steps_per_period": 200,
                     "periods_per_window": 2},
        "thermal": {"dt_initial": 120.0, "dt_max": 120.0, "end_time": 36000.0,
                    "ambient_C": 20.0, "adapt_threshold_K": 0.5,
                    "boundaries": {"outer": {"type": "dirichlet"},
                                   "axis": {"type": "neumann"}}},
        "probes": [
            {"label": "winding_center", "rho": 0.008, "z": 0.0},
            {"label": "air_side", "rho": 0.018, "z": 0.0},
        ],
        "output": {"dir": "out/validation", "snapshot_every": 0},
    }


def pot_transformer_deck() -> dict:
    """Gapped pot core with foil primary, wire secondary and source circuit.

    Radial build: 10 mm center limb, 1 mm clearance, 10 mm foil winding,
    1 mm clearance, 6 mm wire winding, 1 mm clearance, 6 mm outer wall
    (35 mm outer radius). The center limb carries a 2 mm air gap at z = 0;
    the outer surface convects with 25 W/(m^2 K).
    """
    h_yoke = 0.0762
    z_top = h_yoke / 2
    z_window = 0.0261
    return {
        "name": "pot_transformer",
        "mesh": {"h": 0.0015},
        "geometry": {
            "domain": {"rho": [0.0, 0.035], "z": [-z_top, z_top]},
            "background": "air",
            "regions": [
                {"tag": "yoke", "rho": [0.0, 0.010], "z": [-z_top, -0.001]},
                {"tag": "yoke", "rho": [0.0, 0.010], "z": [0.001, z_top]},
                {"tag": "yoke", "rho": [0.010, 0.035], "z": [-z_top, -z_window]},
                {"tag": "yoke", "rho": [0.010, 0.035], "z": [z_window, z_top]},
                {"tag": "yoke", "rho": [0.029, 0.035], "z": [-z_window, z_window]},
                {"tag": "fw", "rho": [0.011, 0.021], "z": [-0.025, 0.025]},
                {"tag": "sc", "rho": [0.022, 0.028], "z": [-0.020, 0.020]},
            ],
        },
        "materials": {"air": dict(AIR), "yoke": dict(IRON)},
        "windings": [
            {"kind": "foil", "region": "fw", "turns": 100,
             "fill_factor": 0.8, "n_u": 7,
             "conductor": dict(COPPER), "insulator": dict(INSULATION)},
            {"kind": "stranded", "region": "sc", "turns": 500,
             "fill_factor": 0.8,
             "conductor": dict(COPPER), "insulator": dict(INSULATION)},
        ],
        "drive": {"type": "circuit", "V_s": 50.0, "R1": 1.0, "R2": 200.0,
                  "frequency": 5000.0},
        "magnetic": {"mode": "harmonic", "steps_per_period": 200,
                     "periods_per_window": 2},
        "thermal": {"dt_initial": 30.0, "dt_max": 480.0, "end_time": 18000.0,
                    "ambient_C": 20.0, "adapt_threshold_K": 0.5,
                    "boundaries": {"outer": {"type": "robin", "h_conv": 25.0},
                                   "axis": {"type": "neumann"}}},
        "probes": [
            {"label": "P1_fw_gap", "rho": 0.012, "z": 0.0},
            {"label": "P2_fw_top", "rho": 0.016, "z": 0.020},
            {"label": "P3_sc_mid", "rho": 0.025, "z": 0.0},
            {"label": "P4_sc_top", "rho": 0.025, "z": 0.015},
            {"label": "P5_yoke_gap", "rho": 0.005, "z": 0.004},
            {"label": "P6_air", "rho": 0.0105, "z": 0.023},
        ],
        "output": {"dir": "out/pot_transformer", "snapshot_every": 0},
    }


def convergence_deck() -> dict:
    """10-turn study deck: small enough to mesh each turn individually."""
    deck = validation_deck()
    deck["name"] = "convergence"
    deck["mesh"]["h"] = 0.003
    deck["windings"][0]["turns"] = 10
    deck["drive"]["amplitude"] = 50.0
    deck["thermal"]["end_time"] = 3600.0
    deck["probes"] = []
    deck["output"] = {"dir": "out/convergence", "snapshot_every": 0}
    return deck


BUILTIN = {
    "validation": validation_deck,
    "pot_transformer": pot_transformer_deck,
    "convergence": convergence_deck,
}


def write_builtin_decks(directory) -> list[Path]:
    """Write the canonical JSON files the repository checks in under decks/."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, builder in BUILTIN.items():
        path = directory / f"{name}.json"
        with open(path, "w") as f:
            json.dump(builder(), f, indent=2)
            f.write("\n")
        paths.append(path)
    return paths
