"""Derived quantities and exports: probes, line samples, VTK and CSV files.

All numeric output is written at full double precision with fixed column
order so that repeated runs produce byte-identical files.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._fem import locate_points

FLOAT_FMT = "{:.17e}"


@dataclass(frozen=True)
class Probe:
    label: str
    rho: float
    z: float


def locate_probes(mesh, probes: list[Probe]):
    """Resolve probes to (label, triangle, barycentric) interpolation data."""
    if not probes:
        return []
    pts = np.array([[p.rho, p.z] for p in probes])
    tri, lam = locate_points(mesh, pts)
    return [(p.label, int(t), l) for p, t, l in zip(probes, tri, lam)]


def interpolate(mesh, values: np.ndarray, points) -> np.ndarray:
    """P1 interpolation of a nodal field at arbitrary points."""
    tri, lam = locate_points(mesh, points)
    return np.einsum("ki,ki->k", values[mesh.triangles[tri]], lam)


def sample_line(mesh, values: np.ndarray, start, end, n_samples: int):
    """Uniform samples of a nodal field along a segment.

    Returns (arclength, values); sample points include both endpoints and
    reproduce nodal values exactly where they coincide with nodes.
    """
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    frac = np.linspace(0.0, 1.0, n_samples)
    pts = start[None, :] + frac[:, None] * (end - start)[None, :]
    vals = interpolate(mesh, values, pts)
    return frac * float(np.linalg.norm(end - start)), vals


def export_vtk(mesh, path, point_data: dict | None = None,
               cell_data: dict | None = None, title: str = "foilfem") -> None:
    """Legacy ASCII VTK unstructured grid with optional nodal and cell data."""
    point_data = point_data or {}
    cell_data = cell_data or {}
    for name, arr in point_data.items():
        if len(arr) != mesh.num_nodes:
            raise ValueError(f"point data {name!r} has wrong length")
    for name, arr in cell_data.items():
        if len(arr) != mesh.num_triangles:
            raise ValueError(f"cell data {name!r} has wrong length")

    with open(path, "w") as f:
        f.write("# vtk DataFile Version 2.0\n")
        f.write(f"{title}\n")
        f.write("ASCII\n")
        f.write("DATASET UNSTRUCTURED_GRID\n")
        f.write(f"POINTS {mesh.num_nodes} double\n")
        for rho, z in mesh.nodes:
            f.write(f"{rho:.17g} {z:.17g} 0\n")
        m = mesh.num_triangles
        f.write(f"CELLS {m} {4 * m}\n")
        for a, b, c in mesh.triangles:
            f.write(f"3 {a} {b} {c}\n")
        f.write(f"CELL_TYPES {m}\n")
        f.write("5\n" * m)
        if point_data:
            f.write(f"POINT_DATA {mesh.num_nodes}\n")
            for name, arr in point_data.items():
                f.write(f"SCALARS {name} double\nLOOKUP_TABLE default\n")
                for v in np.asarray(arr, dtype=float):
                    f.write(f"{v:.17g}\n")
        f.write(f"CELL_DATA {m}\n")
        f.write("SCALARS region int\nLOOKUP_TABLE default\n")
        for t in mesh.triangle_tags:
            f.write(f"{t}\n")
        for name, arr in cell_data.items():
            f.write(f"SCALARS {name} double\nLOOKUP_TABLE default\n")
            for v in np.asarray(arr, dtype=float):
                f.write(f"{v:.17g}\n")


def write_history_csv(path, history) -> None:
    """History of a coupled run, one row per thermal macro step."""
    with open(path, "w") as f:
        f.write(",".join(history.columns) + "\n")
        for row in history.rows:
            f.write(",".join(FLOAT_FMT.format(v) for v in row) + "\n")


def write_table_csv(path, rows: list[dict]) -> None:
    """Generic table of numeric dicts with a stable column order."""
    if not rows:
        raise ValueError("empty table")
    cols = list(rows[0].keys())
    with open(path, "w") as f:
        f.write(",".join(cols) + "\n")
        for row in rows:
            cells = []
            for c in cols:
                v = row[c]
                cells.append(str(v) if isinstance(v, int) else FLOAT_FMT.format(v))
            f.write(",".join(cells) + "\n")


def fit_order(n_elems, errors) -> float:
    """Least-squares slope of log(error) against log(1/N)."""
    x = np.log(np.asarray(n_elems, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    slope = np.polyfit(x, y, 1)[0]
    return float(-slope)


def convergence_study(cfg, levels: int) -> dict:
    """Internal-energy error of the homogenized model against resolved turns.

    The reference run meshes every turn of the foil winding as a solid
    conductor, one refinement level finer than the finest homogenized mesh,
    and is computed once. The homogenized model is then run on a sequence of
    meshes with the target size halved per level, all to the configured end
    time; reported is the relative error of the final thermal internal
    energy against the reference and the order fitted over element counts.
    """
    from . import runner as runmod

    if levels < 2:
        raise ValueError("need at least 2 levels")
    ref = runmod.run_study_variant(cfg, "resolved", levels)
    U_ref = ref["U"]
    rows = []
    for lev in range(levels):
        hom = runmod.run_study_variant(cfg, "homogenized", lev)
        err = abs(U_ref - hom["U"]) / abs(U_ref)
        rows.append({"level": lev,
                     "n_elems_resolved": ref["n_elems"],
                     "n_elems_homogenized": hom["n_elems"],
                     "U_resolved_J": U_ref,
                     "U_homogenized_J": hom["U"],
                     "rel_error": err})
    order = fit_order([r["n_elems_homogenized"] for r in rows],
                      [max(r["rel_error"], 1e-300) for r in rows])
    return {"rows": rows, "order": order}
