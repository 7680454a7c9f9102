import dataclasses

import numpy as np
import pytest

from foilfem import post
from foilfem.mesh import RegionRect, generate
from foilfem.post import Probe, export_vtk, locate_probes, sample_line


@pytest.fixture(scope="module")
def square():
    return generate([RegionRect("box", (0.01, 0.03), (0.0, 0.02))], h=0.004)


def test_sample_line_constant_and_linear(square):
    const = np.full(square.num_nodes, 7.5)
    s, vals = sample_line(square, const, (0.011, 0.001), (0.029, 0.019), 17)
    assert np.allclose(vals, 7.5, atol=1e-12)
    assert s[0] == 0.0
    assert s[-1] == pytest.approx(np.hypot(0.018, 0.018), rel=1e-12)
    # P1 reproduces linears exactly
    lin = square.nodes[:, 0].copy()
    s, vals = sample_line(square, lin, (0.01, 0.0), (0.03, 0.02), 11)
    assert np.allclose(vals, np.linspace(0.01, 0.03, 11), atol=1e-12)


def test_sample_line_hits_nodal_values(square):
    rng = np.random.default_rng(3)
    vals = rng.normal(size=square.num_nodes)
    hull = np.unique(square.boundary_edges)
    node = np.setdiff1d(np.arange(square.num_nodes), hull)[0]
    pt = square.nodes[node]
    s, out = sample_line(square, vals, pt, (0.02, 0.01), 2)
    assert out[0] == pytest.approx(vals[node], rel=1e-12)


def test_sample_line_outside_mesh_rejected(square):
    with pytest.raises(ValueError, match="outside"):
        sample_line(square, np.zeros(square.num_nodes), (0.0, 0.0), (0.05, 0.0), 3)


def test_probe_tie_break_lowest_triangle(square):
    # a probe on a shared vertex is owned by the lowest triangle index
    node = square.triangles[10, 0]
    probes = [Probe("p", *square.nodes[node])]
    label, tri, lam = locate_probes(square, probes)[0]
    candidates = np.nonzero((square.triangles == node).any(axis=1))[0]
    assert tri == candidates.min()
    vals = np.arange(square.num_nodes, dtype=float)
    assert vals[square.triangles[tri]] @ lam == pytest.approx(vals[node], rel=1e-12)


def parse_vtk_points(path):
    with open(path) as f:
        lines = f.read().splitlines()
    k = next(i for i, ln in enumerate(lines) if ln.startswith("POINTS"))
    n = int(lines[k].split()[1])
    pts = np.array([[float(x) for x in lines[k + 1 + i].split()] for i in range(n)])
    return pts


def test_vtk_export_round_trip(square, tmp_path):
    path = tmp_path / "mesh.vtk"
    export_vtk(square, path)
    pts = parse_vtk_points(path)
    assert pts.shape == (square.num_nodes, 3)
    assert np.abs(pts[:, :2] - square.nodes).max() < 1e-12
    text = path.read_text()
    assert text.count("CELL_TYPES") == 1
    assert f"CELLS {square.num_triangles} {4 * square.num_triangles}" in text


def test_vtk_export_with_fields(square, tmp_path):
    path = tmp_path / "fields.vtk"
    T = np.linspace(0, 1, square.num_nodes)
    h = np.linspace(0, 2, square.num_triangles)
    export_vtk(square, path, point_data={"T_K": T},
               cell_data={"loss_density": h})
    text = path.read_text()
    assert "SCALARS T_K double" in text
    assert "SCALARS loss_density double" in text
    assert "SCALARS region int" in text
    with pytest.raises(ValueError, match="wrong length"):
        export_vtk(square, path, point_data={"bad": T[:-1]})


def test_vtk_deterministic_bytes(square, tmp_path):
    a, b = tmp_path / "a.vtk", tmp_path / "b.vtk"
    T = np.sin(np.arange(square.num_nodes) * 0.37)
    export_vtk(square, a, point_data={"T": T})
    export_vtk(square, b, point_data={"T": T})
    assert a.read_bytes() == b.read_bytes()


def test_history_csv_format(tmp_path):
    from foilfem.coupling import CouplingHistory
    hist = CouplingHistory(columns=["t_s", "x"], rows=[[1.0, 2.5], [2.0, -3.125]])
    path = tmp_path / "h.csv"
    post.write_history_csv(path, hist)
    lines = path.read_text().splitlines()
    assert lines[0] == "t_s,x"
    assert lines[1].split(",")[1] == "2.50000000000000000e+00"


def test_fit_order_recovers_slope():
    n = np.array([100, 400, 1600])
    errs = 3.0 * np.asarray(n, dtype=float) ** -0.75
    assert post.fit_order(n, errs) == pytest.approx(0.75, rel=1e-12)


def test_identical_materials_make_homogenization_exact():
    # with conductor == insulator (and no leftover insulation strips, which
    # would act as shorted rings) the mixing rules are exact and the
    # resolved and homogenized models differ only by discretization
    from foilfem import config, decks, runner
    deck = decks.convergence_deck()
    deck["windings"][0]["turns"] = 10
    deck["windings"][0]["fill_factor"] = 1.0
    deck["windings"][0]["insulator"] = dict(deck["windings"][0]["conductor"])
    deck["thermal"]["end_time"] = 600.0
    cfg = config.from_dict(deck)
    cfg = dataclasses.replace(cfg, mesh_h=0.002)
    res = runner.run_study_variant(cfg, "resolved", 1)
    hom = runner.run_study_variant(cfg, "homogenized", 1)
    assert abs(res["U"] - hom["U"]) / res["U"] < 1e-4
