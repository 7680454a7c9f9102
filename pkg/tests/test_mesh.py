import numpy as np
import pytest

from foilfem.mesh import Mesh, RegionRect, generate, import_msh, refine_uniform, write_msh


def unit_square(h=0.5):
    return generate([RegionRect("box", (0.0, 1.0), (0.0, 1.0))], h=h)


def test_unit_square_structured_split():
    m = unit_square(0.5)
    assert m.num_triangles == 8
    assert m.num_nodes == 9
    m.validate()


def test_total_and_region_areas():
    m = generate([RegionRect("winding", (0.003, 0.013), (-0.01, 0.01))],
                 h=0.001, background="air", domain=((0.0, 0.023), (-0.02, 0.02)))
    m.validate()
    total = m.triangle_areas().sum()
    assert total == pytest.approx(0.023 * 0.04, rel=1e-10)
    aw = m.triangle_areas()[m.triangles_in("winding")].sum()
    assert aw == pytest.approx(0.01 * 0.02, rel=1e-10)


def test_element_count_matches_area_prediction():
    # validation layout at h = 1 mm: area / (h^2 / 2) predicts the count
    m = generate([RegionRect("winding", (0.003, 0.013), (-0.01, 0.01))],
                 h=0.001, background="air", domain=((0.0, 0.023), (-0.02, 0.02)))
    predicted = (0.023 * 0.04) / (0.001 ** 2 / 2)
    assert 0.8 * predicted <= m.num_triangles <= 1.2 * predicted


def test_max_edge_length_bound():
    m = generate([RegionRect("box", (0.0, 0.013), (0.0, 0.01))], h=0.0017)
    p = m.nodes
    for pair in ((0, 1), (1, 2), (2, 0)):
        d = p[m.triangles[:, pair[0]]] - p[m.triangles[:, pair[1]]]
        assert np.linalg.norm(d, axis=1).max() <= 1.5 * 0.0017


def test_thin_rectangle_rejected():
    with pytest.raises(ValueError, match="thinner than the mesh size"):
        generate([RegionRect("sliver", (0.0, 0.1 * 0.5), (0.0, 1.0)),
                  RegionRect("rest", (0.1 * 0.5, 1.0), (0.0, 1.0))], h=0.5)


def test_local_h_override_allows_thin_strips():
    m = generate([RegionRect("strip", (0.0, 0.05), (0.0, 1.0), h=(0.05, None)),
                  RegionRect("rest", (0.05, 1.0), (0.0, 1.0))], h=0.5)
    m.validate()
    assert len(m.triangles_in("strip")) >= 2


def test_overlapping_rectangles_rejected():
    with pytest.raises(ValueError, match="overlap"):
        generate([RegionRect("a", (0.0, 0.6), (0.0, 1.0)),
                  RegionRect("b", (0.5, 1.0), (0.0, 1.0))], h=0.25)


def test_untagged_gap_rejected_without_background():
    with pytest.raises(ValueError, match="does not tile"):
        generate([RegionRect("a", (0.0, 0.4), (0.0, 1.0))], h=0.2,
                 domain=((0.0, 1.0), (0.0, 1.0)))


def test_axis_boundary_tag():
    m = unit_square()
    axis_nodes = m.boundary_nodes("axis")
    assert np.allclose(m.nodes[axis_nodes, 0], 0.0)
    off = generate([RegionRect("box", (0.5, 1.0), (0.0, 1.0))], h=0.25)
    with pytest.raises(KeyError):
        off.boundary_id("axis")


def test_refine_uniform_counts_and_areas():
    m = unit_square()
    r = refine_uniform(m)
    assert r.num_triangles == 4 * m.num_triangles
    # node count = old nodes + old edges
    edges = np.unique(np.sort(np.concatenate(
        [m.triangles[:, [0, 1]], m.triangles[:, [1, 2]], m.triangles[:, [2, 0]]]),
        axis=1), axis=0)
    assert r.num_nodes == m.num_nodes + len(edges)
    # children cover their parents
    parent = m.triangle_areas()
    child = r.triangle_areas().reshape(-1, 4).sum(axis=1)
    assert np.allclose(child, parent, rtol=1e-12)
    r.validate()
    rr = refine_uniform(r)
    assert rr.num_triangles == 16 * m.num_triangles
    # tags inherited
    assert np.all(np.repeat(m.triangle_tags, 4) == r.triangle_tags)


def test_msh_round_trip(tmp_path):
    m = generate([RegionRect("winding", (0.003, 0.013), (-0.01, 0.01))],
                 h=0.002, background="air", domain=((0.0, 0.023), (-0.02, 0.02)))
    path = tmp_path / "mesh.msh"
    write_msh(m, path)
    m2 = import_msh(path)
    assert np.allclose(m2.nodes, m.nodes, atol=1e-15)
    assert np.array_equal(m2.triangles, m.triangles)
    assert np.array_equal(m2.triangle_tags, m.triangle_tags)
    assert np.array_equal(m2.boundary_edges, m.boundary_edges)
    assert m2.region_names == m.region_names
    assert m2.boundary_names == m.boundary_names
    m2.validate()


def test_msh_hand_written_fixture(tmp_path):
    content = """$MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
2
1 10 "edge"
2 20 "plate"
$EndPhysicalNames
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
3
1 2 2 20 1 1 2 3
2 2 2 20 1 1 3 4
3 1 2 10 1 1 2
$EndElements
"""
    path = tmp_path / "two.msh"
    path.write_text(content)
    m = import_msh(path)
    assert m.num_triangles == 2
    assert m.num_nodes == 4
    assert m.region_names[20] == "plate"
    assert np.all(m.triangle_tags == 20)
    assert m.boundary_names[10] == "edge"
    assert m.triangle_areas().min() > 0


def test_msh_rejects_tetrahedra(tmp_path):
    content = """$MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
1
3 5 "vol"
$EndPhysicalNames
$Nodes
4
1 0 0 0
2 1 0 0
3 0 1 0
4 0 0 1
$EndNodes
$Elements
1
1 4 2 5 1 1 2 3 4
$EndElements
"""
    path = tmp_path / "tet.msh"
    path.write_text(content)
    with pytest.raises(ValueError, match="unsupported element"):
        import_msh(path)


def test_msh_requires_physical_names(tmp_path):
    content = """$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
3
1 0 0 0
2 1 0 0
3 0 1 0
$EndNodes
$Elements
1
1 2 2 1 1 1 2 3
$EndElements
"""
    path = tmp_path / "anon.msh"
    path.write_text(content)
    with pytest.raises(ValueError, match="physical names"):
        import_msh(path)


def test_validate_catches_duplicate_nodes():
    nodes = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1e-14]])
    tris = np.array([[0, 1, 2], [3, 1, 2]])
    m = Mesh(nodes=nodes, triangles=tris,
             triangle_tags=np.array([1, 1]),
             boundary_edges=np.empty((0, 2), dtype=np.int64),
             boundary_edge_tags=np.empty(0, dtype=np.int64),
             region_names={1: "r"}, boundary_names={})
    with pytest.raises(ValueError, match="duplicate"):
        m.validate()


def test_mesh_arrays_immutable():
    m = unit_square()
    with pytest.raises(ValueError):
        m.nodes[0, 0] = 5.0
