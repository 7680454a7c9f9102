"""Triangular meshes of axisymmetric rectangle layouts.

The built-in generator lays a global tensor grid over the (rho, z) half
plane: every rectangle edge becomes a grid line, every interval is split to
the target edge length, and each grid cell is cut into two triangles. That
keeps meshes deterministic and makes region areas exact, which is what the
convergence studies and regression baselines rely on. Irregular geometries
can be imported from ASCII MSH 2.2 files instead.

Node coordinates are (rho, z) in metres; triangles are positively oriented;
per-triangle integer tags map to region names, boundary edges to boundary
names ("axis" for rho = 0 when present, "outer" for the rest of the hull).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

AXIS_TAG = "axis"
OUTER_TAG = "outer"


@dataclass(frozen=True)
class RegionRect:
    """Axis-aligned rectangle with a region tag and optional local mesh size.

    ``h`` overrides the global target edge length inside this rectangle;
    a scalar applies to both directions, a pair is (h_rho, h_z).
    """

    tag: str
    rho: tuple[float, float]
    z: tuple[float, float]
    h: float | tuple[float, float] | None = None

    def __post_init__(self):
        if self.rho[1] <= self.rho[0] or self.z[1] <= self.z[0]:
            raise ValueError(f"region {self.tag!r}: empty rectangle")
        if self.rho[0] < 0:
            raise ValueError(f"region {self.tag!r}: rho must be >= 0")

    def h_pair(self, h_global: float) -> tuple[float, float]:
        if self.h is None:
            return (h_global, h_global)
        if np.isscalar(self.h):
            return (float(self.h), float(self.h))
        h_rho, h_z = self.h
        return (h_global if h_rho is None else float(h_rho),
                h_global if h_z is None else float(h_z))


@dataclass(frozen=True)
class Mesh:
    nodes: np.ndarray            # (n, 2) float64, columns (rho, z)
    triangles: np.ndarray        # (m, 3) int64, counter-clockwise
    triangle_tags: np.ndarray    # (m,) int64
    boundary_edges: np.ndarray   # (k, 2) int64
    boundary_edge_tags: np.ndarray  # (k,) int64
    region_names: dict[int, str] = field(default_factory=dict)
    boundary_names: dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        for arr in (self.nodes, self.triangles, self.triangle_tags,
                    self.boundary_edges, self.boundary_edge_tags):
            arr.setflags(write=False)

    @property
    def num_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def num_triangles(self) -> int:
        return self.triangles.shape[0]

    def region_id(self, name: str) -> int:
        for rid, rname in self.region_names.items():
            if rname == name:
                return rid
        raise KeyError(f"no region named {name!r}")

    def boundary_id(self, name: str) -> int:
        for bid, bname in self.boundary_names.items():
            if bname == name:
                return bid
        raise KeyError(f"no boundary named {name!r}")

    def triangles_in(self, name: str) -> np.ndarray:
        """Indices of triangles tagged with the given region name."""
        return np.nonzero(self.triangle_tags == self.region_id(name))[0]

    def boundary_edges_in(self, name: str) -> np.ndarray:
        return np.nonzero(self.boundary_edge_tags == self.boundary_id(name))[0]

    def boundary_nodes(self, name: str) -> np.ndarray:
        edges = self.boundary_edges[self.boundary_edges_in(name)]
        return np.unique(edges)

    def triangle_areas(self) -> np.ndarray:
        p = self.nodes
        t = self.triangles
        d1 = p[t[:, 1]] - p[t[:, 0]]
        d2 = p[t[:, 2]] - p[t[:, 0]]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def centroids(self) -> np.ndarray:
        return self.nodes[self.triangles].mean(axis=1)

    def validate(self) -> None:
        """Raise if basic mesh invariants are violated."""
        if np.any(self.nodes[:, 0] < -1e-15):
            raise ValueError("mesh has nodes with rho < 0")
        areas = self.triangle_areas()
        if np.any(areas <= 0):
            raise ValueError("mesh has non-positively oriented triangles")
        # duplicate nodes within 1e-12 m
        key = np.round(self.nodes / 1e-12).astype(np.int64)
        if np.unique(key, axis=0).shape[0] != self.num_nodes:
            raise ValueError("mesh has duplicate nodes (closer than 1e-12 m)")
        unknown = set(np.unique(self.triangle_tags)) - set(self.region_names)
        if unknown:
            raise ValueError(f"triangle tags without region name: {sorted(unknown)}")
        # every boundary edge belongs to exactly one triangle, and the union
        # of boundary edges closes up (even node degree)
        tri_edges = _tri_edge_keys(self.triangles, self.num_nodes)
        uniq, counts = np.unique(tri_edges, return_counts=True)
        hull = set(uniq[counts == 1].tolist())
        for a, b in self.boundary_edges:
            k = _edge_key(int(a), int(b), self.num_nodes)
            if k not in hull:
                raise ValueError("boundary edge does not lie on the mesh hull")
        deg = np.zeros(self.num_nodes, dtype=np.int64)
        np.add.at(deg, self.boundary_edges.ravel(), 1)
        if np.any(deg % 2 != 0):
            raise ValueError("boundary edges do not form closed loops")


def _edge_key(a: int, b: int, n: int) -> int:
    lo, hi = (a, b) if a < b else (b, a)
    return lo * n + hi


def _tri_edge_keys(tris: np.ndarray, n: int) -> np.ndarray:
    pairs = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    lo = pairs.min(axis=1).astype(np.int64)
    hi = pairs.max(axis=1).astype(np.int64)
    return lo * n + hi


def _split_interval(lines: list[float], h_for: "callable") -> np.ndarray:
    """Subdivide each interval between consecutive lines to its local target h."""
    out = [lines[0]]
    for x0, x1 in zip(lines[:-1], lines[1:]):
        h_use = h_for(x0, x1)
        n = max(1, int(math.ceil((x1 - x0) / h_use - 1e-9)))
        for k in range(1, n):
            out.append(x0 + (x1 - x0) * k / n)
        out.append(x1)
    return np.asarray(out)


def generate(regions: list[RegionRect], h: float,
             background: str | None = None,
             domain: tuple[tuple[float, float], tuple[float, float]] | None = None,
             ) -> Mesh:
    """Structured triangulation of a rectangle layout.

    Every rectangle boundary is resolved exactly by grid lines and each grid
    cell is split into two triangles, so the maximum edge length stays below
    1.5*h (the diagonal of an h-by-h cell). Rectangles must not overlap and
    must be at least half an element wide in both directions unless they
    carry their own local ``h``. With a ``background`` tag, the remaining
    area of ``domain`` (default: bounding box of the rectangles) is filled
    with that region; without one, the rectangles must tile the domain.
    """
    if h <= 0:
        raise ValueError("mesh size h must be > 0")
    if not regions and background is None:
        raise ValueError("layout needs at least one region")

    for i, r in enumerate(regions):
        h_rho, h_z = r.h_pair(h)
        if (r.rho[1] - r.rho[0]) < 0.5 * h_rho or (r.z[1] - r.z[0]) < 0.5 * h_z:
            raise ValueError(
                f"region {r.tag!r} is thinner than the mesh size h "
                "(must fit at least one element across)")
        for s in regions[i + 1:]:
            if (r.rho[0] < s.rho[1] - 1e-15 and s.rho[0] < r.rho[1] - 1e-15
                    and r.z[0] < s.z[1] - 1e-15 and s.z[0] < r.z[1] - 1e-15):
                raise ValueError(f"regions {r.tag!r} and {s.tag!r} overlap")

    if domain is None:
        if not regions:
            raise ValueError("a background-only layout needs an explicit domain")
        domain = ((min(r.rho[0] for r in regions), max(r.rho[1] for r in regions)),
                  (min(r.z[0] for r in regions), max(r.z[1] for r in regions)))
    (rho_min, rho_max), (z_min, z_max) = domain
    if rho_min < 0:
        raise ValueError("domain rho must be >= 0")

    xs = {rho_min, rho_max}
    zs = {z_min, z_max}
    for r in regions:
        xs.update(r.rho)
        zs.update(r.z)
    # merge lines that only differ by floating-point noise
    scale = max(rho_max - rho_min, z_max - z_min)
    tol = 1e-9 * scale

    def _merge(lines):
        out = [lines[0]]
        for v in lines[1:]:
            if v - out[-1] > tol:
                out.append(v)
        return out

    xlines = _merge(sorted(xs))
    zlines = _merge(sorted(zs))

    def h_x(a, b):
        hs = [h] + [r.h_pair(h)[0] for r in regions
                    if r.rho[0] <= a + tol and r.rho[1] >= b - tol]
        return min(hs)

    def h_z(a, b):
        hs = [h] + [r.h_pair(h)[1] for r in regions
                    if r.z[0] <= a + tol and r.z[1] >= b - tol]
        return min(hs)

    xv = _split_interval(xlines, h_x)
    zv = _split_interval(zlines, h_z)
    nx, nz = len(xv), len(zv)

    rr, zz = np.meshgrid(xv, zv, indexing="xy")
    nodes = np.column_stack([rr.ravel(), zz.ravel()])

    def nid(i, j):
        return j * nx + i

    ii, jj = np.meshgrid(np.arange(nx - 1), np.arange(nz - 1), indexing="xy")
    ii = ii.ravel()
    jj = jj.ravel()
    sw = nid(ii, jj)
    se = nid(ii + 1, jj)
    ne = nid(ii + 1, jj + 1)
    nw = nid(ii, jj + 1)
    tris = np.empty((2 * len(sw), 3), dtype=np.int64)
    tris[0::2] = np.column_stack([sw, se, ne])
    tris[1::2] = np.column_stack([sw, ne, nw])

    # region ids in deck order; background first so it always gets id 1
    names: list[str] = []
    if background is not None:
        names.append(background)
    for r in regions:
        if r.tag not in names:
            names.append(r.tag)
    region_names = {i + 1: n for i, n in enumerate(names)}
    name_to_id = {n: i for i, n in region_names.items()}

    cx = nodes[tris, 0].mean(axis=1)
    cz = nodes[tris, 1].mean(axis=1)
    tags = np.zeros(len(tris), dtype=np.int64)
    for r in regions:
        inside = ((cx > r.rho[0]) & (cx < r.rho[1]) & (cz > r.z[0]) & (cz < r.z[1]))
        tags[inside] = name_to_id[r.tag]
    if background is not None:
        tags[tags == 0] = name_to_id[background]
    elif np.any(tags == 0):
        raise ValueError("layout does not tile the domain and no background tag given")

    # hull edges of the structured grid
    edges = []
    etags = []
    has_axis = rho_min == 0.0
    boundary_names = {}
    bid = {}
    next_id = 1
    if has_axis:
        boundary_names[next_id] = AXIS_TAG
        bid[AXIS_TAG] = next_id
        next_id += 1
    boundary_names[next_id] = OUTER_TAG
    bid[OUTER_TAG] = next_id

    for j in range(nz - 1):  # vertical sides
        edges.append((nid(0, j), nid(0, j + 1)))
        etags.append(bid[AXIS_TAG] if has_axis else bid[OUTER_TAG])
        edges.append((nid(nx - 1, j), nid(nx - 1, j + 1)))
        etags.append(bid[OUTER_TAG])
    for i in range(nx - 1):  # horizontal sides
        edges.append((nid(i, 0), nid(i + 1, 0)))
        etags.append(bid[OUTER_TAG])
        edges.append((nid(i, nz - 1), nid(i + 1, nz - 1)))
        etags.append(bid[OUTER_TAG])

    return Mesh(nodes=nodes, triangles=tris, triangle_tags=tags,
                boundary_edges=np.asarray(edges, dtype=np.int64),
                boundary_edge_tags=np.asarray(etags, dtype=np.int64),
                region_names=region_names, boundary_names=boundary_names)


def refine_uniform(mesh: Mesh) -> Mesh:
    """Split every triangle into 4 congruent children; tags are inherited."""
    n = mesh.num_nodes
    tris = mesh.triangles
    keys = _tri_edge_keys(tris, n)
    uniq, inverse = np.unique(keys, return_inverse=True)
    mid_index = n + np.arange(len(uniq))
    lo = uniq // n
    hi = uniq % n
    midpoints = 0.5 * (mesh.nodes[lo] + mesh.nodes[hi])
    nodes = np.vstack([mesh.nodes, midpoints])

    m = mesh.num_triangles
    m01 = mid_index[inverse[0:m]]
    m12 = mid_index[inverse[m:2 * m]]
    m20 = mid_index[inverse[2 * m:3 * m]]
    v0, v1, v2 = tris[:, 0], tris[:, 1], tris[:, 2]
    children = np.empty((4 * m, 3), dtype=np.int64)
    children[0::4] = np.column_stack([v0, m01, m20])
    children[1::4] = np.column_stack([v1, m12, m01])
    children[2::4] = np.column_stack([v2, m20, m12])
    children[3::4] = np.column_stack([m01, m12, m20])
    child_tags = np.repeat(mesh.triangle_tags, 4)

    be = mesh.boundary_edges
    bkeys = np.array([_edge_key(int(a), int(b), n) for a, b in be], dtype=np.int64)
    bmid = mid_index[np.searchsorted(uniq, bkeys)]
    new_edges = np.empty((2 * len(be), 2), dtype=np.int64)
    new_edges[0::2] = np.column_stack([be[:, 0], bmid])
    new_edges[1::2] = np.column_stack([bmid, be[:, 1]])
    new_tags = np.repeat(mesh.boundary_edge_tags, 2)

    return Mesh(nodes=nodes, triangles=children, triangle_tags=child_tags,
                boundary_edges=new_edges, boundary_edge_tags=new_tags,
                region_names=dict(mesh.region_names),
                boundary_names=dict(mesh.boundary_names))


def import_msh(path) -> Mesh:
    """Read an ASCII MSH 2.2 file with 2D triangles and physical group names."""
    with open(path) as f:
        lines = [ln.strip() for ln in f]

    def section(name):
        try:
            i = lines.index(f"${name}")
        except ValueError:
            return None
        j = lines.index(f"$End{name}")
        return lines[i + 1:j]

    fmt = section("MeshFormat")
    if fmt is None or not fmt[0].startswith("2.2"):
        raise ValueError("unsupported mesh format (need ASCII MSH 2.2)")

    phys = section("PhysicalNames")
    if phys is None:
        raise ValueError("mesh file has no physical names")
    region_names: dict[int, str] = {}
    boundary_names: dict[int, str] = {}
    for ln in phys[1:]:
        parts = ln.split(maxsplit=2)
        dim, pid = int(parts[0]), int(parts[1])
        name = parts[2].strip().strip('"')
        if dim == 2:
            region_names[pid] = name
        elif dim == 1:
            boundary_names[pid] = name

    node_lines = section("Nodes")
    nn = int(node_lines[0])
    ids = np.empty(nn, dtype=np.int64)
    coords = np.empty((nn, 2))
    for k, ln in enumerate(node_lines[1:1 + nn]):
        parts = ln.split()
        ids[k] = int(parts[0])
        coords[k] = (float(parts[1]), float(parts[2]))
    remap = {int(i): k for k, i in enumerate(ids)}

    elem_lines = section("Elements")
    ne = int(elem_lines[0])
    tris, ttags, edges, etags = [], [], [], []
    for ln in elem_lines[1:1 + ne]:
        parts = [int(p) for p in ln.split()]
        etype, ntags = parts[1], parts[2]
        if ntags < 1:
            raise ValueError("element without physical tag")
        phys_tag = parts[3]
        conn = parts[3 + ntags:]
        if etype == 2:
            tris.append([remap[c] for c in conn])
            ttags.append(phys_tag)
        elif etype == 1:
            edges.append([remap[c] for c in conn])
            etags.append(phys_tag)
        else:
            raise ValueError(f"unsupported element type {etype}")

    if not tris:
        raise ValueError("mesh file contains no triangles")
    tri_arr = np.asarray(tris, dtype=np.int64)
    # enforce positive orientation
    p = coords
    d1 = p[tri_arr[:, 1]] - p[tri_arr[:, 0]]
    d2 = p[tri_arr[:, 2]] - p[tri_arr[:, 0]]
    flip = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) < 0
    tri_arr[flip] = tri_arr[flip][:, [0, 2, 1]]

    for t in np.unique(np.asarray(ttags)):
        region_names.setdefault(int(t), f"region_{t}")
    for t in np.unique(np.asarray(etags, dtype=np.int64)) if etags else []:
        boundary_names.setdefault(int(t), f"boundary_{t}")

    return Mesh(nodes=coords, triangles=tri_arr,
                triangle_tags=np.asarray(ttags, dtype=np.int64),
                boundary_edges=(np.asarray(edges, dtype=np.int64)
                                if edges else np.empty((0, 2), dtype=np.int64)),
                boundary_edge_tags=np.asarray(etags, dtype=np.int64),
                region_names=region_names, boundary_names=boundary_names)


def write_msh(mesh: Mesh, path) -> None:
    """Write the mesh as ASCII MSH 2.2 (the format import_msh reads)."""
    with open(path, "w") as f:
        f.write("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n")
        f.write("$PhysicalNames\n")
        f.write(f"{len(mesh.region_names) + len(mesh.boundary_names)}\n")
        for bid, name in sorted(mesh.boundary_names.items()):
            f.write(f'1 {bid} "{name}"\n')
        for rid, name in sorted(mesh.region_names.items()):
            f.write(f'2 {rid} "{name}"\n')
        f.write("$EndPhysicalNames\n$Nodes\n")
        f.write(f"{mesh.num_nodes}\n")
        for k, (x, z) in enumerate(mesh.nodes, start=1):
            f.write(f"{k} {x:.17g} {z:.17g} 0\n")
        f.write("$EndNodes\n$Elements\n")
        f.write(f"{len(mesh.boundary_edges) + mesh.num_triangles}\n")
        eid = 1
        for (a, b), t in zip(mesh.boundary_edges, mesh.boundary_edge_tags):
            f.write(f"{eid} 1 2 {t} {t} {a + 1} {b + 1}\n")
            eid += 1
        for (a, b, c), t in zip(mesh.triangles, mesh.triangle_tags):
            f.write(f"{eid} 2 2 {t} {t} {a + 1} {b + 1} {c + 1}\n")
            eid += 1
        f.write("$EndElements\n")
