"""Shared P1 finite-element machinery on triangle meshes.

Quadrature uses the interior 3-point rule (degree 2, barycentric
permutations of (2/3, 1/6, 1/6)); its points stay strictly inside each
triangle, so 1/rho weighted integrands remain finite on elements touching
the symmetry axis.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

# interior 3-point rule, exact for quadratics
QP = np.array([[2 / 3, 1 / 6, 1 / 6],
               [1 / 6, 2 / 3, 1 / 6],
               [1 / 6, 1 / 6, 2 / 3]])
QW = np.array([1 / 3, 1 / 3, 1 / 3])

# 2-point Gauss rule on [0, 1], exact for cubics
EDGE_QP = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])
EDGE_QW = np.array([0.5, 0.5])


class ElementData:
    """Precomputed per-element geometry for P1 assembly.

    Attributes
    ----------
    tris : (m, 3) node indices
    area : (m,) triangle areas
    grad : (m, 3, 2) gradients of the three nodal shape functions
    pts : (m, 3, 2) physical quadrature points
    rho_q : (m, 3) radius at each quadrature point
    w_over_rho : (m,) sum_q QW_q / rho_q
    w_rho : (m,) sum_q QW_q * rho_q  (equals the centroid radius)
    """

    def __init__(self, mesh):
        p = mesh.nodes
        t = np.asarray(mesh.triangles)
        self.tris = t
        e1 = p[t[:, 1]] - p[t[:, 0]]
        e2 = p[t[:, 2]] - p[t[:, 0]]
        det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        if np.any(det <= 0):
            raise ValueError("mesh contains non-positively oriented triangles")
        self.area = 0.5 * det
        # grad lambda = J^{-T} grad_ref lambda with J columns (e1, e2)
        inv_det = 1.0 / det
        jinv_t = np.empty((len(t), 2, 2))
        jinv_t[:, 0, 0] = e2[:, 1] * inv_det
        jinv_t[:, 0, 1] = -e1[:, 1] * inv_det
        jinv_t[:, 1, 0] = -e2[:, 0] * inv_det
        jinv_t[:, 1, 1] = e1[:, 0] * inv_det
        gref = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
        # grad[m, i, :] = jinv_t[m] @ gref[i]
        self.grad = np.einsum("mxy,iy->mix", jinv_t, gref)
        # P1 gradients must reproduce linear fields exactly
        check = np.einsum("mi,mix->mx", p[t][:, :, 0], self.grad)
        assert np.allclose(check, [1.0, 0.0], atol=1e-9)
        self.pts = np.einsum("qi,mix->mqx", QP, p[t])
        self.rho_q = self.pts[:, :, 0]
        if np.any(self.rho_q <= 0):
            raise ValueError("quadrature point at rho <= 0 (mesh extends past the axis?)")
        self.w_over_rho = (QW[None, :] / self.rho_q).sum(axis=1)
        self.w_rho = (QW[None, :] * self.rho_q).sum(axis=1)

    @property
    def num_elements(self) -> int:
        return len(self.tris)


def assemble_csr(elem_mat: np.ndarray, tris: np.ndarray, n: int) -> sp.csr_matrix:
    """Scatter (m, 3, 3) element matrices into an n-by-n CSR matrix."""
    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    mat = sp.coo_matrix((elem_mat.ravel(), (rows, cols)), shape=(n, n))
    return mat.tocsr()


def assemble_vector(elem_vec: np.ndarray, tris: np.ndarray, n: int) -> np.ndarray:
    """Scatter (m, 3) element vectors into a length-n array."""
    out = np.zeros(n, dtype=elem_vec.dtype)
    np.add.at(out, tris.ravel(), elem_vec.ravel())
    return out


def mass_pattern(weight_q: np.ndarray) -> np.ndarray:
    """Element mass matrices sum_q w[m, q] * v_i(q) * v_j(q), shape (m, 3, 3)."""
    return np.einsum("mq,qi,qj->mij", weight_q, QP, QP)


def interp_at_quad(values: np.ndarray, tris: np.ndarray) -> np.ndarray:
    """P1 field values at the quadrature points, shape (m, 3)."""
    return np.einsum("qi,mi->mq", QP, values[tris])


def edge_geometry(mesh, edge_idx: np.ndarray):
    """Lengths, quad radii and shape values for selected boundary edges.

    Returns (edges, length, rho_q (k, 2), vq (2 pts, 2 nodes)).
    """
    edges = mesh.boundary_edges[edge_idx]
    pa = mesh.nodes[edges[:, 0]]
    pb = mesh.nodes[edges[:, 1]]
    length = np.linalg.norm(pb - pa, axis=1)
    rho_q = pa[:, None, 0] * (1 - EDGE_QP)[None, :] + pb[:, None, 0] * EDGE_QP[None, :]
    vq = np.column_stack([1 - EDGE_QP, EDGE_QP])  # vq[q, local node]
    return edges, length, rho_q, vq


def locate_points(mesh, points: np.ndarray, tol: float = 1e-10):
    """Containing triangle and barycentric coordinates for each point.

    Ties (points on shared edges) go to the lowest triangle index. Raises if
    a point lies outside the mesh.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    p = mesh.nodes
    t = mesh.triangles
    p0 = p[t[:, 0]]
    e1 = p[t[:, 1]] - p0
    e2 = p[t[:, 2]] - p0
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    tri_ids = np.empty(len(pts), dtype=np.int64)
    lams = np.empty((len(pts), 3))
    for k, pt in enumerate(pts):
        d = pt[None, :] - p0
        l1 = (d[:, 0] * e2[:, 1] - d[:, 1] * e2[:, 0]) / det
        l2 = (e1[:, 0] * d[:, 1] - e1[:, 1] * d[:, 0]) / det
        l0 = 1.0 - l1 - l2
        ok = (l0 >= -tol) & (l1 >= -tol) & (l2 >= -tol)
        idx = np.nonzero(ok)[0]
        if len(idx) == 0:
            raise ValueError(f"point {tuple(pt)} lies outside the mesh")
        i = idx[0]
        tri_ids[k] = i
        lam = np.clip(np.array([l0[i], l1[i], l2[i]]), 0.0, 1.0)
        lams[k] = lam / lam.sum()
    return tri_ids, lams
