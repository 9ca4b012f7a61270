"""Curved elements: reference nodes mapped through the flat chart and projected.

Every reference node of a flat triangle (vertices included) is pushed through
the affine chart and projected onto the surface; interpolating the projected
nodes gives the element's polynomial chart.  For whole meshes the nodes are
deduplicated through canonical vertex/edge keys before projection, so shared
edge nodes of neighboring elements are bitwise identical (watertight).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateJacobian, IntegrationError, NoConvergence
from .interp import LagrangeBasis, lagrange_basis
from .refmesh import FlatMesh
from .surfaces import DEFAULT_MAX_ITER, DEFAULT_TOL, ImplicitSurface, project_many


@dataclass(frozen=True)
class CurvedElement:
    """Degree-k curved triangle parametrized over the reference triangle."""

    degree: int
    flat_vertices: np.ndarray     # (3, 3) parametrizing flat triangle
    projected_nodes: np.ndarray   # (N, 3) nodes on the surface
    basis: LagrangeBasis


@dataclass(frozen=True)
class MetricSample:
    """Chart point with Jacobian and area density at one reference point."""

    point: np.ndarray      # (3,)
    jacobian: np.ndarray   # (3, 2), columns d/ds and d/dt
    g: float               # sqrt(det(J^T J))


def affine_chart_points(flat_tri: np.ndarray, ref_pts: np.ndarray) -> np.ndarray:
    """Map reference (s, t) points onto the flat triangle q1,q2,q3."""
    q1, q2, q3 = flat_tri
    s = ref_pts[:, 0][:, None]
    t = ref_pts[:, 1][:, None]
    return q1 + (q3 - q1) * s + (q2 - q1) * t


def build_element(surface: ImplicitSurface, flat_tri, degree: int,
                  basis: Optional[LagrangeBasis] = None,
                  tol: float = DEFAULT_TOL,
                  max_iter: int = DEFAULT_MAX_ITER) -> CurvedElement:
    """Project every reference node of one flat triangle onto the surface."""
    flat_tri = np.asarray(flat_tri, dtype=float)
    if basis is None:
        basis = lagrange_basis(degree)
    flat_nodes = affine_chart_points(flat_tri, basis.nodes)
    try:
        projected, _, _, _ = project_many(surface, flat_nodes, tol=tol,
                                          max_iter=max_iter)
    except NoConvergence as exc:
        raise NoConvergence(exc.iterations, exc.residual,
                            f"projection failed for element node(s) {exc.indices}: "
                            f"{exc}", indices=exc.indices) from exc
    elem = CurvedElement(degree=degree, flat_vertices=flat_tri,
                         projected_nodes=projected, basis=basis)
    _check_orientation(surface, elem)
    return elem


def _check_orientation(surface: ImplicitSurface, elem: CurvedElement,
                       face: Optional[int] = None) -> None:
    """A folded chart flips against the flat parametrization's orientation."""
    sample = chart_eval(elem, np.array([1.0 / 3.0, 1.0 / 3.0]), _check=False)
    cross = np.cross(sample.jacobian[:, 0], sample.jacobian[:, 1])
    normal = np.asarray(surface.grad_phi(sample.point), dtype=float)
    q1, q2, q3 = elem.flat_vertices
    flat_cross = np.cross(q3 - q1, q2 - q1)
    if float(cross @ normal) * float(flat_cross @ normal) <= 0.0 or sample.g <= 0.0:
        where = "" if face is None else f" (face {face})"
        raise DegenerateJacobian(
            f"curved chart is not orientation-preserving{where}; mesh too coarse")


def chart_eval(elem: CurvedElement, ref_pt, _check: bool = True) -> MetricSample:
    """Chart point, Jacobian and metric factor at one reference point."""
    ref = np.asarray(ref_pt, dtype=float)[None, :]
    L = elem.basis.eval(ref)[0]
    ds, dt = elem.basis.eval_grad(ref)
    point = L @ elem.projected_nodes
    jac = np.column_stack([ds[0] @ elem.projected_nodes,
                           dt[0] @ elem.projected_nodes])
    gram = jac.T @ jac
    det = gram[0, 0] * gram[1, 1] - gram[0, 1] * gram[1, 0]
    if _check and det <= 0.0:
        raise DegenerateJacobian(f"metric determinant {det:.3e} <= 0")
    g = float(np.sqrt(max(det, 0.0)))
    return MetricSample(point=point, jacobian=jac, g=g)


def element_diameter(elem: CurvedElement) -> float:
    """Longest side of the parametrizing flat triangle."""
    q = elem.flat_vertices
    return float(max(np.linalg.norm(q[0] - q[1]), np.linalg.norm(q[1] - q[2]),
                     np.linalg.norm(q[2] - q[0])))


# ---------------------------------------------------------------------------
# mesh-level construction with watertight node sharing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ElementBatch:
    """All curved elements of a mesh, sharing one deduplicated node table."""

    degree: int
    basis: LagrangeBasis
    mesh: FlatMesh
    node_index: np.ndarray        # (F, N) rows of indices into unique_nodes
    unique_nodes: np.ndarray      # (U, 3) projected node coordinates

    @property
    def n_elements(self) -> int:
        return len(self.node_index)

    def element_nodes(self, faces=slice(None)) -> np.ndarray:
        """(F', N, 3) projected nodes gathered per element."""
        return self.unique_nodes[self.node_index[faces]]

    def element(self, face: int) -> CurvedElement:
        return CurvedElement(
            degree=self.degree,
            flat_vertices=self.mesh.vertices[self.mesh.faces[face]],
            projected_nodes=self.unique_nodes[self.node_index[face]],
            basis=self.basis)


def _classify_lattice(lattice: np.ndarray, degree: int):
    """Split reference lattice nodes into vertex/edge/interior descriptors.

    Returns a list of per-node tags: ("v", local_vertex), ("e", local_a,
    local_b, numerator from local_a) or ("i",).  Local vertices follow the
    chart convention (0,0) -> q1, (0,1) -> q2, (1,0) -> q3.
    """
    k = degree
    tags = []
    for i, j in lattice:
        i, j = int(i), int(j)
        if i == 0 and j == 0:
            tags.append(("v", 0))
        elif i == 0 and j == k:
            tags.append(("v", 1))
        elif i == k and j == 0:
            tags.append(("v", 2))
        elif i == 0:                     # edge q1-q2, parameter j/k from q1
            tags.append(("e", 0, 1, j))
        elif j == 0:                     # edge q1-q3, parameter i/k from q1
            tags.append(("e", 0, 2, i))
        elif i + j == k:                 # edge q2-q3, parameter i/k from q2
            tags.append(("e", 1, 2, i))
        else:
            tags.append(("i", i, j))
    return tags


def build_surface_elements(mesh: FlatMesh, surface: ImplicitSurface, degree: int,
                           basis: Optional[LagrangeBasis] = None,
                           tol: float = DEFAULT_TOL,
                           max_iter: int = DEFAULT_MAX_ITER) -> ElementBatch:
    """Curved elements for every face, with shared-edge nodes deduplicated.

    Edge-node flat coordinates are computed from the canonical (smaller global
    vertex first) parametrization, so both adjacent faces name the identical
    floating-point point and receive the identical projection.
    """
    if basis is None:
        basis = lagrange_basis(degree)
    k = degree
    tags = _classify_lattice(basis.node_set.lattice, k)
    n_nodes = basis.count
    faces = mesh.faces
    verts = mesh.vertices

    key_index: dict = {}
    flat_rows: list[np.ndarray] = []
    node_index = np.empty((len(faces), n_nodes), dtype=np.int64)

    for fi, face in enumerate(faces):
        g = (int(face[0]), int(face[1]), int(face[2]))
        for ni, tag in enumerate(tags):
            if tag[0] == "v":
                key = ("v", g[tag[1]])
                flat = None
            elif tag[0] == "e":
                ga, gb, num = g[tag[1]], g[tag[2]], tag[3]
                if ga < gb:
                    key = ("e", ga, gb, num)
                else:
                    key = ("e", gb, ga, k - num)
                flat = None
            else:
                key = ("f", fi, tag[1], tag[2])
                flat = (verts[g[0]]
                        + (verts[g[2]] - verts[g[0]]) * (tag[1] / k)
                        + (verts[g[1]] - verts[g[0]]) * (tag[2] / k))
            idx = key_index.get(key)
            if idx is None:
                if flat is None:
                    if key[0] == "v":
                        flat = verts[key[1]]
                    else:
                        va, vb = verts[key[1]], verts[key[2]]
                        flat = va + (vb - va) * (key[3] / k)
                idx = len(flat_rows)
                flat_rows.append(flat)
                key_index[key] = idx
            node_index[fi, ni] = idx

    flat_nodes = np.array(flat_rows)
    try:
        projected, _, _, _ = project_many(surface, flat_nodes, tol=tol,
                                          max_iter=max_iter)
    except NoConvergence as exc:
        raise IntegrationError(_locate_failures(node_index, exc)) from exc
    return ElementBatch(degree=degree, basis=basis, mesh=mesh,
                        node_index=node_index, unique_nodes=projected)


def _locate_failures(node_index: np.ndarray, exc: NoConvergence):
    """Attribute failing unique-node indices to (face, local node) pairs."""
    failures = []
    for uid in exc.indices[:50]:
        faces, locals_ = np.nonzero(node_index == uid)
        if len(faces):
            failures.append((int(faces[0]), NoConvergence(
                exc.iterations, exc.residual,
                f"node {int(locals_[0])} did not converge "
                f"(residual {exc.residual:.3e})")))
    return failures or [(-1, exc)]
