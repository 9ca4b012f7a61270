"""Triangle quadrature rules and surface integral assembly.

Two integrand modes are supported: ``exact_f`` evaluates the integrand at the
curved chart points, ``interp_f`` samples it only at the projected nodes (on
the surface) and integrates its degree-k interpolant.  Totals are reduced
pairwise over an intrinsic canonical element order, so results are
bit-reproducible and independent of element traversal or thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import quadrules
from .curved import ElementBatch, CurvedElement, build_surface_elements
from .errors import DegenerateJacobian, IntegrationError, UnsupportedDegree
from .refmesh import FlatMesh
from .surfaces import DEFAULT_MAX_ITER, DEFAULT_TOL, ImplicitSurface

MODE_EXACT = "exact_f"
MODE_INTERP = "interp_f"


@dataclass(frozen=True)
class QuadratureRule:
    """Positive-weight rule on the reference triangle, exact to ``degree``."""

    degree: int
    points: np.ndarray    # (n, 2)
    weights: np.ndarray   # (n,), sums to 1/2


@dataclass(frozen=True)
class IntegralResult:
    value: float
    n_elements: int
    mode: str
    k: int


def monomial_integral(a: int, b: int) -> float:
    """Exact integral of s^a t^b over the reference triangle: a! b!/(a+b+2)!."""
    return math.factorial(a) * math.factorial(b) / math.factorial(a + b + 2)


def _verify_rule(rule: QuadratureRule, tol: float = 1e-13) -> None:
    """Abort if an embedded table fails the monomial-moment oracle."""
    s, t = rule.points[:, 0], rule.points[:, 1]
    if np.any(rule.weights <= 0.0):
        raise AssertionError(f"degree-{rule.degree} rule has nonpositive weights")
    if np.any(s <= 0.0) or np.any(t <= 0.0) or np.any(s + t >= 1.0):
        raise AssertionError(f"degree-{rule.degree} rule has boundary/exterior points")
    for a in range(rule.degree + 1):
        for b in range(rule.degree + 1 - a):
            got = float(rule.weights @ (s**a * t**b))
            if abs(got - monomial_integral(a, b)) > tol:
                raise AssertionError(
                    f"degree-{rule.degree} rule fails on s^{a} t^{b}: "
                    f"{got!r} vs {monomial_integral(a, b)!r}")


_rule_cache: dict[int, QuadratureRule] = {}


def builtin_rule(degree: int) -> QuadratureRule:
    """Embedded symmetric rule exact to the requested degree (1..12)."""
    if not isinstance(degree, int) or not 1 <= degree <= 12:
        raise UnsupportedDegree(f"no embedded rule of degree {degree!r}")
    rule = _rule_cache.get(degree)
    if rule is None:
        pts, wts = quadrules.rule_table(degree)
        rule = QuadratureRule(degree=degree, points=pts, weights=wts)
        _verify_rule(rule)
        _rule_cache[degree] = rule
    return rule


def pairwise_sum(values: np.ndarray) -> float:
    """Deterministic pairwise reduction (order fixed by the input array)."""
    vals = np.asarray(values, dtype=float)
    n = len(vals)
    if n == 0:
        return 0.0
    vals = vals.copy()
    while n > 1:
        half = n // 2
        vals[:half] += vals[n - half:n]
        n = n - half
    return float(vals[0])


def _canonical_order(mesh: FlatMesh) -> np.ndarray:
    """Element order keyed by sorted global vertex ids (traversal-invariant)."""
    key = np.sort(mesh.faces, axis=1)
    return np.lexsort((key[:, 2], key[:, 1], key[:, 0]))


def _element_values(batch: ElementBatch, rule: QuadratureRule, mode: str,
                    f: Callable, surface: ImplicitSurface,
                    chunk: int = 512, threads: int = 1) -> np.ndarray:
    """Per-element integral values, vectorized over chunks of elements."""
    basis = batch.basis
    L = basis.eval(rule.points)                   # (q, N)
    Ls, Lt = basis.eval_grad(rule.points)         # (q, N) each
    w = rule.weights
    centroid_L = basis.eval(np.array([[1.0 / 3.0, 1.0 / 3.0]]))[0]
    centroid_s, centroid_t = basis.eval_grad(np.array([[1.0 / 3.0, 1.0 / 3.0]]))

    if mode == MODE_INTERP:
        f_nodal_unique = np.asarray(f(batch.unique_nodes), dtype=float)
    elif mode != MODE_EXACT:
        raise ValueError(f"unknown integration mode {mode!r}")

    out = np.empty(batch.n_elements)
    failures: list[tuple[int, Exception]] = []

    def run_chunk(lo: int) -> None:
        hi = min(lo + chunk, batch.n_elements)
        nodes = batch.element_nodes(slice(lo, hi))           # (C, N, 3)
        pts = np.einsum("qn,cnd->cqd", L, nodes)
        js = np.einsum("qn,cnd->cqd", Ls, nodes)
        jt = np.einsum("qn,cnd->cqd", Lt, nodes)
        ee = np.einsum("cqd,cqd->cq", js, js)
        gg = np.einsum("cqd,cqd->cq", jt, jt)
        ff = np.einsum("cqd,cqd->cq", js, jt)
        det = ee * gg - ff * ff
        if np.any(det <= 0.0):
            for ci in np.flatnonzero(np.any(det <= 0.0, axis=1)):
                failures.append((lo + int(ci),
                                 DegenerateJacobian("metric determinant <= 0")))
            det = np.maximum(det, 0.0)
        metric = np.sqrt(det)

        # orientation sanity at the centroid: a folded chart flips relative to
        # the flat parametrization of the same face
        c_pt = np.einsum("n,cnd->cd", centroid_L, nodes)
        c_js = np.einsum("n,cnd->cd", centroid_s[0], nodes)
        c_jt = np.einsum("n,cnd->cd", centroid_t[0], nodes)
        normals = np.asarray(surface.grad_phi(c_pt), dtype=float)
        tri = batch.mesh.vertices[batch.mesh.faces[lo:hi]]
        flat_cross = np.cross(tri[:, 2] - tri[:, 0], tri[:, 1] - tri[:, 0])
        orient = (np.einsum("cd,cd->c", np.cross(c_js, c_jt), normals)
                  * np.einsum("cd,cd->c", flat_cross, normals))
        if np.any(orient <= 0.0):
            for ci in np.flatnonzero(orient <= 0.0):
                failures.append((lo + int(ci),
                                 DegenerateJacobian("chart folds against the normal")))

        if mode == MODE_EXACT:
            fvals = np.asarray(f(pts), dtype=float)
            if fvals.shape != pts.shape[:-1]:
                fvals = np.broadcast_to(fvals, pts.shape[:-1])
        else:
            f_nodal = f_nodal_unique[batch.node_index[lo:hi]]   # (C, N)
            fvals = np.einsum("qn,cn->cq", L, f_nodal)
        out[lo:hi] = (fvals * metric) @ w

    starts = range(0, batch.n_elements, chunk)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_chunk, starts))
    else:
        for lo in starts:
            run_chunk(lo)

    if failures:
        failures.sort(key=lambda t: t[0])
        raise IntegrationError(failures)
    return out


def integrate_element(elem: CurvedElement, f: Callable, rule: QuadratureRule,
                      mode: str = MODE_EXACT) -> float:
    """Integral of f over a single curved element."""
    basis = elem.basis
    L = basis.eval(rule.points)
    Ls, Lt = basis.eval_grad(rule.points)
    pts = np.einsum("qn,nd->qd", L, elem.projected_nodes)
    js = Ls @ elem.projected_nodes
    jt = Lt @ elem.projected_nodes
    det = (np.einsum("qd,qd->q", js, js) * np.einsum("qd,qd->q", jt, jt)
           - np.einsum("qd,qd->q", js, jt) ** 2)
    if np.any(det <= 0.0):
        raise DegenerateJacobian("metric determinant <= 0 at a quadrature point")
    metric = np.sqrt(det)
    if mode == MODE_EXACT:
        fvals = np.asarray(f(pts), dtype=float)
        if fvals.shape != (len(pts),):
            fvals = np.broadcast_to(fvals, (len(pts),))
    elif mode == MODE_INTERP:
        nodal = np.asarray(f(elem.projected_nodes), dtype=float)
        fvals = L @ nodal
    else:
        raise ValueError(f"unknown integration mode {mode!r}")
    return float((fvals * metric) @ rule.weights)


def integrate_surface(mesh: FlatMesh, surface: ImplicitSurface, f: Callable,
                      k: int, rule: QuadratureRule, mode: str = MODE_INTERP,
                      threads: int = 1, batch: ElementBatch | None = None,
                      project_tol: float = DEFAULT_TOL,
                      project_max_iter: int = DEFAULT_MAX_ITER) -> IntegralResult:
    """Integral of f over the degree-k curved triangulation of the mesh."""
    if batch is None:
        batch = build_surface_elements(mesh, surface, k, tol=project_tol,
                                       max_iter=project_max_iter)
    values = _element_values(batch, rule, mode, f, surface, threads=threads)
    order = _canonical_order(mesh)
    total = pairwise_sum(values[order])
    return IntegralResult(value=total, n_elements=batch.n_elements, mode=mode, k=k)


def constant_one(pts: np.ndarray) -> np.ndarray:
    """The integrand f = 1 (vectorized)."""
    pts = np.asarray(pts)
    return np.ones(pts.shape[:-1])
