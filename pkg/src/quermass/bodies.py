"""Convex body data model.

A body is one of five representations (ball, box, ellipsoid, V-polytope,
H-polytope) with its ambient dimension and optional symmetric/centered
flags.  Bodies are immutable after construction; derived data (hulls,
halfspace forms, bounding boxes) is cached on first use, so all operations
stay re-entrant.

Sections and projections are re-expressed in an orthonormal coordinate
system of the subspace, so the result's ambient dimension is the subspace
dimension.  Empty sections are signalled by returning None rather than by
raising: flat-average integrands vanish outside the support and estimators
count such samples as zero.
"""
from __future__ import annotations

import hashlib
import logging
import math

import numpy as np
from scipy.optimize import linprog

from quermass import polytope as pt
from quermass.core import RngStream, omega

logger = logging.getLogger(__name__)

MEMBERSHIP_TOL = 1e-9
DEGENERACY_RTOL = 1e-10


class BodyError(Exception):
    pass


class CapabilityError(BodyError):
    """Operation unsupported for this representation / dimension."""


class DegenerateBodyError(BodyError):
    pass


class UnboundedBodyError(BodyError):
    pass


class SamplingEfficiencyError(BodyError):
    """Rejection sampling acceptance rate fell below the floor."""


class Flags:
    """symmetric: x in K implies -x in K; centered: barycenter at origin."""

    __slots__ = ("symmetric", "centered")

    def __init__(self, symmetric: bool = False, centered: bool = False):
        self.symmetric = bool(symmetric)
        self.centered = bool(centered) or bool(symmetric)

    def __repr__(self) -> str:
        return f"Flags(symmetric={self.symmetric}, centered={self.centered})"


class ConvexBody:
    """Tagged union of convex-body representations; treat as immutable."""

    __slots__ = (
        "kind",
        "dim",
        "flags",
        "center",
        "radius",
        "halfwidths",
        "shape",
        "vertices",
        "normals",
        "offsets",
        "_cache",
    )

    def __init__(self, kind: str, dim: int, flags: Flags):
        self.kind = kind
        self.dim = dim
        self.flags = flags
        self._cache: dict = {}

    def __repr__(self) -> str:
        return f"ConvexBody({self.kind}, dim={self.dim}, {self.flags})"

    def describe(self) -> str:
        tag = self._cache.get("name")
        return tag if tag else f"{self.kind}-{self.dim}d"

    def with_name(self, name: str) -> "ConvexBody":
        self._cache["name"] = name
        return self


def _as_basis(subspace) -> np.ndarray:
    basis = getattr(subspace, "basis", subspace)
    b = np.asarray(basis, dtype=float)
    if b.ndim != 2:
        raise ValueError("subspace basis must be an n x k matrix")
    gram = b.T @ b
    if not np.allclose(gram, np.eye(b.shape[1]), atol=1e-9):
        raise ValueError("subspace basis must have orthonormal columns")
    return b


def ball(center, radius: float, flags: Flags | None = None) -> ConvexBody:
    c = np.atleast_1d(np.asarray(center, dtype=float))
    if radius <= 0:
        raise ValueError("radius must be positive")
    sym = bool(np.all(c == 0.0))
    body = ConvexBody("ball", len(c), flags or Flags(symmetric=sym, centered=sym))
    body.center = c
    body.radius = float(radius)
    return body


def box(center, halfwidths, flags: Flags | None = None) -> ConvexBody:
    c = np.atleast_1d(np.asarray(center, dtype=float))
    h = np.atleast_1d(np.asarray(halfwidths, dtype=float))
    if len(c) != len(h) or np.any(h <= 0):
        raise ValueError("halfwidths must be positive and match the center")
    sym = bool(np.all(c == 0.0))
    body = ConvexBody("box", len(c), flags or Flags(symmetric=sym, centered=sym))
    body.center = c
    body.halfwidths = h
    return body


def ellipsoid(center, shape, flags: Flags | None = None) -> ConvexBody:
    c = np.atleast_1d(np.asarray(center, dtype=float))
    a = np.asarray(shape, dtype=float)
    if a.shape != (len(c), len(c)) or not np.allclose(a, a.T, atol=1e-12):
        raise ValueError("shape must be a symmetric matrix matching the center")
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise ValueError("shape matrix must be positive definite") from exc
    sym = bool(np.all(c == 0.0))
    body = ConvexBody("ellipsoid", len(c), flags or Flags(symmetric=sym, centered=sym))
    body.center = c
    body.shape = a
    body._cache["chol"] = chol
    return body


def vpolytope(vertices, flags: Flags | None = None, reduce: bool = True,
              validated: bool = False) -> ConvexBody:
    v = np.atleast_2d(np.asarray(vertices, dtype=float))
    n = v.shape[1]
    body = ConvexBody("vpolytope", n, flags or Flags())
    if validated:
        body.vertices = v
        return body
    if len(v) < n + 1 or pt.affine_rank(v) < n:
        # Flat body: kept verbatim (support/projection/width still work);
        # volume is 0 and full-dimensional operations are unavailable.
        body.vertices = v
        body._cache["degenerate"] = True
        return body
    if reduce and n <= pt.MAX_DIM:
        if n == 1:
            body.vertices = np.array([[v[:, 0].min()], [v[:, 0].max()]])
        else:
            hull = pt.convex_hull(v, n)
            body.vertices = hull.vertices
            body._cache["hull"] = hull
    else:
        body.vertices = v
    return body


def hpolytope(
    normals, offsets, flags: Flags | None = None, check_bounded: bool = True
) -> ConvexBody:
    a = np.atleast_2d(np.asarray(normals, dtype=float))
    b = np.atleast_1d(np.asarray(offsets, dtype=float))
    if len(a) != len(b):
        raise ValueError("normals and offsets disagree in length")
    nrm = np.linalg.norm(a, axis=1)
    if np.any(nrm == 0):
        raise ValueError("zero normal row")
    a = a / nrm[:, None]
    b = b / nrm
    body = ConvexBody("hpolytope", a.shape[1], flags or Flags())
    body.normals = a
    body.offsets = b
    if check_bounded:
        _bbox_hpoly(body)  # raises UnboundedBodyError if needed
        centre, inradius = _chebyshev(a, b)
        if centre is None or inradius <= 1e-9:
            raise DegenerateBodyError("halfspace intersection has empty interior")
        body._cache["chebyshev"] = (centre, inradius)
    return body


def _chebyshev(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray | None, float]:
    """Center and radius of the largest inscribed ball of {x: ax <= b}."""
    m, d = a.shape
    c = np.zeros(d + 1)
    c[-1] = -1.0
    a_ext = np.hstack([a, np.ones((m, 1))])
    res = linprog(c, A_ub=a_ext, b_ub=b, bounds=[(None, None)] * d + [(0, None)],
                  method="highs")
    if res.status != 0:
        return None, -math.inf
    return res.x[:d], float(res.x[d])


# ---------------------------------------------------------------------------
# cached derived data


def _hull(body: ConvexBody) -> pt.HullComplex:
    hull = body._cache.get("hull")
    if hull is None:
        if body.kind == "vpolytope":
            hull = pt.convex_hull(body.vertices, body.dim)
        elif body.kind in ("hpolytope", "box"):
            hull = pt.convex_hull(_vrep(body), body.dim)
        else:
            raise CapabilityError(f"no hull for kind {body.kind}")
        body._cache["hull"] = hull
    return hull


def _hrep(body: ConvexBody) -> tuple[np.ndarray, np.ndarray]:
    """Normalized halfspace form (A, b) for polytope-like bodies."""
    hrep = body._cache.get("hrep")
    if hrep is None:
        if body.kind == "hpolytope":
            hrep = (body.normals, body.offsets)
        elif body.kind == "box":
            eye = np.eye(body.dim)
            a = np.vstack([eye, -eye])
            b = np.concatenate(
                [body.center + body.halfwidths, -(body.center - body.halfwidths)]
            )
            hrep = (a, b)
        elif body.kind == "vpolytope":
            if body.dim == 1:
                lo, hi = body.vertices[:, 0].min(), body.vertices[:, 0].max()
                hrep = (np.array([[1.0], [-1.0]]), np.array([hi, -lo]))
            else:
                hrep = _hull(body).facet_matrix()
        else:
            raise CapabilityError(f"no halfspace form for kind {body.kind}")
        body._cache["hrep"] = hrep
    return hrep


def _vrep(body: ConvexBody) -> np.ndarray:
    verts = body._cache.get("vrep")
    if verts is None:
        if body.kind == "vpolytope":
            verts = body.vertices
        elif body.kind == "box":
            corners = np.array(
                np.meshgrid(*[[-1.0, 1.0]] * body.dim, indexing="ij")
            ).reshape(body.dim, -1).T
            verts = body.center + corners * body.halfwidths
        elif body.kind == "hpolytope":
            interior = body._cache.get("chebyshev")
            if interior is not None and len(body.offsets) > 24:
                verts = pt.halfspace_intersection_vertices(
                    body.normals, body.offsets, interior[0]
                )
            else:
                verts = pt.vertex_enumeration(
                    body.normals, body.offsets, check_bounded=False
                )
            if len(verts) <= body.dim:
                raise DegenerateBodyError("halfspace intersection has no interior")
        else:
            raise CapabilityError(f"no vertex form for kind {body.kind}")
        body._cache["vrep"] = verts
    return verts


def bbox(body: ConvexBody) -> tuple[np.ndarray, np.ndarray]:
    cached = body._cache.get("bbox")
    if cached is None:
        if body.kind == "ball":
            cached = (body.center - body.radius, body.center + body.radius)
        elif body.kind == "box":
            cached = (body.center - body.halfwidths, body.center + body.halfwidths)
        elif body.kind == "ellipsoid":
            half = np.sqrt(np.diag(body.shape))
            cached = (body.center - half, body.center + half)
        elif body.kind == "vpolytope":
            cached = (body.vertices.min(axis=0), body.vertices.max(axis=0))
        else:
            cached = _bbox_hpoly(body)
        body._cache["bbox"] = cached
    return cached


def _bbox_hpoly(body: ConvexBody) -> tuple[np.ndarray, np.ndarray]:
    d = body.dim
    lo = np.empty(d)
    hi = np.empty(d)
    for i in range(d):
        for sign, dest in ((1.0, hi), (-1.0, lo)):
            c = np.zeros(d)
            c[i] = -sign
            res = linprog(c, A_ub=body.normals, b_ub=body.offsets,
                          bounds=[(None, None)] * d, method="highs")
            if res.status == 3:
                raise UnboundedBodyError("halfspace intersection is unbounded")
            if res.status != 0:
                raise DegenerateBodyError("infeasible halfspace intersection")
            dest[i] = sign * -res.fun
    return lo, hi


def circumradius(body: ConvexBody) -> float:
    """max ||x|| over the body (radius around the origin)."""
    if body.kind == "ball":
        return float(np.linalg.norm(body.center) + body.radius)
    if body.kind == "box":
        return float(np.linalg.norm(np.abs(body.center) + body.halfwidths))
    if body.kind == "ellipsoid":
        lam = np.linalg.eigvalsh(body.shape)[-1]
        return float(np.linalg.norm(body.center) + math.sqrt(lam))
    return float(np.linalg.norm(_vrep(body), axis=1).max())


def fingerprint(body: ConvexBody) -> str:
    h = hashlib.sha1()
    h.update(body.kind.encode())
    h.update(np.int64(body.dim).tobytes())
    for attr in ("center", "radius", "halfwidths", "shape", "vertices", "normals",
                 "offsets"):
        try:
            val = getattr(body, attr)
        except AttributeError:
            continue
        h.update(np.asarray(val, dtype=float).tobytes())
    h.update(bytes([body.flags.symmetric, body.flags.centered]))
    return h.hexdigest()


# ---------------------------------------------------------------------------
# basic operations


def support(body: ConvexBody, direction) -> float:
    """Support function h_K(u) = max over x in K of <x, u> for unit u."""
    u = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(u) - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    return float(support_batch(body, u[None, :])[0])


def support_batch(body: ConvexBody, directions: np.ndarray) -> np.ndarray:
    u = np.atleast_2d(np.asarray(directions, dtype=float))
    if body.kind == "ball":
        return u @ body.center + body.radius
    if body.kind == "box":
        return u @ body.center + np.abs(u) @ body.halfwidths
    if body.kind == "ellipsoid":
        quad = np.einsum("ij,jk,ik->i", u, body.shape, u)
        return u @ body.center + np.sqrt(np.maximum(quad, 0.0))
    if body.kind == "vpolytope":
        return (u @ body.vertices.T).max(axis=1)
    # H-polytope: one LP per direction
    out = np.empty(len(u))
    for i, ui in enumerate(u):
        res = linprog(-ui, A_ub=body.normals, b_ub=body.offsets,
                      bounds=[(None, None)] * body.dim, method="highs")
        if res.status == 3:
            raise UnboundedBodyError("support is unbounded")
        if res.status != 0:
            raise BodyError(f"support LP failed with status {res.status}")
        out[i] = -res.fun
    return out


def contains(body: ConvexBody, point, tol: float = MEMBERSHIP_TOL) -> bool:
    """Membership with tolerance on normalized constraint slack.

    V-polytope membership goes through a feasibility LP over convex
    coefficients, matching the representation rather than a derived form.
    """
    x = np.asarray(point, dtype=float)
    if x.shape != (body.dim,):
        raise ValueError("point dimension mismatch")
    if body.kind == "vpolytope":
        v = body.vertices
        m = len(v)
        a_eq = np.vstack([v.T, np.ones(m)])
        b_eq = np.concatenate([x, [1.0]])
        res = linprog(np.zeros(m), A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * m,
                      method="highs")
        return res.status == 0
    return bool(contains_batch(body, x[None, :], tol)[0])


def contains_batch(body: ConvexBody, points: np.ndarray,
                   tol: float = MEMBERSHIP_TOL) -> np.ndarray:
    x = np.atleast_2d(np.asarray(points, dtype=float))
    if body.kind == "ball":
        return np.linalg.norm(x - body.center, axis=1) <= body.radius + tol
    if body.kind == "ellipsoid":
        z = np.linalg.solve(body._cache["chol"], (x - body.center).T).T
        return np.einsum("ij,ij->i", z, z) <= 1.0 + tol
    a, b = _hrep(body)
    return (x @ a.T <= b + tol).all(axis=1)


def volume(body: ConvexBody) -> float:
    """Exact volume.  Degenerate polytopes yield 0 with a logged flag."""
    vol = body._cache.get("volume")
    if vol is None:
        if body.kind == "ball":
            vol = omega(body.dim) * body.radius ** body.dim
        elif body.kind == "box":
            vol = float(np.prod(2.0 * body.halfwidths))
        elif body.kind == "ellipsoid":
            vol = omega(body.dim) * math.sqrt(max(np.linalg.det(body.shape), 0.0))
        elif body._cache.get("degenerate"):
            vol = 0.0
        elif body.dim == 1:
            v = _vrep(body)[:, 0]
            vol = float(v.max() - v.min())
        else:
            try:
                vol = _hull(body).volume()
            except pt.DegenerateHullError:
                body._cache["degenerate"] = True
                logger.warning("degenerate %s: volume set to 0", body.kind)
                vol = 0.0
        body._cache["volume"] = vol
    return vol


def barycenter(body: ConvexBody) -> np.ndarray:
    bc = body._cache.get("barycenter")
    if bc is None:
        if body.kind in ("ball", "box", "ellipsoid"):
            bc = body.center.copy()
        elif body.dim == 1:
            v = _vrep(body)[:, 0]
            bc = np.array([0.5 * (v.max() + v.min())])
        else:
            bc = _hull(body).centroid()
        body._cache["barycenter"] = bc
    return bc


def translate(body: ConvexBody, shift) -> ConvexBody:
    t = np.asarray(shift, dtype=float)
    still_symmetric = body.flags.symmetric and np.allclose(t, 0.0)
    flags = Flags(symmetric=still_symmetric, centered=False)
    if body.kind == "ball":
        return ball(body.center + t, body.radius, flags)
    if body.kind == "box":
        return box(body.center + t, body.halfwidths, flags)
    if body.kind == "ellipsoid":
        return ellipsoid(body.center + t, body.shape, flags)
    if body.kind == "vpolytope":
        return vpolytope(body.vertices + t, flags, reduce=False)
    return hpolytope(body.normals, body.offsets + body.normals @ t, flags,
                     check_bounded=False)


def translate_to_centered(body: ConvexBody) -> ConvexBody:
    """Shift so that the barycenter sits at the origin (idempotent)."""
    bc = barycenter(body)
    out = translate(body, -bc)
    out.flags.centered = True
    if body.flags.symmetric and np.allclose(bc, 0.0, atol=1e-12):
        out.flags.symmetric = True
    return out


def scale(body: ConvexBody, factor: float) -> ConvexBody:
    if factor <= 0:
        raise ValueError("scale factor must be positive")
    flags = Flags(body.flags.symmetric, body.flags.centered)
    if body.kind == "ball":
        return ball(body.center * factor, body.radius * factor, flags)
    if body.kind == "box":
        return box(body.center * factor, body.halfwidths * factor, flags)
    if body.kind == "ellipsoid":
        return ellipsoid(body.center * factor, body.shape * factor ** 2, flags)
    if body.kind == "vpolytope":
        return vpolytope(body.vertices * factor, flags, reduce=False)
    return hpolytope(body.normals, body.offsets * factor, flags, check_bounded=False)


def transform_orthogonal(body: ConvexBody, q: np.ndarray) -> ConvexBody:
    """Image under an orthogonal map (boxes become V-polytopes)."""
    q = np.asarray(q, dtype=float)
    flags = Flags(body.flags.symmetric, body.flags.centered)
    if body.kind == "ball":
        return ball(q @ body.center, body.radius, flags)
    if body.kind == "ellipsoid":
        return ellipsoid(q @ body.center, q @ body.shape @ q.T, flags)
    if body.kind == "box":
        return vpolytope(_vrep(body) @ q.T, flags)
    if body.kind == "vpolytope":
        return vpolytope(body.vertices @ q.T, flags, reduce=False)
    return hpolytope(body.normals @ q.T, body.offsets, flags, check_bounded=False)


# ---------------------------------------------------------------------------
# projections and sections


def project(body: ConvexBody, subspace) -> ConvexBody:
    """Orthogonal projection onto a subspace, in that subspace's coordinates."""
    basis = _as_basis(subspace)
    n, k = basis.shape
    if n != body.dim or k >= body.dim:
        raise ValueError("projection subspace must have dimension < dim(K)")
    sym = body.flags.symmetric
    flags = Flags(symmetric=sym, centered=sym)
    if body.kind == "ball":
        return ball(basis.T @ body.center, body.radius, flags)
    if body.kind == "ellipsoid":
        return ellipsoid(basis.T @ body.center, basis.T @ body.shape @ basis, flags)
    verts = _vrep(body) @ basis
    if k == 1:
        return vpolytope(verts, flags)
    return vpolytope(verts, flags)


def affine_section(body: ConvexBody, subspace, offset_point) -> ConvexBody | None:
    """K intersected with (x + F), in F-coordinates; None when empty.

    offset_point must lie in the orthogonal complement of F.  Sections that
    are degenerate (touching the boundary within tolerance) also return
    None; estimators treat both as a zero contribution.
    """
    basis = _as_basis(subspace)
    n, k = basis.shape
    if n != body.dim:
        raise ValueError("subspace lives in the wrong ambient dimension")
    x = np.zeros(n) if offset_point is None else np.asarray(offset_point, dtype=float)
    if np.linalg.norm(basis.T @ x) > 1e-8 * (1.0 + np.linalg.norm(x)):
        raise ValueError("offset point must lie in the orthogonal complement")

    central = np.allclose(x, 0.0)
    sym = body.flags.symmetric and central
    flags = Flags(symmetric=sym, centered=sym)

    if body.kind == "ball":
        c_rel = body.center - x
        y0 = basis.T @ c_rel
        r2 = body.radius ** 2 - (c_rel @ c_rel - y0 @ y0)
        if r2 <= 1e-24:
            return None
        return ball(y0, math.sqrt(r2), flags)

    if body.kind == "ellipsoid":
        m = body._cache.get("inv_shape")
        if m is None:
            m = np.linalg.inv(body.shape)
            body._cache["inv_shape"] = m
        c_rel = body.center - x
        mq = basis.T @ m @ basis
        rhs = basis.T @ (m @ c_rel)
        y0 = np.linalg.solve(mq, rhs)
        s = c_rel @ m @ c_rel - y0 @ mq @ y0
        if s >= 1.0 - 1e-14:
            return None
        return ellipsoid(y0, np.linalg.inv(mq) * (1.0 - s), flags)

    a, b = _hrep(body)
    a_sec = a @ basis
    b_sec = b - a @ x
    nrm = np.linalg.norm(a_sec, axis=1)
    # Constraints orthogonal to the flat are either void or verdicts of emptiness.
    tiny = nrm <= 1e-12
    if np.any(b_sec[tiny] < -1e-9):
        return None
    a_sec, b_sec, nrm = a_sec[~tiny], b_sec[~tiny], nrm[~tiny]
    a_sec = a_sec / nrm[:, None]
    b_sec = b_sec / nrm

    # Hyperplane flat through a vertex-represented body: clip boundary edges
    # against the hyperplane instead of solving constraint systems.
    if k == n - 1 and body.kind in ("vpolytope", "box", "hpolytope"):
        pts = _clip_codim1(body, basis, x)
        if pts is None or len(pts) < k + 1 or pt.affine_rank(pts) < k:
            return None
        sec = vpolytope(pts, flags, validated=True)
        sec._cache["hrep"] = (a_sec, b_sec)
        return sec

    # Few constraints (or a planar flat): enumerate vertices outright, no LP.
    if len(b_sec) <= (64 if k <= 2 else 24):
        verts = pt.vertex_enumeration(a_sec, b_sec, check_bounded=False)
        if len(verts) < k + 1 or pt.affine_rank(verts) < k:
            return None
        sec = vpolytope(verts, flags, validated=True)
        sec._cache["hrep"] = (a_sec, b_sec)
        return sec

    centre, inradius = _chebyshev(a_sec, b_sec)
    if centre is None or inradius <= 1e-12 * (1.0 + circumradius(body)):
        return None
    verts = pt.halfspace_intersection_vertices(a_sec, b_sec, centre)
    if len(verts) < k + 1 or pt.affine_rank(verts) < k:
        return None
    sec = vpolytope(verts, flags, validated=True)
    sec._cache["hrep"] = (a_sec, b_sec)
    return sec


def _boundary_edges(body: ConvexBody) -> np.ndarray:
    """Vertex index pairs covering all boundary edges (from the boundary
    triangulation, so flat-face diagonals may appear; they are harmless
    for clipping since they lie on the boundary)."""
    edges = body._cache.get("tri_edges")
    if edges is None:
        if body.dim == 1:
            edges = np.array([[0, 1]])
        else:
            simplices = _hull(body).simplices
            pairs = set()
            for simplex in simplices:
                s = sorted(int(v) for v in simplex)
                for i in range(len(s)):
                    for jj in range(i + 1, len(s)):
                        pairs.add((s[i], s[jj]))
            edges = np.array(sorted(pairs), dtype=int)
        body._cache["tri_edges"] = edges
    return edges


def _clip_codim1(body: ConvexBody, basis: np.ndarray, x: np.ndarray
                 ) -> np.ndarray | None:
    """Vertices of the section of a polytope by the hyperplane x + span(basis),
    in basis coordinates: on-plane vertices plus crossed boundary edges."""
    q_full, _ = np.linalg.qr(basis, mode="complete")
    normal = q_full[:, -1]
    if body.kind == "vpolytope":
        verts = body.vertices
    else:
        verts = _vrep(body)
    if body.dim > 2 and body.kind == "vpolytope" and body._cache.get("hull") is None \
            and "tri_edges" not in body._cache:
        _hull(body)  # also validates full dimension
    scale = float(np.max(np.abs(verts))) + 1.0
    h = verts @ normal - normal @ x
    tol = 1e-12 * scale
    pieces = []
    on_plane = np.abs(h) <= tol
    if on_plane.any():
        pieces.append(verts[on_plane])
    edges = _boundary_edges(body)
    hi, hj = h[edges[:, 0]], h[edges[:, 1]]
    crossing = ((hi > tol) & (hj < -tol)) | ((hi < -tol) & (hj > tol))
    if crossing.any():
        e = edges[crossing]
        t = (h[e[:, 0]] / (h[e[:, 0]] - h[e[:, 1]]))[:, None]
        pieces.append(verts[e[:, 0]] + t * (verts[e[:, 1]] - verts[e[:, 0]]))
    if not pieces:
        return None
    ambient = np.vstack(pieces)
    return (ambient - x) @ basis


def central_section(body: ConvexBody, subspace) -> ConvexBody | None:
    return affine_section(body, subspace, None)


def minkowski_sum(a: ConvexBody, b: ConvexBody) -> ConvexBody:
    """Vertex-sum hull of two polytope-like bodies (dim <= 5)."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    if a.dim > 5:
        raise CapabilityError("minkowski_sum supports dim <= 5")
    if a.kind in ("ball", "ellipsoid") or b.kind in ("ball", "ellipsoid"):
        raise CapabilityError("minkowski_sum needs polytope-like summands")
    va, vb = _vrep(a), _vrep(b)
    sums = (va[:, None, :] + vb[None, :, :]).reshape(-1, a.dim)
    flags = Flags(symmetric=a.flags.symmetric and b.flags.symmetric)
    return vpolytope(sums, flags)


# ---------------------------------------------------------------------------
# sampling and distances


def sample_uniform(body: ConvexBody, count: int, rng: RngStream) -> np.ndarray:
    """count independent uniform points in the body.

    Balls, boxes and ellipsoids use closed-form transforms; polytopes use
    rejection from the bounding box with acceptance-rate tracking.
    """
    return sample_uniform_with(body, count, rng.generator())


def sample_uniform_with(body: ConvexBody, count: int,
                        gen: np.random.Generator) -> np.ndarray:
    """Like sample_uniform but drawing from an existing generator, so hot
    loops can share one stream instead of instantiating one per call."""
    n = body.dim
    if n == 1:
        lo, hi = bbox(body)
        return gen.uniform(lo[0], hi[0], size=(count, 1))
    if body.kind == "box":
        u = gen.uniform(-1.0, 1.0, size=(count, n))
        return body.center + u * body.halfwidths
    if body.kind in ("ball", "ellipsoid"):
        g = gen.standard_normal((count, n))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = gen.uniform(size=count) ** (1.0 / n)
        zb = g * r[:, None]
        if body.kind == "ball":
            return body.center + body.radius * zb
        return body.center + zb @ body._cache["chol"].T
    lo, hi = bbox(body)
    a, bvec = _hrep(body)
    out = np.empty((count, n))
    got = 0
    proposals = 0
    accepted = 0
    batch = max(4096, 2 * count)
    while got < count:
        u = gen.uniform(size=(batch, n)) * (hi - lo) + lo
        ok = (u @ a.T <= bvec + MEMBERSHIP_TOL).all(axis=1)
        proposals += batch
        accepted += int(ok.sum())
        take = min(count - got, int(ok.sum()))
        out[got : got + take] = u[ok][:take]
        got += take
        if proposals >= 100_000 and accepted < 1e-4 * proposals:
            raise SamplingEfficiencyError(
                f"acceptance rate {accepted / proposals:.2e} below 1e-4; "
                "precondition the body first"
            )
    body._cache["acceptance_rate"] = accepted / proposals
    return out


def distance_batch(body: ConvexBody, points: np.ndarray) -> np.ndarray:
    """Euclidean distance to the body (0 inside); closed forms only."""
    x = np.atleast_2d(np.asarray(points, dtype=float))
    if body.kind == "ball":
        return np.maximum(np.linalg.norm(x - body.center, axis=1) - body.radius, 0.0)
    if body.kind == "box":
        excess = np.maximum(np.abs(x - body.center) - body.halfwidths, 0.0)
        return np.linalg.norm(excess, axis=1)
    if body.kind == "ellipsoid":
        return _ellipsoid_distance(body, x)
    raise CapabilityError("use in_dilation for polytope distances")


def _ellipsoid_distance(body: ConvexBody, x: np.ndarray) -> np.ndarray:
    lam, u = np.linalg.eigh(body.shape)
    z = (x - body.center) @ u
    inside = np.einsum("ij,ij->i", z * z, 1.0 / lam[None, :] * np.ones_like(z)) <= 1.0
    out = np.zeros(len(x))
    idx = np.flatnonzero(~inside)
    if len(idx) == 0:
        return out
    zz = z[idx] ** 2
    lo = np.zeros(len(idx))
    hi = np.full(len(idx), math.sqrt(lam[-1]) + np.linalg.norm(z[idx], axis=1) * 1.0)
    hi = np.maximum(hi, 1.0)
    # g(t) = sum lam_i z_i^2/(lam_i+t)^2 is decreasing; find g(t)=1 by bisection
    for _ in range(8):
        g_hi = (zz * lam / (lam + hi[:, None]) ** 2).sum(axis=1)
        grow = g_hi > 1.0
        if not grow.any():
            break
        hi[grow] *= 2.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        g = (zz * lam / (lam + mid[:, None]) ** 2).sum(axis=1)
        high = g > 1.0
        lo[high] = mid[high]
        hi[~high] = mid[~high]
    t = 0.5 * (lo + hi)
    out[idx] = t * np.sqrt((zz / (lam + t[:, None]) ** 2).sum(axis=1))
    return out


def in_dilation(body: ConvexBody, points: np.ndarray, radius: float,
                max_iter: int = 400) -> np.ndarray:
    """Membership in K + radius*B, i.e. dist(x, K) <= radius.

    Closed forms where available; V/H-polytopes use a Frank-Wolfe distance
    certifier over the vertex set with primal/dual early exits.
    """
    x = np.atleast_2d(np.asarray(points, dtype=float))
    if body.kind in ("ball", "box", "ellipsoid"):
        return distance_batch(body, x) <= radius
    v = _vrep(body)
    a, b = _hrep(body)
    inside = (x @ a.T <= b + MEMBERSHIP_TOL).all(axis=1)
    result = inside.copy()
    active = np.flatnonzero(~inside)
    if len(active) == 0:
        return result
    xa = x[active]
    start = np.argmax(xa @ v.T, axis=1)
    y = v[start]
    undecided = np.ones(len(active), dtype=bool)
    for _ in range(max_iter):
        g = y - xa
        f = np.linalg.norm(g, axis=1)
        s_idx = np.argmin(g @ v.T, axis=1)
        s = v[s_idx]
        gap = np.einsum("ij,ij->i", g, y - s)
        lower = f - gap / np.maximum(f, 1e-300)
        newly_in = undecided & (f <= radius)
        newly_out = undecided & (lower > radius)
        result[active[newly_in]] = True
        undecided &= ~(newly_in | newly_out)
        if not undecided.any():
            break
        diff = s - y
        denom = np.einsum("ij,ij->i", diff, diff)
        step = np.clip(-np.einsum("ij,ij->i", g, diff) / np.maximum(denom, 1e-300),
                       0.0, 1.0)
        y = y + step[:, None] * diff
    else:
        # Unresolved points sit within numerical reach of the dilated
        # boundary; classify by the primal value and count them.
        result[active[undecided]] = f[undecided] <= radius
        if undecided.sum() > 0.005 * len(x):
            logger.warning("in_dilation left %d/%d points undecided",
                           int(undecided.sum()), len(x))
    return result


# ---------------------------------------------------------------------------
# body specification files


def body_from_spec(spec: dict) -> ConvexBody:
    """Build a body from its file representation (see the CLI schema)."""
    kind = spec.get("type")
    flags_spec = spec.get("flags", {})
    flags = Flags(
        symmetric=bool(flags_spec.get("symmetric", False)),
        centered=bool(flags_spec.get("centered", False)),
    )
    if kind == "ball":
        return ball(spec["center"], spec["radius"], flags)
    if kind == "box":
        return box(spec["center"], spec["halfwidths"], flags)
    if kind == "ellipsoid":
        return ellipsoid(spec["center"], spec["shape"], flags)
    if kind == "vpolytope":
        return vpolytope(spec["vertices"], flags)
    if kind == "hpolytope":
        return hpolytope(spec["normals"], spec["offsets"], flags)
    raise ValueError(f"unknown body type {kind!r}")


def body_to_spec(body: ConvexBody) -> dict:
    out: dict = {"type": body.kind, "dim": body.dim,
                 "flags": {"symmetric": body.flags.symmetric,
                           "centered": body.flags.centered}}
    if body.kind == "ball":
        out["center"] = body.center.tolist()
        out["radius"] = body.radius
    elif body.kind == "box":
        out["center"] = body.center.tolist()
        out["halfwidths"] = body.halfwidths.tolist()
    elif body.kind == "ellipsoid":
        out["center"] = body.center.tolist()
        out["shape"] = body.shape.tolist()
    elif body.kind == "vpolytope":
        out["vertices"] = body.vertices.tolist()
    else:
        out["normals"] = body.normals.tolist()
        out["offsets"] = body.offsets.tolist()
    return out
