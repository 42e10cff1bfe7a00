"""Exact low-dimensional polytope computations.

Convex hulls with full facet structure via incremental (beneath-beyond)
insertion, combinatorial vertex enumeration of bounded halfspace
intersections, fan-triangulation volumes and centroids, and exact planar
area/perimeter.  Everything is double precision; intended scale is
dimension <= 6 and at most a few thousand points.

No jitter is applied anywhere: exact ties (coplanar points) are resolved by
the facet-visibility tolerance, which is 1e-10 times the point-cloud
diameter, so that volumes used inside expectations stay unbiased.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

logger = logging.getLogger(__name__)

MAX_DIM = 6

VISIBILITY_TOL_FACTOR = 1e-10
RANK_RTOL = 1e-10
MERGE_TOL = 1e-8
VERTEX_TOL = 1e-8


class PolytopeError(Exception):
    pass


class CapabilityError(PolytopeError):
    """Requested computation is outside the supported (dim, size) envelope."""


class UnboundedError(PolytopeError):
    """Halfspace intersection has a direction of recession."""


class DegenerateHullError(PolytopeError):
    """Points do not span the requested dimension."""

    def __init__(self, rank: int, dim: int):
        super().__init__(f"affine rank {rank} < requested dimension {dim}")
        self.rank = rank
        self.dim = dim


@dataclass(frozen=True)
class Facet:
    """One facet: outward unit normal, offset, and the vertices lying on it."""

    normal: np.ndarray
    offset: float
    vertex_ids: tuple[int, ...]


@dataclass
class HullComplex:
    """Convex hull of a point set with facet structure.

    vertices are the extreme points (irredundant); facets are merged, so a
    cube has 6 facets, each listing its 4 vertices.  simplices triangulate
    the boundary (indices into vertices) and drive exact volume, centroid,
    and surface-area computations.
    """

    dim: int
    vertices: np.ndarray
    facets: list[Facet]
    interior_point: np.ndarray
    simplices: np.ndarray = field(repr=False)

    def facet_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """(A, b) with the hull equal to {x : A x <= b}."""
        a = np.array([f.normal for f in self.facets])
        b = np.array([f.offset for f in self.facets])
        return a, b

    def contains(self, points: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        a, b = self.facet_matrix()
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return (pts @ a.T <= b + tol).all(axis=1)

    def volume(self) -> float:
        vol, _ = volume_and_centroid(self)
        return vol

    def centroid(self) -> np.ndarray:
        _, cen = volume_and_centroid(self)
        return cen

    def surface_area(self) -> float:
        """Total (dim-1)-volume of the boundary."""
        v = self.vertices[self.simplices]
        e = v[:, 1:, :] - v[:, :1, :]
        gram = e @ e.transpose(0, 2, 1)
        dets = np.linalg.det(gram)
        np.maximum(dets, 0.0, out=dets)
        return float(np.sum(np.sqrt(dets))) / math.factorial(self.dim - 1)

    def edge_count(self) -> int:
        """Number of edges; primarily for the 3-d Euler check V - E + F = 2."""
        if self.dim != 3:
            raise CapabilityError("edge_count is only defined for dim 3")
        sets = [frozenset(f.vertex_ids) for f in self.facets]
        edges = set()
        for i in range(len(sets)):
            for j in range(i + 1, len(sets)):
                common = sets[i] & sets[j]
                if len(common) >= 2:
                    edges.add(frozenset(common))
        return len(edges)


def affine_rank(points: np.ndarray, rtol: float = RANK_RTOL) -> int:
    pts = np.asarray(points, dtype=float)
    if len(pts) <= 1:
        return 0
    spread = pts - pts.mean(axis=0)
    sv = np.linalg.svd(spread, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))


def dedupe_points(points: np.ndarray, tol: float) -> np.ndarray:
    """Drop near-duplicate rows (within euclidean tol), deterministically."""
    pts = np.asarray(points, dtype=float)
    if len(pts) <= 1:
        return pts.copy()
    order = np.lexsort(pts.T[::-1])
    spts = pts[order]
    kept: list[int] = []
    for i in range(len(spts)):
        dup = False
        for k in reversed(kept):
            if spts[i, 0] - spts[k, 0] > tol:
                break
            if np.linalg.norm(spts[i] - spts[k]) <= tol:
                dup = True
                break
        if not dup:
            kept.append(i)
    return spts[kept]


def _initial_simplex(pts: np.ndarray, d: int, tol: float) -> list[int]:
    spread = pts.max(axis=0) - pts.min(axis=0)
    ax = int(np.argmax(spread))
    i0 = int(np.argmin(pts[:, ax]))
    i1 = int(np.argmax(pts[:, ax]))
    chosen = [i0, i1]
    base = pts[i0]
    dirs = np.empty((d, d))
    v = pts[i1] - base
    dirs[0] = v / np.linalg.norm(v)
    ndirs = 1
    rel = pts - base
    while len(chosen) < d + 1:
        resid = rel - rel @ dirs[:ndirs].T @ dirs[:ndirs]
        dist = np.linalg.norm(resid, axis=1)
        i = int(np.argmax(dist))
        if dist[i] <= tol:
            raise DegenerateHullError(ndirs, d)
        chosen.append(i)
        dirs[ndirs] = resid[i] / dist[i]
        ndirs += 1
    return chosen


def _facet_planes(
    pts: np.ndarray, vert_tuples: np.ndarray, interior: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Outward unit normals and offsets for batches of (d)-vertex facets.

    Returns (normals, offsets, ok) where ok flags facets whose vertices are
    affinely independent enough to define a hyperplane.
    """
    v = pts[vert_tuples]
    d = pts.shape[1]
    e = (v[:, 1:, :] - v[:, :1, :]).transpose(0, 2, 1)
    q, r = np.linalg.qr(np.ascontiguousarray(e), mode="complete")
    normals = q[:, :, d - 1]
    rd = np.abs(np.diagonal(r, axis1=1, axis2=2))
    scale = np.max(np.abs(e), axis=(1, 2)) + 1e-300
    ok = rd.min(axis=1) > 1e-12 * scale
    offsets = np.einsum("ij,ij->i", normals, v[:, 0, :])
    flip = np.einsum("ij,j->i", normals, interior) > offsets
    normals[flip] *= -1.0
    offsets[flip] *= -1.0
    return normals, offsets, ok


class _HullState:
    """Growing facet arrays plus ridge adjacency for incremental insertion."""

    def __init__(self, d: int):
        self.d = d
        cap = 64
        self.normals = np.empty((cap, d))
        self.offsets = np.empty(cap)
        self.alive = np.zeros(cap, dtype=bool)
        self.fverts: list[tuple[int, ...]] = []
        self.ridges: dict[tuple[int, ...], list[int]] = {}
        self.outside: dict[int, list[int]] = {}

    def _grow(self) -> None:
        cap = len(self.offsets)
        self.normals = np.concatenate([self.normals, np.empty((cap, self.d))])
        self.offsets = np.concatenate([self.offsets, np.empty(cap)])
        self.alive = np.concatenate([self.alive, np.zeros(cap, dtype=bool)])

    def add_facet(self, verts: tuple[int, ...], normal: np.ndarray, offset: float) -> int:
        fid = len(self.fverts)
        if fid >= len(self.offsets):
            self._grow()
        self.normals[fid] = normal
        self.offsets[fid] = offset
        self.alive[fid] = True
        self.fverts.append(verts)
        for ridge in itertools.combinations(sorted(verts), self.d - 1):
            self.ridges.setdefault(ridge, []).append(fid)
        return fid

    def kill_facet(self, fid: int) -> None:
        self.alive[fid] = False
        for ridge in itertools.combinations(sorted(self.fverts[fid]), self.d - 1):
            lst = self.ridges.get(ridge)
            if lst is not None:
                lst.remove(fid)
                if not lst:
                    del self.ridges[ridge]
        self.outside.pop(fid, None)

    def alive_ids(self) -> np.ndarray:
        return np.flatnonzero(self.alive[: len(self.fverts)])


def _incremental_hull(pts: np.ndarray, d: int, tol: float) -> HullComplex:
    init = _initial_simplex(pts, d, tol)
    interior = pts[init].mean(axis=0)
    state = _HullState(d)

    tuples = np.array(
        [[init[i] for i in range(d + 1) if i != leave] for leave in range(d + 1)]
    )
    normals, offsets, ok = _facet_planes(pts, tuples, interior)
    if not ok.all():
        raise DegenerateHullError(affine_rank(pts[init]), d)
    for t, nrm, off in zip(tuples, normals, offsets):
        state.add_facet(tuple(int(x) for x in t), nrm, off)

    candidates = np.setdiff1d(np.arange(len(pts)), np.array(init))
    if len(candidates):
        ids = state.alive_ids()
        viol = pts[candidates] @ state.normals[ids].T - state.offsets[ids]
        best = np.argmax(viol, axis=1)
        maxv = viol[np.arange(len(candidates)), best]
        for ci in np.flatnonzero(maxv > tol):
            state.outside.setdefault(int(ids[best[ci]]), []).append(int(candidates[ci]))

    deferred: dict[int, int] = {}
    while True:
        pending = [f for f, o in state.outside.items() if o and state.alive[f]]
        if not pending:
            break
        fid = min(pending)
        members = state.outside[fid]
        nrm, off = state.normals[fid], state.offsets[fid]
        dists = pts[members] @ nrm - off
        p_idx = members[int(np.argmax(dists))]

        ids = state.alive_ids()
        vis_mask = pts[p_idx] @ state.normals[ids].T - state.offsets[ids] > tol
        visible = [int(f) for f in ids[vis_mask]]
        if not visible:
            members.remove(p_idx)
            continue

        horizon: list[tuple[tuple[int, ...], int]] = []
        vis_set = set(visible)
        for vf in visible:
            for ridge in itertools.combinations(sorted(state.fverts[vf]), d - 1):
                for other in state.ridges[ridge]:
                    if other != vf and other not in vis_set:
                        horizon.append((ridge, other))

        new_tuples = np.array([ridge + (p_idx,) for ridge, _ in horizon])
        normals, offsets, ok = _facet_planes(pts, new_tuples, interior)
        if not ok.all():
            # Nearly-flat candidate facet: p sits in a ridge's span.  Retry
            # the point later; the local geometry usually resolves after
            # other insertions, otherwise drop it (it is within tolerance
            # of the boundary).
            members.remove(p_idx)
            if deferred.get(p_idx, 0) < 2:
                deferred[p_idx] = deferred.get(p_idx, 0) + 1
                members.append(p_idx)
            else:
                logger.debug("dropped near-coplanar point %d", p_idx)
            continue

        orphans: list[int] = []
        for vf in visible:
            orphans.extend(state.outside.get(vf, []))
            state.kill_facet(vf)
        orphans = [o for o in set(orphans) if o != p_idx]

        for t, nn, bb in zip(new_tuples, normals, offsets):
            state.add_facet(tuple(int(x) for x in t), nn, bb)

        if orphans:
            ids = state.alive_ids()
            viol = pts[orphans] @ state.normals[ids].T - state.offsets[ids]
            best = np.argmax(viol, axis=1)
            maxv = viol[np.arange(len(orphans)), best]
            for oi in np.flatnonzero(maxv > tol):
                state.outside.setdefault(int(ids[best[oi]]), []).append(orphans[oi])

    return _finalize(pts, state, interior)


def _finalize(pts: np.ndarray, state: _HullState, interior: np.ndarray) -> HullComplex:
    d = state.d
    ids = state.alive_ids()
    used = sorted({v for f in ids for v in state.fverts[int(f)]})
    remap = {v: i for i, v in enumerate(used)}
    vertices = pts[used]
    simplices = np.array(
        [[remap[v] for v in state.fverts[int(f)]] for f in ids], dtype=int
    )

    # Merge coplanar simplicial facets into polytope facets (union-find over
    # ridge-adjacent pairs with matching planes).
    n_s = len(ids)
    parent = list(range(n_s))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    pos = {int(f): i for i, f in enumerate(ids)}
    norms = state.normals[ids]
    offs = state.offsets[ids]
    scale = float(np.max(np.abs(vertices))) + 1.0
    for lst in state.ridges.values():
        if len(lst) == 2:
            a, b = pos[lst[0]], pos[lst[1]]
            if (
                np.linalg.norm(norms[a] - norms[b]) <= MERGE_TOL
                and abs(offs[a] - offs[b]) <= MERGE_TOL * scale
            ):
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[rb] = ra
    groups: dict[int, list[int]] = {}
    for i in range(n_s):
        groups.setdefault(find(i), []).append(i)
    facets = []
    for root, members in sorted(groups.items()):
        vset = sorted({v for m in members for v in simplices[m]})
        facets.append(
            Facet(normal=norms[root].copy(), offset=float(offs[root]), vertex_ids=tuple(vset))
        )

    return HullComplex(
        dim=d,
        vertices=vertices,
        facets=facets,
        interior_point=vertices.mean(axis=0),
        simplices=simplices,
    )


def _hull_1d(pts: np.ndarray) -> HullComplex:
    lo = int(np.argmin(pts[:, 0]))
    hi = int(np.argmax(pts[:, 0]))
    vertices = pts[[lo, hi]]
    facets = [
        Facet(normal=np.array([-1.0]), offset=float(-pts[lo, 0]), vertex_ids=(0,)),
        Facet(normal=np.array([1.0]), offset=float(pts[hi, 0]), vertex_ids=(1,)),
    ]
    simplices = np.array([[0], [1]], dtype=int)
    return HullComplex(1, vertices, facets, vertices.mean(axis=0), simplices)


def hull2d_indices(pts: np.ndarray) -> np.ndarray:
    """Indices of hull vertices in counterclockwise order (monotone chain)."""
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    scale = float(np.max(np.abs(pts))) + 1e-300
    eps = 1e-12 * scale * scale

    def build(seq):
        out: list[int] = []
        for i in seq:
            while len(out) >= 2:
                o, a = pts[out[-2]], pts[out[-1]]
                cross = (a[0] - o[0]) * (pts[i][1] - o[1]) - (a[1] - o[1]) * (
                    pts[i][0] - o[0]
                )
                if cross <= eps:
                    out.pop()
                else:
                    break
            out.append(i)
        return out

    lower = build(order)
    upper = build(order[::-1])
    return np.array(lower[:-1] + upper[:-1], dtype=int)


def _hull_2d(pts: np.ndarray) -> HullComplex:
    idx = hull2d_indices(pts)
    if len(idx) < 3:
        raise DegenerateHullError(affine_rank(pts), 2)
    vertices = pts[idx]
    m = len(vertices)
    facets = []
    simplices = []
    for i in range(m):
        a, b = vertices[i], vertices[(i + 1) % m]
        edge = b - a
        normal = np.array([edge[1], -edge[0]])
        normal /= np.linalg.norm(normal)
        facets.append(
            Facet(normal=normal, offset=float(normal @ a), vertex_ids=(i, (i + 1) % m))
        )
        simplices.append([i, (i + 1) % m])
    return HullComplex(
        2, vertices, facets, vertices.mean(axis=0), np.array(simplices, dtype=int)
    )


def convex_hull(points: np.ndarray, dim: int | None = None) -> HullComplex:
    """Convex hull with facet structure; points must span `dim`.

    Raises DegenerateHullError (carrying the achieved rank) for flat input
    and CapabilityError above dimension 6.
    """
    pts = np.ascontiguousarray(points, dtype=float)
    if pts.ndim != 2:
        raise ValueError("points must be a 2-d array")
    d = pts.shape[1] if dim is None else int(dim)
    if d != pts.shape[1]:
        raise ValueError("dim does not match point coordinates")
    if d < 1 or d > MAX_DIM:
        raise CapabilityError(f"hull construction supports 1 <= dim <= {MAX_DIM}")
    if len(pts) < d + 1:
        raise DegenerateHullError(affine_rank(pts), d)
    rank = affine_rank(pts)
    if rank < d:
        raise DegenerateHullError(rank, d)
    if d == 1:
        return _hull_1d(pts)
    if d == 2:
        return _hull_2d(pts)
    diam = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
    return _incremental_hull(pts, d, VISIBILITY_TOL_FACTOR * diam)


def volume_and_centroid(hull: HullComplex) -> tuple[float, np.ndarray]:
    """Exact volume and centroid by fan triangulation from the interior point."""
    d = hull.dim
    v = hull.vertices[hull.simplices]
    apex = hull.interior_point
    e = v - apex
    vols = np.abs(np.linalg.det(e)) / math.factorial(d)
    total = float(math.fsum(vols.tolist()))
    if total <= 0.0:
        return 0.0, apex.copy()
    cents = (v.sum(axis=1) + apex) / (d + 1)
    centroid = (vols[:, None] * cents).sum(axis=0) / total
    return total, centroid


def hull_volume(points: np.ndarray, dim: int | None = None) -> float:
    return volume_and_centroid(convex_hull(points, dim))[0]


def planar_intrinsics(vertices: np.ndarray) -> tuple[float, float]:
    """Exact (area, perimeter) of the convex hull of planar points.

    Degenerate (collinear) input yields zero area and twice the segment
    length as perimeter, with a logged warning.
    """
    pts = np.asarray(vertices, dtype=float)
    if pts.shape[1] != 2:
        raise ValueError("planar_intrinsics expects 2-d points")
    if affine_rank(pts) < 2:
        lo = pts[np.argmin(pts @ pts.sum(axis=0))]
        d = np.linalg.norm(pts - pts[0], axis=1)
        length = float(np.max(np.linalg.norm(pts[:, None] - pts[None, :], axis=2)))
        logger.warning("degenerate planar polytope: area 0, segment length %g", length)
        return 0.0, 2.0 * length
    idx = hull2d_indices(pts)
    poly = pts[idx]
    x, y = poly[:, 0], poly[:, 1]
    area = 0.5 * abs(
        float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    )
    perim = float(np.sum(np.linalg.norm(np.roll(poly, -1, axis=0) - poly, axis=1)))
    return area, perim


def _bounded_or_raise(a: np.ndarray, b: np.ndarray) -> None:
    d = a.shape[1]
    for i in range(d):
        for sign in (1.0, -1.0):
            c = np.zeros(d)
            c[i] = -sign
            res = linprog(c, A_ub=a, b_ub=b, bounds=[(None, None)] * d, method="highs")
            if res.status == 3:
                raise UnboundedError(f"unbounded along {'+' if sign > 0 else '-'}e_{i}")
            if res.status == 2:
                return  # infeasible: empty set, trivially bounded


def vertex_enumeration(
    normals: np.ndarray,
    offsets: np.ndarray,
    *,
    tol: float = VERTEX_TOL,
    check_bounded: bool = True,
) -> np.ndarray:
    """All vertices of {x : normals @ x <= offsets} by facet-subset solves.

    Every dim-subset of constraints is solved as a square system; solutions
    feasible within tol are kept and deduplicated at tol spacing.  Facet
    count is capped (64, and 32 for dim >= 5) to keep the subset count sane.
    """
    a = np.asarray(normals, dtype=float)
    b = np.asarray(offsets, dtype=float)
    m, d = a.shape
    if d > MAX_DIM:
        raise CapabilityError(f"vertex enumeration supports dim <= {MAX_DIM}")
    if m > 64 or (d >= 5 and m > 32):
        raise CapabilityError(f"facet count {m} exceeds the enumeration cap")
    nrm = np.linalg.norm(a, axis=1)
    if np.any(nrm == 0.0):
        raise ValueError("zero normal row")
    a = a / nrm[:, None]
    b = b / nrm
    if check_bounded:
        _bounded_or_raise(a, b)
    combos = np.array(list(itertools.combinations(range(m), d)), dtype=int)
    sub = a[combos]
    rhs = b[combos]
    dets = np.abs(np.linalg.det(sub))
    ok = dets > 1e-10
    if not ok.any():
        return np.empty((0, d))
    x = np.linalg.solve(sub[ok], rhs[ok][..., None])[..., 0]
    feas = (x @ a.T <= b + tol).all(axis=1)
    if not feas.any():
        return np.empty((0, d))
    scale = float(np.max(np.abs(x[feas]))) + 1.0
    return dedupe_points(x[feas], tol * scale)


def halfspace_intersection_vertices(
    normals: np.ndarray, offsets: np.ndarray, interior: np.ndarray
) -> np.ndarray:
    """Vertices of a bounded {x : A x <= b} via polar duality.

    Needs a strictly interior point.  Scales to many (mostly redundant)
    constraints: one hull of the dual points replaces the combinatorial
    subset enumeration.
    """
    a = np.asarray(normals, dtype=float)
    b = np.asarray(offsets, dtype=float)
    interior = np.asarray(interior, dtype=float)
    slack = b - a @ interior
    if np.any(slack <= 0.0):
        raise ValueError("interior point is not strictly feasible")
    dual = a / slack[:, None]
    hull = convex_hull(dual, a.shape[1])
    verts = np.array([f.normal / f.offset for f in hull.facets]) + interior
    scale = float(np.max(np.abs(verts))) + 1.0
    return dedupe_points(verts, VERTEX_TOL * scale)
