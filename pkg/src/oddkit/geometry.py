"""Computational-geometry primitives over ODD regions.

All distances and tolerances are expressed in normalized parameter units:
each axis is scaled by its admissible span, so results are invariant under
rescaling a parameter together with its range and region coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from .errors import IncompatibleParameters, MissingParameter
from .model import (
    DEFAULT_TOL,
    Containment,
    ConvexPolytope,
    DataPoint,
    OddNode,
    Polygon2D,
    PolytopeUnion,
)


def coords(p: DataPoint, node: OddNode) -> tuple[float, ...]:
    """Extract the node's parameter values from a data point, in order."""
    out = []
    for param in node.parameters:
        if param.name not in p.values:
            raise MissingParameter(param.name)
        out.append(float(p.values[param.name]))
    return tuple(out)


def normalize(x: tuple[float, ...], node: OddNode) -> tuple[float, ...]:
    return tuple((v - p.lo) / p.span for v, p in zip(x, node.parameters))


# -- polygon helpers ---------------------------------------------------------


def _edges(verts):
    n = len(verts)
    for i in range(n):
        yield verts[i], verts[(i + 1) % n]


def polygon_area(verts) -> float:
    """Signed area (shoelace); positive for counterclockwise loops."""
    total = 0.0
    for (x1, y1), (x2, y2) in _edges(verts):
        total += x1 * y2 - x2 * y1
    return total / 2.0


def _segments_intersect(a, b, c, d) -> bool:
    """True if open segments ab and cd properly intersect."""

    def orient(p, q, r):
        v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
        return (v > 0) - (v < 0)

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    return o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4)


def polygon_is_simple(verts) -> bool:
    """No two non-adjacent edges intersect."""
    edges = list(_edges(verts))
    n = len(edges)
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_intersect(*edges[i], *edges[j]):
                return False
    return True


def _even_odd_inside(pt, verts) -> bool:
    x, y = pt
    inside = False
    for (x1, y1), (x2, y2) in _edges(verts):
        if (y1 > y) != (y2 > y):
            x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < x_cross:
                inside = not inside
    return inside


def _point_segment_distance(pt, a, b) -> float:
    px, py = pt
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    denom = dx * dx + dy * dy
    if denom == 0.0:
        t = 0.0
    else:
        t = max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / denom))
    cx, cy = ax + t * dx, ay + t * dy
    return math.hypot(px - cx, py - cy)


def _polygon_boundary_distance(pt, verts) -> float:
    return min(_point_segment_distance(pt, a, b) for a, b in _edges(verts))


@lru_cache(maxsize=256)
def _normalized_polygon(node: OddNode) -> tuple[tuple[float, float], ...]:
    region = node.region
    return tuple(normalize(v, node) for v in region.vertices)


# -- polytope helpers --------------------------------------------------------


@lru_cache(maxsize=256)
def _normalized_halfspaces(node: OddNode):
    """Per union member: unit-norm rows (A, b) of A.xhat <= b in normalized coords."""
    members = []
    for member in node.region.members:
        rows = []
        for a, b in member.halfspaces:
            a_n = [ai * p.span for ai, p in zip(a, node.parameters)]
            b_n = b - sum(ai * p.lo for ai, p in zip(a, node.parameters))
            norm = math.sqrt(sum(v * v for v in a_n)) or 1.0
            rows.append((tuple(v / norm for v in a_n), b_n / norm))
        members.append(tuple(rows))
    return tuple(members)


def _member_margin(xhat, rows) -> float:
    """Minimal signed slack over the member's faces; >= 0 means inside."""
    return min(b - sum(ai * xi for ai, xi in zip(a, xhat)) for a, b in rows)


def _distance_to_hull(xhat, verts_hat) -> float:
    """Euclidean distance from a point to the convex hull of vertices.

    Solved as a small QP over barycentric weights; adequate at desk scale.
    """
    v = np.asarray(verts_hat, dtype=float)
    x = np.asarray(xhat, dtype=float)
    n = len(v)
    if n == 1:
        return float(np.linalg.norm(v[0] - x))

    def fun(w):
        d = v.T @ w - x
        return float(d @ d)

    def jac(w):
        return 2.0 * (v @ (v.T @ w - x))

    res = minimize(
        fun,
        np.full(n, 1.0 / n),
        jac=jac,
        method="SLSQP",
        bounds=[(0.0, 1.0)] * n,
        constraints=[{"type": "eq", "fun": lambda w: w.sum() - 1.0}],
    )
    return math.sqrt(max(res.fun, 0.0))


# -- public operations -------------------------------------------------------


def point_in_region(
    p: DataPoint, node: OddNode, tol: float = DEFAULT_TOL
) -> Containment:
    """Closed-region containment test with an explicit boundary band.

    Points within ``tol`` (normalized) of the boundary report
    ``ON_BOUNDARY``; category logic treats those as inside.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    xhat = normalize(coords(p, node), node)
    region = node.region
    if isinstance(region, Polygon2D):
        verts = _normalized_polygon(node)
        if _polygon_boundary_distance(xhat, verts) <= tol:
            return Containment.ON_BOUNDARY
        return Containment.INSIDE if _even_odd_inside(xhat, verts) else Containment.OUTSIDE

    on_boundary = False
    for rows in _normalized_halfspaces(node):
        margin = _member_margin(xhat, rows)
        if margin > tol:
            return Containment.INSIDE
        if margin >= -tol:
            on_boundary = True
    return Containment.ON_BOUNDARY if on_boundary else Containment.OUTSIDE


def params_at_extreme(
    p: DataPoint, node: OddNode, tol: float = DEFAULT_TOL
) -> set[str]:
    """Parameters whose value sits at an admissible-range bound within tolerance.

    Values strictly outside [lo, hi] by more than the tolerance band are never
    at an extreme.
    """
    x = coords(p, node)
    out = set()
    for v, param in zip(x, node.parameters):
        band = tol * param.span
        if min(abs(v - param.lo), abs(v - param.hi)) <= band:
            out.add(param.name)
    return out


def region_vertices(node: OddNode, tol: float = DEFAULT_TOL) -> list[DataPoint]:
    """Region vertices as data points; polytope-union vertices are deduplicated."""
    names = node.parameter_names
    region = node.region
    if isinstance(region, Polygon2D):
        return [DataPoint(dict(zip(names, v))) for v in region.vertices]
    seen: list[tuple[float, ...]] = []
    out = []
    for member in region.members:
        for v in member.vertices:
            v_hat = normalize(v, node)
            if any(
                max(abs(a - b) for a, b in zip(v_hat, s)) <= tol for s in seen
            ):
                continue
            seen.append(v_hat)
            out.append(DataPoint(dict(zip(names, v))))
    return out


def distance_to_boundary(
    p: DataPoint, node: OddNode, tol: float = DEFAULT_TOL
) -> float:
    """Minimal normalized distance from the point to the region boundary.

    For polytope unions with overlapping members this is the distance to the
    nearest member boundary, which upper-bounds the union-boundary distance.
    """
    xhat = normalize(coords(p, node), node)
    region = node.region
    if isinstance(region, Polygon2D):
        return _polygon_boundary_distance(xhat, _normalized_polygon(node))
    best = math.inf
    for rows, member in zip(_normalized_halfspaces(node), region.members):
        margin = _member_margin(xhat, rows)
        if margin >= 0:
            d = margin
        else:
            verts_hat = [normalize(v, node) for v in member.vertices]
            d = _distance_to_hull(xhat, verts_hat)
        best = min(best, d)
    return best


@dataclass(frozen=True)
class ContainsResult:
    contained: bool
    witness: DataPoint | None = None


def project(p: DataPoint, node: OddNode) -> DataPoint:
    """Restrict a data point to the node's parameters."""
    try:
        vals = {name: p.values[name] for name in node.parameter_names}
    except KeyError as exc:
        raise MissingParameter(str(exc)) from exc
    return DataPoint(vals, p.provenance_raw, p.hidden_values, p.in_sample)


def contains_node(
    inner: OddNode,
    outer: OddNode,
    samples: int = 256,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
) -> ContainsResult:
    """Sampling check that ``inner``'s region lies within ``outer``'s.

    Checks all inner vertices plus ``samples`` quasi-random interior points of
    ``inner``. This is a sampling check, not a decision procedure: a
    ``contained`` verdict can be wrong for adversarial geometry, a
    ``not_contained`` witness never is.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    missing = set(outer.parameter_names) - set(inner.parameter_names)
    if missing:
        raise IncompatibleParameters(
            f"outer node {outer.name!r} has parameters absent from inner "
            f"{inner.name!r}: {sorted(missing)}"
        )

    for vertex in region_vertices(inner):
        if point_in_region(project(vertex, outer), outer, tol) == Containment.OUTSIDE:
            return ContainsResult(False, vertex)

    dim = len(inner.parameters)
    halton = qmc.Halton(d=dim, seed=seed)
    kept = 0
    attempts = 0
    names = inner.parameter_names
    while kept < samples and attempts < 200 * samples:
        batch = halton.random(min(samples * 4, 1024))
        attempts += len(batch)
        for row in batch:
            vals = {
                name: p.lo + float(u) * (p.hi - p.lo)
                for name, p, u in zip(names, inner.parameters, row)
            }
            candidate = DataPoint(vals)
            if point_in_region(candidate, inner, tol) == Containment.OUTSIDE:
                continue
            kept += 1
            if point_in_region(project(candidate, outer), outer, tol) == Containment.OUTSIDE:
                return ContainsResult(False, candidate)
            if kept >= samples:
                break
    return ContainsResult(True, None)
