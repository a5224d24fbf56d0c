"""Anomaly construction and region-aware sampling.

Inliers are built by corrupting a point through an invertible preprocessing
transform while keeping the original values as provenance; novelty points are
built by projecting out hidden parameters of an extension node. Sampling is
seeded and reproducible (counter-based Philox generator).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from . import geometry
from .errors import EmptyStratum, MissingExtension
from .model import DEFAULT_TOL, Containment, DataPoint, OddNode, Parameter

if TYPE_CHECKING:  # pragma: no cover
    from .classify import Chain


@dataclass(frozen=True)
class Transform:
    """Invertible per-parameter preprocessing step.

    ``scale`` multiplies by ``factor``, ``offset`` adds ``offset``, and
    ``unit_swap`` is a scale by a unit-conversion factor (kept distinct so
    reports can name the error mechanism).
    """

    kind: str  # "scale" | "offset" | "unit_swap"
    parameter: str
    factor: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if self.kind not in ("scale", "offset", "unit_swap"):
            raise ValueError(f"unknown transform kind {self.kind!r}")
        if self.kind in ("scale", "unit_swap") and self.factor == 0.0:
            raise ValueError("scale factor must be nonzero")

    def apply(self, values: dict[str, float]) -> dict[str, float]:
        out = dict(values)
        if self.parameter in out:
            if self.kind == "offset":
                out[self.parameter] = out[self.parameter] + self.offset
            else:
                out[self.parameter] = out[self.parameter] * self.factor
        return out

    def inverse(self) -> "Transform":
        if self.kind == "offset":
            return Transform("offset", self.parameter, offset=-self.offset)
        return Transform(self.kind, self.parameter, factor=1.0 / self.factor)


def apply_transforms(
    transforms: tuple[Transform, ...], values: dict[str, float]
) -> dict[str, float]:
    out = dict(values)
    for t in transforms:
        out = t.apply(out)
    return out


@dataclass(frozen=True)
class Rejected:
    reason: str


def inject_inlier(
    p: DataPoint, t: Transform, node: OddNode, tol: float = DEFAULT_TOL
) -> DataPoint | Rejected:
    """Corrupt a point through ``t``, keeping the original values as provenance.

    Accepted only if the corruption changed the point and the result lands
    inside the node's region (an inlier is, by definition, inside).
    """
    corrupted = t.apply(p.values)
    changed = any(
        abs(corrupted[param.name] - p.values[param.name]) > tol * param.span
        for param in node.parameters
        if param.name in p.values
    )
    if not changed:
        return Rejected("transform did not corrupt the point")
    candidate = DataPoint(
        corrupted,
        provenance_raw=dict(p.values),
        hidden_values=dict(p.hidden_values) if p.hidden_values else None,
        in_sample=p.in_sample,
    )
    if geometry.point_in_region(candidate, node, tol) == Containment.OUTSIDE:
        return Rejected("corrupted point does not land inside the region")
    return candidate


def make_novelty(
    base: DataPoint, chain: "Chain", tol: float = DEFAULT_TOL
) -> DataPoint | Rejected:
    """Project a point over extended parameters down to the declared ODD.

    Accepted only when the full point is outside the extension node while its
    projection is inside the base node: the projected point then carries the
    extra coordinates as hidden values and classifies as Novelty.
    """
    if chain.extended is None:
        raise MissingExtension("chain has no extension node")
    ext = chain.extended
    mlm = chain.mlm
    if geometry.point_in_region(base, ext, tol) != Containment.OUTSIDE:
        return Rejected("point is inside the extended node: not novelty")
    projected = geometry.project(base, mlm)
    if geometry.point_in_region(projected, mlm, tol) == Containment.OUTSIDE:
        return Rejected("projection is outside the base node: outlier, not novelty")
    hidden_names = [n for n in ext.parameter_names if n not in mlm.parameter_names]
    hidden = {n: base.values[n] for n in hidden_names}
    return DataPoint(dict(projected.values), hidden_values=hidden, in_sample=base.in_sample)


# -- sampling ------------------------------------------------------------------

MODES = ("nominal_interior", "edge", "feasible_corner", "outlier_ring")

_OUTLIER_INFLATION = 0.2  # fraction of each parameter span added outside the box
_EDGE_SLICE_POINTS = 64
_MAX_REJECTION_FACTOR = 10_000


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _draw(rng: np.random.Generator, param: Parameter) -> float:
    dist = param.distribution
    if dist is None or dist.kind == "uniform":
        return float(rng.uniform(param.lo, param.hi))
    if dist.kind == "triangular":
        a, m, b = dist.args
        return float(rng.triangular(a, m, b))
    if dist.kind == "histogram":
        k = (len(dist.args) - 1) // 2
        edges = dist.args[: k + 1]
        weights = np.asarray(dist.args[k + 1 :], dtype=float)
        i = int(rng.choice(k, p=weights / weights.sum()))
        return float(rng.uniform(edges[i], edges[i + 1]))
    raise ValueError(f"unknown distribution {dist.kind!r}")


def sample_region(
    node: OddNode,
    n: int,
    mode: str,
    seed: int,
    tol: float = DEFAULT_TOL,
) -> list[DataPoint]:
    """Draw ``n`` points from the requested stratum of a node's region.

    Deterministic given ``seed``. Every returned point classifies into exactly
    the requested stratum: strictly interior non-extreme (nominal_interior),
    exactly one parameter at an extreme and inside (edge), region vertices
    with two or more extremes (feasible_corner), or outside the region but
    within the 20%-inflated parameter box (outlier_ring).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if mode not in MODES:
        raise ValueError(f"unknown sampling mode {mode!r}")
    if n == 0:
        return []
    if mode == "feasible_corner":
        corners = [
            v
            for v in geometry.region_vertices(node, tol)
            if len(geometry.params_at_extreme(v, node, tol)) >= 2
            and geometry.point_in_region(v, node, tol) != Containment.OUTSIDE
        ]
        if not corners:
            raise EmptyStratum(
                f"node {node.name!r} has no vertices with >= 2 parameters at extremes"
            )
        return [corners[i % len(corners)] for i in range(n)]
    if mode == "edge":
        return _sample_edges(node, n, seed, tol)
    if mode == "nominal_interior":
        return _rejection_sample(
            node,
            n,
            seed,
            lambda p: geometry.point_in_region(p, node, tol) == Containment.INSIDE
            and not geometry.params_at_extreme(p, node, tol),
            box=node.box,
            honor_distributions=True,
        )
    # outlier_ring
    inflated = tuple(
        (p.lo - _OUTLIER_INFLATION * p.span, p.hi + _OUTLIER_INFLATION * p.span)
        for p in node.parameters
    )
    return _rejection_sample(
        node,
        n,
        seed,
        lambda p: geometry.point_in_region(p, node, tol) == Containment.OUTSIDE
        and len(geometry.params_at_extreme(p, node, tol)) < 2,
        box=inflated,
        honor_distributions=False,
    )


def _rejection_sample(node, n, seed, accept, box, honor_distributions) -> list[DataPoint]:
    rng = _rng(seed)
    names = node.parameter_names
    out: list[DataPoint] = []
    attempts = 0
    limit = _MAX_REJECTION_FACTOR * n
    while len(out) < n and attempts < limit:
        attempts += 1
        if honor_distributions:
            vals = {name: _draw(rng, p) for name, p in zip(names, node.parameters)}
        else:
            vals = {
                name: float(rng.uniform(lo, hi)) for name, (lo, hi) in zip(names, box)
            }
        candidate = DataPoint(vals)
        if accept(candidate):
            out.append(candidate)
    if len(out) < n:
        raise EmptyStratum(
            f"could not draw {n} admissible points for node {node.name!r} "
            f"after {attempts} attempts"
        )
    return out


def _sample_edges(node: OddNode, n: int, seed: int, tol: float) -> list[DataPoint]:
    rng = _rng(seed)
    names = node.parameter_names
    slices: list[list[DataPoint]] = []
    for idx, param in enumerate(node.parameters):
        for bound in (param.lo, param.hi):
            admissible: list[DataPoint] = []
            others = [p for i, p in enumerate(node.parameters) if i != idx]
            if len(others) == 1:
                other = others[0]
                grid = np.linspace(other.lo, other.hi, _EDGE_SLICE_POINTS)
                candidates = [{param.name: bound, other.name: float(g)} for g in grid]
            else:
                candidates = []
                for _ in range(_EDGE_SLICE_POINTS):
                    vals = {p.name: float(rng.uniform(p.lo, p.hi)) for p in others}
                    vals[param.name] = bound
                    candidates.append(vals)
            for vals in candidates:
                p = DataPoint(vals)
                if (
                    geometry.point_in_region(p, node, tol) != Containment.OUTSIDE
                    and geometry.params_at_extreme(p, node, tol) == {param.name}
                ):
                    admissible.append(p)
            if admissible:
                slices.append(admissible)
    if not slices:
        raise EmptyStratum(f"node {node.name!r} has no admissible edge-slice points")
    out: list[DataPoint] = []
    i = 0
    while len(out) < n:
        pool = slices[i % len(slices)]
        out.append(pool[(i // len(slices)) % len(pool)])
        i += 1
    return out
