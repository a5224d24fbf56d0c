"""Data-category and kind classification relative to an ODD allocation chain."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from enum import Enum

from . import geometry
from .anomaly import Transform, apply_transforms
from .errors import MissingParameter, MissingTransform
from .model import DEFAULT_TOL, Containment, DataPoint, Level, OddNode, Variant


class Kind(str, Enum):
    IN_SAMPLE = "InS"
    OUT_OF_SAMPLE = "OutS"
    OUT_OF_MLMODD = "OutMOD"
    OUT_OF_MLCODD = "OutCOD"


# row labels of the partition tables: derived kind-set per atomic kind
KIND_SET = {
    Kind.IN_SAMPLE: "InMOD&InS",
    Kind.OUT_OF_SAMPLE: "InMOD&OutS",
    Kind.OUT_OF_MLMODD: "InCOD&OutMOD",
    Kind.OUT_OF_MLCODD: "OutCOD",
}

KIND_SET_LABELS = ("InMOD&InS", "InMOD&OutS", "InCOD&OutMOD", "OutCOD")

CATEGORY_LABELS = (
    "Nominal",
    "EdgeCase",
    "FeasibleCornerCase",
    "InfeasibleCornerCase",
    "Outlier",
    "Inlier",
    "Novelty",
)

ANOMALY_LABELS = frozenset({"Inlier", "Outlier", "InfeasibleCornerCase", "Novelty"})

# categories are indistinct at OutCOD from the MLC standpoint; they collapse
# to a single bucket whose rule-base column is labeled "Any"
OUTCOD_CATEGORY = "Any"

PartitionKey = tuple[str, str]  # (kind-set label, category label)


@dataclass(frozen=True)
class Category:
    label: str

    def __post_init__(self):
        if self.label not in CATEGORY_LABELS:
            raise ValueError(f"unknown category {self.label!r}")

    @property
    def anomaly(self) -> bool:
        return self.label in ANOMALY_LABELS


@dataclass
class Chain:
    """An MLM/MLC allocation pair plus the classification context around it."""

    mlm: OddNode
    mlc: OddNode
    mlc_operated: OddNode | None = None
    sample_registry: tuple[DataPoint, ...] = ()
    extended: OddNode | None = None
    system_od: OddNode | None = None
    # declared preprocessing applied to raw values; empty means identity
    declared_transform: tuple[Transform, ...] = ()

    def __post_init__(self):
        if self.mlm.level != Level.MLM_ODD:
            raise ValueError(f"chain mlm node {self.mlm.name!r} must have level mlm_odd")
        if self.mlc.level != Level.MLC_ODD or self.mlc.variant != Variant.AS_SPECIFIED:
            raise ValueError(
                f"chain mlc node {self.mlc.name!r} must be the as-specified mlc_odd"
            )
        if self.extended is not None and self.extended.extends != self.mlm.name:
            raise ValueError(
                f"extension node {self.extended.name!r} does not extend {self.mlm.name!r}"
            )


def build_chain(
    doc,
    mlm_name: str | None = None,
    mlc_name: str | None = None,
    operated_name: str | None = None,
    sample_registry: tuple[DataPoint, ...] = (),
    declared_transform: tuple[Transform, ...] = (),
) -> Chain:
    """Assemble a chain from a parsed spec document.

    Names default to the document's unique mlm_odd / as-specified mlc_odd /
    as-operated mlc_odd nodes; the extension and system-OD nodes are picked up
    automatically. Raises ValueError when the chain cannot be resolved or the
    mlm does not allocate (transitively) to the mlc.
    """

    def unique(pred, what) -> OddNode:
        found = [n for n in doc.nodes if pred(n)]
        if len(found) != 1:
            raise ValueError(f"cannot infer {what}: found {len(found)} candidate nodes")
        return found[0]

    mlm = doc.node(mlm_name) if mlm_name else unique(lambda n: n.level == Level.MLM_ODD and n.extends is None, "mlm node")
    mlc = (
        doc.node(mlc_name)
        if mlc_name
        else unique(
            lambda n: n.level == Level.MLC_ODD and n.variant == Variant.AS_SPECIFIED,
            "as-specified mlc node",
        )
    )
    operated = None
    if operated_name:
        operated = doc.node(operated_name)
    else:
        candidates = [
            n for n in doc.nodes if n.level == Level.MLC_ODD and n.variant == Variant.AS_OPERATED
        ]
        if len(candidates) == 1:
            operated = candidates[0]
    extended = next((n for n in doc.nodes if n.extends == mlm.name), None)
    system_od = next((n for n in doc.nodes if n.level == Level.SYSTEM_OD), None)

    by_name = {n.name: n for n in doc.nodes}
    current = mlm
    while current.allocates is not None and current.allocates in by_name:
        current = by_name[current.allocates]
        if current.name == mlc.name:
            break
    else:
        raise ValueError(f"mlm {mlm.name!r} does not allocate (transitively) to mlc {mlc.name!r}")

    return Chain(
        mlm=mlm,
        mlc=mlc,
        mlc_operated=operated,
        sample_registry=sample_registry,
        extended=extended,
        system_od=system_od,
        declared_transform=declared_transform,
    )


@dataclass(frozen=True)
class PointLabel:
    category: Category
    on_boundary: bool
    annotations: dict[str, str] = field(default_factory=dict, hash=False, compare=False)


def _raw_mismatch(
    p: DataPoint,
    node: OddNode,
    transforms: tuple[Transform, ...],
    tol: float,
) -> list[str]:
    """Parameters whose declared-transform-of-raw disagrees with the recorded value."""
    expected = apply_transforms(transforms, dict(p.provenance_raw or {}))
    mismatched = []
    for name, exp in expected.items():
        if name not in p.values:
            continue
        try:
            span = node.parameter(name).span
        except KeyError:
            span = 1.0
        if abs(exp - p.values[name]) > tol * span:
            mismatched.append(name)
    return sorted(mismatched)


def classify_point(
    p: DataPoint,
    node: OddNode,
    chain_ctx: Chain | None = None,
    tol: float = DEFAULT_TOL,
    declared_transform: tuple[Transform, ...] | None = None,
) -> PointLabel:
    """Assign the point its single category relative to ``node``.

    Decision order: provenance mismatch (Inlier) first, hidden-parameter
    exclusion (Novelty) second, then the geometric cases. Boundary points are
    inside; the on_boundary flag is reported but never changes the category.
    """
    containment = geometry.point_in_region(p, node, tol)
    inside = containment != Containment.OUTSIDE
    on_boundary = containment == Containment.ON_BOUNDARY
    annotations: dict[str, str] = {}

    if p.provenance_raw:
        transforms = declared_transform
        if transforms is None and chain_ctx is not None:
            transforms = chain_ctx.declared_transform
        if transforms is None:
            raise MissingTransform(
                "point carries raw provenance but no preprocessing transform is declared"
            )
        mismatched = _raw_mismatch(p, node, transforms, tol)
        if mismatched and inside:
            annotations["raw_mismatch"] = "|".join(mismatched)
            return PointLabel(Category("Inlier"), on_boundary, annotations)

    if (
        chain_ctx is not None
        and chain_ctx.extended is not None
        and chain_ctx.extended.extends == node.name
        and p.hidden_values
        and inside
    ):
        combined = DataPoint(p.combined_values())
        try:
            outside_extended = (
                geometry.point_in_region(combined, chain_ctx.extended, tol)
                == Containment.OUTSIDE
            )
        except MissingParameter:
            outside_extended = False  # hidden values do not cover the extension
        if outside_extended:
            annotations["hidden"] = "|".join(sorted(p.hidden_values))
            return PointLabel(Category("Novelty"), on_boundary, annotations)

    k = len(geometry.params_at_extreme(p, node, tol))
    if inside:
        label = "Nominal" if k == 0 else ("EdgeCase" if k == 1 else "FeasibleCornerCase")
    else:
        label = "InfeasibleCornerCase" if k >= 2 else "Outlier"
    return PointLabel(Category(label), on_boundary, annotations)


def classify_category(
    p: DataPoint,
    node: OddNode,
    chain_ctx: Chain | None = None,
    tol: float = DEFAULT_TOL,
    declared_transform: tuple[Transform, ...] | None = None,
) -> Category:
    return classify_point(p, node, chain_ctx, tol, declared_transform).category


def registry_match(p: DataPoint, chain: Chain, tol: float = DEFAULT_TOL) -> bool:
    """True if the registry holds a point matching ``p`` within tolerance."""
    x = geometry.normalize(geometry.coords(p, chain.mlm), chain.mlm)
    for r in chain.sample_registry:
        try:
            y = geometry.normalize(geometry.coords(r, chain.mlm), chain.mlm)
        except MissingParameter:
            continue
        if max(abs(a - b) for a, b in zip(x, y)) <= tol:
            return True
    return False


def classify_kind(p: DataPoint, chain: Chain, tol: float = DEFAULT_TOL) -> Kind:
    inside_mlm = (
        geometry.point_in_region(geometry.project(p, chain.mlm), chain.mlm, tol)
        != Containment.OUTSIDE
    )
    if inside_mlm:
        in_sample = bool(p.in_sample) or registry_match(p, chain, tol)
        return Kind.IN_SAMPLE if in_sample else Kind.OUT_OF_SAMPLE
    inside_mlc = (
        geometry.point_in_region(geometry.project(p, chain.mlc), chain.mlc, tol)
        != Containment.OUTSIDE
    )
    return Kind.OUT_OF_MLMODD if inside_mlc else Kind.OUT_OF_MLCODD


def category_node(kind: Kind, chain: Chain) -> OddNode:
    """Node against which a point of this kind is categorized."""
    if kind in (Kind.IN_SAMPLE, Kind.OUT_OF_SAMPLE):
        return chain.mlm
    return chain.mlc


@dataclass(frozen=True)
class LabelRow:
    row: int
    kind: Kind
    category: str
    node: str
    on_boundary: bool
    annotations: dict[str, str] = field(default_factory=dict, hash=False, compare=False)


def label_rows(points: list[DataPoint], chain: Chain, tol: float = DEFAULT_TOL) -> list[LabelRow]:
    """Classify each point against the chain; rows keep dataset order."""
    rows = []
    for i, p in enumerate(points):
        kind = classify_kind(p, chain, tol)
        node = category_node(kind, chain)
        label = classify_point(p, node, chain, tol)
        annotations = dict(label.annotations)
        category = label.category.label
        if kind == Kind.OUT_OF_MLCODD:
            # indistinct at the MLC level; keep the per-node views as notes
            annotations["mlc_category"] = category
            if chain.system_od is not None:
                sod_label = classify_point(
                    geometry.project(p, chain.system_od), chain.system_od, chain, tol
                )
                annotations["sod_category"] = sod_label.category.label
            category = OUTCOD_CATEGORY
        rows.append(LabelRow(i, kind, category, node.name, label.on_boundary, annotations))
    return rows


def serialize_labels(rows: list[LabelRow]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["row", "kind", "category", "node", "on_boundary", "annotations"])
    for r in rows:
        notes = ";".join(f"{k}={v}" for k, v in sorted(r.annotations.items()))
        writer.writerow(
            [r.row, r.kind.value, r.category, r.node, "1" if r.on_boundary else "0", notes]
        )
    return out.getvalue()


def partition_dataset(
    points: list[DataPoint], chain: Chain, tol: float = DEFAULT_TOL
) -> dict[PartitionKey, list[int]]:
    """Group row indices by (kind-set, category); every row lands in one cell."""
    partitions: dict[PartitionKey, list[int]] = {}
    for row in label_rows(points, chain, tol):
        key = (KIND_SET[row.kind], row.category)
        partitions.setdefault(key, []).append(row.row)
    return partitions


@dataclass
class SetAlgebraReport:
    holds: bool
    violations: list[tuple[int, str]] = field(default_factory=list)


def verify_set_algebra(
    points: list[DataPoint],
    chain: Chain,
    tol: float = DEFAULT_TOL,
    labels: list[Kind] | None = None,
) -> SetAlgebraReport:
    """Cross-check kind labels against direct geometric membership.

    With ``labels`` given, audits externally produced labels; otherwise the
    labels are recomputed via :func:`classify_kind` and the check guards
    regressions in the classifier itself.
    """
    if labels is None:
        labels = [classify_kind(p, chain, tol) for p in points]
    violations: list[tuple[int, str]] = []
    for i, (p, label) in enumerate(zip(points, labels)):
        if label not in tuple(Kind):
            violations.append((i, "totality: unlabeled point"))
            continue
        in_mlm = (
            geometry.point_in_region(geometry.project(p, chain.mlm), chain.mlm, tol)
            != Containment.OUTSIDE
        )
        in_mlc = (
            geometry.point_in_region(geometry.project(p, chain.mlc), chain.mlc, tol)
            != Containment.OUTSIDE
        )
        in_sample = bool(p.in_sample) or registry_match(p, chain, tol)
        in_mod = label in (Kind.IN_SAMPLE, Kind.OUT_OF_SAMPLE)
        in_cod = in_mod or label == Kind.OUT_OF_MLMODD
        if in_mod != in_mlm:
            violations.append((i, "InMOD = InS ∪ OutS"))
        if label == Kind.IN_SAMPLE and not in_sample:
            violations.append((i, "InS ∩ OutS = ∅"))
        if label == Kind.OUT_OF_SAMPLE and in_mlm and in_sample:
            violations.append((i, "InS ∩ OutS = ∅"))
        if label == Kind.OUT_OF_MLMODD and (in_mlm or not in_mlc):
            violations.append((i, "InMOD ∩ OutMOD = ∅"))
        if in_cod != in_mlc:
            violations.append((i, "InCOD = InMOD ∪ OutMOD"))
        if label == Kind.OUT_OF_MLCODD and in_mlc:
            violations.append((i, "InCOD ∩ OutCOD = ∅"))
    return SetAlgebraReport(holds=not violations, violations=violations)
