"""Partition-to-ERLA rule engine, coverage metrics, and ODD-update proposals.

ERLA records attach Effects / Requirements / Learning-assurance / Architecture
codes to (kind-set, category) partitions. The default rule base ships with the
package (``data/erla_rules.txt``); cells without a specific record carry the
``non-normative`` placeholder code.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import geometry
from .classify import (
    CATEGORY_LABELS,
    KIND_SET,
    KIND_SET_LABELS,
    OUTCOD_CATEGORY,
    Chain,
    PartitionKey,
    classify_point,
    partition_dataset,
)
from .dsl import Diagnostic, tokenize
from .errors import EmptyInput, UnvalidatedRuleBase
from .model import DEFAULT_TOL, Containment, DataPoint, OddNode, Polygon2D

# cells partition_dataset can actually produce
REACHABLE_CELLS: dict[str, frozenset[str]] = {
    "InMOD&InS": frozenset({"Nominal", "EdgeCase", "FeasibleCornerCase", "Inlier", "Novelty"}),
    "InMOD&OutS": frozenset({"Nominal", "EdgeCase", "FeasibleCornerCase", "Inlier", "Novelty"}),
    "InCOD&OutMOD": frozenset({"Nominal", "EdgeCase", "FeasibleCornerCase", "Inlier"}),
    "OutCOD": frozenset({OUTCOD_CATEGORY}),
}


def full_key_space() -> list[PartitionKey]:
    keys: list[PartitionKey] = []
    for kind_set in KIND_SET_LABELS:
        if kind_set == "OutCOD":
            keys.append((kind_set, OUTCOD_CATEGORY))
        else:
            keys.extend((kind_set, cat) for cat in CATEGORY_LABELS)
    return keys


@dataclass(frozen=True)
class ErlaRule:
    kinds: frozenset[str]
    categories: frozenset[str]
    effects: tuple[str, ...] = ()
    requirements: tuple[str, ...] = ()
    learning_assurance: tuple[str, ...] = ()
    architecture: tuple[str, ...] = ()


@dataclass(frozen=True)
class NotApplicable:
    kinds: frozenset[str]
    categories: frozenset[str]
    reason: str


class RuleBase:
    def __init__(self, rules: list[ErlaRule], not_applicable: list[NotApplicable]):
        self.rules = rules
        self.not_applicable = not_applicable
        self._index: dict[PartitionKey, ErlaRule | NotApplicable] = {}
        self._validated = False

    def validate(self) -> None:
        """Check the rule base claims every cell exactly once; raises ValueError."""
        problems: list[str] = []
        space = set(full_key_space())
        index: dict[PartitionKey, ErlaRule | NotApplicable] = {}
        for entry in [*self.rules, *self.not_applicable]:
            for kind_set in entry.kinds:
                for category in entry.categories:
                    key = (kind_set, category)
                    if key not in space:
                        problems.append(f"unknown cell {key}")
                        continue
                    if key in index:
                        problems.append(f"overlapping cell {key}")
                        continue
                    index[key] = entry
        for key in sorted(space):
            if key not in index:
                problems.append(f"uncovered cell {key}")
        if problems:
            raise ValueError("invalid rule base: " + "; ".join(problems))
        self._index = index
        self._validated = True

    def lookup(self, key: PartitionKey) -> ErlaRule | NotApplicable:
        if not self._validated:
            raise UnvalidatedRuleBase("rule base must be validated before lookup")
        try:
            return self._index[key]
        except KeyError:
            raise KeyError(f"no rule for partition {key}") from None


def lookup_erla(key: PartitionKey, rules: RuleBase) -> ErlaRule | NotApplicable:
    return rules.lookup(key)


_RULE_KEYS = {"kinds", "categories", "E", "R", "L", "A"}


def parse_rules(text: str) -> tuple[RuleBase, list[Diagnostic]]:
    """Parse the line-oriented rule-base format (see the packaged default)."""
    tokens, diagnostics = tokenize(text)
    rules: list[ErlaRule] = []
    nas: list[NotApplicable] = []
    pos = 0

    def err(message, tok):
        diagnostics.append(Diagnostic("error", "E001", message, tok.line, tok.col))

    while pos < len(tokens):
        head = tokens[pos]
        if head.kind != "ident" or head.value not in ("rule", "not_applicable"):
            err(f"expected 'rule' or 'not_applicable', got {head.value!r}", head)
            pos += 1
            continue
        pos += 1
        if pos >= len(tokens) or tokens[pos].value != "{":
            err("expected '{'", head)
            continue
        pos += 1
        fields: dict[str, tuple[str, ...]] = {}
        reason = ""
        bad = False
        while pos < len(tokens) and tokens[pos].value != "}":
            key_tok = tokens[pos]
            pos += 1
            if key_tok.kind != "ident":
                err(f"expected field name, got {key_tok.value!r}", key_tok)
                bad = True
                break
            if key_tok.value == "reason":
                if pos < len(tokens) and tokens[pos].kind == "string":
                    reason = tokens[pos].value[1:-1]
                    pos += 1
                    continue
                err("expected quoted reason", key_tok)
                bad = True
                break
            if key_tok.value not in _RULE_KEYS:
                err(f"unknown field {key_tok.value!r}", key_tok)
                bad = True
                break
            if pos >= len(tokens) or tokens[pos].value != "[":
                err(f"expected '[' after {key_tok.value}", key_tok)
                bad = True
                break
            pos += 1
            items = []
            while pos < len(tokens) and tokens[pos].value != "]":
                items.append(tokens[pos].value)
                pos += 1
            if pos >= len(tokens):
                err("unterminated list", key_tok)
                bad = True
                break
            pos += 1
            fields[key_tok.value] = tuple(items)
        if pos < len(tokens) and tokens[pos].value == "}":
            pos += 1
        if bad:
            continue
        kinds = frozenset(fields.get("kinds", ()))
        categories = frozenset(fields.get("categories", ()))
        if not kinds or not categories:
            err(f"{head.value} block needs kinds and categories", head)
            continue
        if head.value == "rule":
            rules.append(
                ErlaRule(
                    kinds=kinds,
                    categories=categories,
                    effects=fields.get("E", ()),
                    requirements=fields.get("R", ()),
                    learning_assurance=fields.get("L", ()),
                    architecture=fields.get("A", ()),
                )
            )
        else:
            nas.append(NotApplicable(kinds, categories, reason))
    return RuleBase(rules, nas), diagnostics


def load_default_rules() -> RuleBase:
    text = resources.files("oddkit").joinpath("data/erla_rules.txt").read_text("utf-8")
    base, diagnostics = parse_rules(text)
    errors = [d for d in diagnostics if d.severity == "error"]
    if errors:  # pragma: no cover - packaged file is tested
        raise ValueError(f"default rule base failed to parse: {errors[0]}")
    base.validate()
    return base


# -- partition analysis --------------------------------------------------------


@dataclass(frozen=True)
class PartitionSection:
    key: PartitionKey
    count: int
    rows: tuple[int, ...]
    erla: ErlaRule | NotApplicable


@dataclass
class AnalysisReport:
    sections: list[PartitionSection] = field(default_factory=list)

    def render_text(self) -> str:
        if not self.sections:
            return "no populated partitions\n"
        lines = []
        for s in self.sections:
            kind_set, category = s.key
            rows = ", ".join(str(r) for r in s.rows[:10])
            more = "" if s.count <= 10 else f" (+{s.count - 10} more)"
            lines.append(f"partition {kind_set} x {category}: {s.count} point(s), rows {rows}{more}")
            if isinstance(s.erla, NotApplicable):
                lines.append(f"  not applicable: {s.erla.reason}")
            else:
                lines.append("  E: " + (", ".join(s.erla.effects) or "-"))
                lines.append("  R: " + (", ".join(s.erla.requirements) or "-"))
                lines.append("  L: " + (", ".join(s.erla.learning_assurance) or "-"))
                lines.append("  A: " + (", ".join(s.erla.architecture) or "-"))
        return "\n".join(lines) + "\n"

    def render_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(
            ["kind_set", "category", "count", "rows", "effects", "requirements",
             "learning_assurance", "architecture", "not_applicable_reason"]
        )
        for s in self.sections:
            if isinstance(s.erla, NotApplicable):
                erla_cols = ["", "", "", "", s.erla.reason]
            else:
                erla_cols = [
                    "|".join(s.erla.effects),
                    "|".join(s.erla.requirements),
                    "|".join(s.erla.learning_assurance),
                    "|".join(s.erla.architecture),
                    "",
                ]
            writer.writerow(
                [s.key[0], s.key[1], s.count, "|".join(str(r) for r in s.rows), *erla_cols]
            )
        return out.getvalue()


def analyze_partitions(
    points: list[DataPoint],
    chain: Chain,
    rules: RuleBase,
    tol: float = DEFAULT_TOL,
) -> AnalysisReport:
    partitions = partition_dataset(points, chain, tol)
    order = {k: i for i, k in enumerate(full_key_space())}
    report = AnalysisReport()
    for key in sorted(partitions, key=lambda k: order.get(k, len(order))):
        rows = tuple(partitions[key])
        report.sections.append(
            PartitionSection(key=key, count=len(rows), rows=rows, erla=rules.lookup(key))
        )
    return report


# -- coverage -------------------------------------------------------------------

DEFAULT_GRID = (20, 20)
DEFAULT_VERTEX_TOL = 1e-3
_SLICE_PROBE_POINTS = 65


@dataclass
class CoverageReport:
    counts: dict[str, int]
    vertex_coverage: float
    edge_coverage: float
    interior_grid_coverage: float
    empty_required_partitions: list[str]

    def render_text(self) -> str:
        lines = [
            f"vertex_coverage={self.vertex_coverage:.6g}",
            f"edge_coverage={self.edge_coverage:.6g}",
            f"interior_grid_coverage={self.interior_grid_coverage:.6g}",
            "empty_required_partitions=" + (",".join(self.empty_required_partitions) or "-"),
        ]
        for category in CATEGORY_LABELS:
            lines.append(f"count_{category}={self.counts.get(category, 0)}")
        return "\n".join(lines) + "\n"


_REQUIRED_PARTITIONS = ("Nominal", "EdgeCase", "FeasibleCornerCase")


def coverage_report(
    points: list[DataPoint],
    node: OddNode,
    grid: tuple[int, int] = DEFAULT_GRID,
    tol: float = DEFAULT_TOL,
    vertex_tol: float = DEFAULT_VERTEX_TOL,
) -> CoverageReport:
    """Desk-scale coverage metrics for a dataset against one node.

    Interior grid coverage requires a 2D node (the grid is laid over the
    normalized parameter box and clipped to the region by cell center).
    """
    if grid[0] < 1 or grid[1] < 1:
        raise ValueError("grid dims must be >= 1")
    if len(node.parameters) != 2:
        raise ValueError("coverage metrics require a 2-parameter node")

    counts: dict[str, int] = {}
    normalized_points = []
    for p in points:
        label = classify_point(p, node, None, tol, declared_transform=())
        counts[label.category.label] = counts.get(label.category.label, 0) + 1
        normalized_points.append(geometry.normalize(geometry.coords(p, node), node))

    vertices = geometry.region_vertices(node)
    matched = 0
    for v in vertices:
        v_hat = geometry.normalize(geometry.coords(v, node), node)
        if any(
            max(abs(a - b) for a, b in zip(v_hat, x)) <= vertex_tol
            for x in normalized_points
        ):
            matched += 1
    vertex_coverage = matched / len(vertices) if vertices else 0.0

    feasible_slices = 0
    covered_slices = 0
    for idx, param in enumerate(node.parameters):
        other = node.parameters[1 - idx]
        for bound in (param.lo, param.hi):
            probe = np.linspace(other.lo, other.hi, _SLICE_PROBE_POINTS)
            feasible = any(
                geometry.point_in_region(
                    DataPoint({param.name: bound, other.name: float(g)}), node, tol
                )
                != Containment.OUTSIDE
                for g in probe
            )
            if not feasible:
                continue
            feasible_slices += 1
            bound_hat = (bound - param.lo) / param.span
            if any(
                abs(x[idx] - bound_hat) <= vertex_tol
                for x, p in zip(normalized_points, points)
                if geometry.point_in_region(p, node, max(tol, vertex_tol)) != Containment.OUTSIDE
            ):
                covered_slices += 1
    edge_coverage = covered_slices / feasible_slices if feasible_slices else 0.0

    nx, ny = grid
    interior_cells = 0
    occupied = 0
    occupied_cells = {
        (min(int(x[0] * nx), nx - 1), min(int(x[1] * ny), ny - 1))
        for x in normalized_points
        if 0.0 <= x[0] <= 1.0 and 0.0 <= x[1] <= 1.0
    }
    for i in range(nx):
        for j in range(ny):
            cx = (i + 0.5) / nx
            cy = (j + 0.5) / ny
            center = DataPoint(
                {
                    node.parameters[0].name: node.parameters[0].lo + cx * node.parameters[0].span,
                    node.parameters[1].name: node.parameters[1].lo + cy * node.parameters[1].span,
                }
            )
            if geometry.point_in_region(center, node, tol) == Containment.OUTSIDE:
                continue
            interior_cells += 1
            if (i, j) in occupied_cells:
                occupied += 1
    interior_grid_coverage = occupied / interior_cells if interior_cells else 0.0

    empty_required = [c for c in _REQUIRED_PARTITIONS if counts.get(c, 0) == 0]
    return CoverageReport(
        counts=counts,
        vertex_coverage=vertex_coverage,
        edge_coverage=edge_coverage,
        interior_grid_coverage=interior_grid_coverage,
        empty_required_partitions=empty_required,
    )


# -- ODD update feedback ---------------------------------------------------------


@dataclass(frozen=True)
class RangeChange:
    parameter: str
    bound: str  # "lo" | "hi"
    current: float
    proposed: float
    evidence_count: int
    evidence_median: float
    evidence_extreme: float


@dataclass
class UpdateProposal:
    range_changes: list[RangeChange] = field(default_factory=list)
    new_parameter_candidates: list[str] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.range_changes and not self.new_parameter_candidates

    def render_text(self) -> str:
        if self.empty:
            return "no update proposed\n"
        lines = []
        for c in self.range_changes:
            lines.append(
                f"propose {c.parameter} {c.bound}: {c.current:g} -> {c.proposed:g} "
                f"(evidence: {c.evidence_count} point(s), median {c.evidence_median:g}, "
                f"extreme {c.evidence_extreme:g})"
            )
        for name in self.new_parameter_candidates:
            lines.append(f"candidate new parameter: {name}")
        return "\n".join(lines) + "\n"


def propose_odd_update(
    observed: list[DataPoint], node: OddNode, tol: float = DEFAULT_TOL
) -> UpdateProposal:
    """Advisory range-extension proposal from operational out-of-ODD points.

    Never mutates the node; the region extension itself remains a human
    decision. Hidden-parameter columns in the evidence flag candidate new
    parameters.
    """
    if not observed:
        raise EmptyInput("no observed points")
    proposal = UpdateProposal()
    for param in node.parameters:
        band = tol * param.span
        above = [p.values[param.name] for p in observed if p.values.get(param.name, -math.inf) > param.hi + band]
        below = [p.values[param.name] for p in observed if p.values.get(param.name, math.inf) < param.lo - band]
        if above:
            proposal.range_changes.append(
                RangeChange(
                    parameter=param.name,
                    bound="hi",
                    current=param.hi,
                    proposed=max(above),
                    evidence_count=len(above),
                    evidence_median=float(np.median(above)),
                    evidence_extreme=max(above),
                )
            )
        if below:
            proposal.range_changes.append(
                RangeChange(
                    parameter=param.name,
                    bound="lo",
                    current=param.lo,
                    proposed=min(below),
                    evidence_count=len(below),
                    evidence_median=float(np.median(below)),
                    evidence_extreme=min(below),
                )
            )
    candidates = sorted(
        {
            name
            for p in observed
            if p.hidden_values
            for name in p.hidden_values
            if name not in node.parameter_names
        }
    )
    proposal.new_parameter_candidates = candidates
    return proposal
