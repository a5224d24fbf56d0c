"""Hierarchical ODD specification, data classification, and analysis toolkit."""

from .analysis import (
    AnalysisReport,
    CoverageReport,
    ErlaRule,
    NotApplicable,
    RuleBase,
    UpdateProposal,
    analyze_partitions,
    coverage_report,
    full_key_space,
    load_default_rules,
    lookup_erla,
    parse_rules,
    propose_odd_update,
)
from .anomaly import (
    MODES,
    Rejected,
    Transform,
    apply_transforms,
    inject_inlier,
    make_novelty,
    sample_region,
)
from .classify import (
    ANOMALY_LABELS,
    CATEGORY_LABELS,
    KIND_SET,
    KIND_SET_LABELS,
    Category,
    Chain,
    Kind,
    LabelRow,
    PointLabel,
    SetAlgebraReport,
    build_chain,
    classify_category,
    classify_kind,
    classify_point,
    label_rows,
    partition_dataset,
    serialize_labels,
    verify_set_algebra,
)
from .datasets import Dataset, parse_dataset, serialize_dataset
from .dsl import Diagnostic, SpecDocument, parse_spec, serialize_spec
from .errors import (
    EmptyInput,
    EmptyStratum,
    IncompatibleParameters,
    IncompleteTable,
    MissingExtension,
    MissingParameter,
    MissingTransform,
    OddkitError,
    StubEvaluationError,
    UnvalidatedRuleBase,
)
from .geometry import (
    contains_node,
    distance_to_boundary,
    params_at_extreme,
    point_in_region,
    project,
)
from .model import (
    DEFAULT_TOL,
    Containment,
    ConvexPolytope,
    DataPoint,
    DimensionClass,
    Distribution,
    Level,
    OddNode,
    Parameter,
    Polygon2D,
    PolytopeUnion,
    Variant,
)
from .monitors import Monitor, MonitorVerdict, StubModel, make_stub_model, run_monitor_chain
from .render import render_svg

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
