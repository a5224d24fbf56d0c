"""Command-line interface.

Exit codes: 0 success, 1 input/validation errors, 2 usage errors, 3 internal
errors. Commands never overwrite an existing output file unless ``--force``
is given. The ``ODDKIT_RULES`` environment variable points ``analyze`` at a
rule base; the packaged default is used otherwise.
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click
import numpy as np

from . import analysis, anomaly, classify, datasets, dsl, monitors, render
from .errors import OddkitError
from .model import DataPoint

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3


def _echo_diagnostics(diags) -> None:
    for d in diags:
        click.echo(str(d), err=True)


def _load_spec(path: str) -> dsl.SpecDocument:
    doc = dsl.parse_spec(Path(path).read_text(encoding="utf-8"))
    _echo_diagnostics(doc.diagnostics)
    if not doc.ok:
        raise click.ClickException(f"{path}: specification has errors")
    return doc


def _load_dataset(path: str, node) -> datasets.Dataset:
    ds = datasets.parse_dataset(Path(path).read_text(encoding="utf-8"), node)
    _echo_diagnostics(ds.diagnostics)
    if not ds.ok:
        raise click.ClickException(f"{path}: dataset has errors")
    return ds


def _write_output(path: str | None, content: str, force: bool) -> None:
    if path is None or path == "-":
        click.echo(content, nl=False)
        return
    target = Path(path)
    if target.exists() and not force:
        raise click.ClickException(f"{path} exists; pass --force to overwrite")
    target.write_text(content, encoding="utf-8")


def _build_chain(doc, chain_spec: str | None, transforms=()) -> classify.Chain:
    names: list[str | None] = [None, None, None]
    if chain_spec:
        parts = [p.strip() for p in chain_spec.split(",")]
        if len(parts) not in (2, 3):
            raise click.UsageError("--chain expects MLM,MLC[,OPERATED]")
        names[: len(parts)] = parts
    try:
        return classify.build_chain(
            doc,
            mlm_name=names[0],
            mlc_name=names[1],
            operated_name=names[2],
            declared_transform=tuple(transforms),
        )
    except (ValueError, KeyError) as exc:
        raise click.ClickException(f"cannot assemble chain: {exc}") from exc


def _parse_transform(spec: str) -> anomaly.Transform:
    parts = spec.split(":")
    if len(parts) != 3:
        raise click.UsageError(
            "--transform expects KIND:PARAM:VALUE (e.g. scale:Alt:10 or offset:Alt:500)"
        )
    kind, param, value = parts
    try:
        v = float(value)
        if kind == "offset":
            return anomaly.Transform("offset", param, offset=v)
        return anomaly.Transform(kind, param, factor=v)
    except ValueError as exc:
        raise click.UsageError(f"bad transform {spec!r}: {exc}") from exc


@click.group()
def cli() -> None:
    """Hierarchical ODD specification, classification, and analysis toolkit."""


@cli.command()
@click.argument("spec", type=click.Path(exists=True, dir_okay=False))
def validate(spec: str) -> None:
    """Parse and validate a specification; report all diagnostics."""
    doc = dsl.parse_spec(Path(spec).read_text(encoding="utf-8"))
    _echo_diagnostics(doc.diagnostics)
    if not doc.ok:
        raise click.ClickException(f"{spec}: {len(doc.errors)} error(s)")
    click.echo(f"{spec}: ok ({len(doc.nodes)} node(s), {len(doc.monitor_chains)} monitorchain(s))")


@cli.command("classify")
@click.argument("spec", type=click.Path(exists=True, dir_okay=False))
@click.argument("data", type=click.Path(exists=True, dir_okay=False))
@click.option("--node", "node_name", help="Classify categories against one node only.")
@click.option("--chain", "chain_spec", help="MLM,MLC[,OPERATED] node names.")
@click.option("--transform", "transform_specs", multiple=True, help="Declared preprocessing (KIND:PARAM:VALUE).")
@click.option("--out", "out_path", help="Output CSV path (default stdout).")
@click.option("--force", is_flag=True, help="Overwrite an existing output file.")
def classify_cmd(spec, data, node_name, chain_spec, transform_specs, out_path, force) -> None:
    """Label each dataset row with its kind and category."""
    doc = _load_spec(spec)
    transforms = tuple(_parse_transform(t) for t in transform_specs)
    if node_name:
        try:
            node = doc.node(node_name)
        except KeyError:
            raise click.ClickException(f"unknown node {node_name!r}")
        ds = _load_dataset(data, node)
        lines = ["row,category,on_boundary,annotations"]
        for i, p in enumerate(ds.points):
            label = classify.classify_point(p, node, None, declared_transform=transforms)
            notes = ";".join(f"{k}={v}" for k, v in sorted(label.annotations.items()))
            lines.append(f"{i},{label.category.label},{int(label.on_boundary)},{notes}")
        _write_output(out_path, "\n".join(lines) + "\n", force)
        return
    chain = _build_chain(doc, chain_spec, transforms)
    ds = _load_dataset(data, chain.mlm)
    rows = classify.label_rows(ds.points, chain)
    _write_output(out_path, classify.serialize_labels(rows), force)


@cli.command()
@click.argument("spec", type=click.Path(exists=True, dir_okay=False))
@click.argument("data", type=click.Path(exists=True, dir_okay=False))
@click.option("--chain", "chain_spec", help="MLM,MLC[,OPERATED] node names.")
@click.option("--out", "out_path", help="Output CSV path (default stdout).")
@click.option("--force", is_flag=True)
def partition(spec, data, chain_spec, out_path, force) -> None:
    """Group dataset rows into (kind-set, category) partitions."""
    doc = _load_spec(spec)
    chain = _build_chain(doc, chain_spec)
    ds = _load_dataset(data, chain.mlm)
    parts = classify.partition_dataset(ds.points, chain)
    order = {k: i for i, k in enumerate(analysis.full_key_space())}
    lines = ["kind_set,category,count,rows"]
    for key in sorted(parts, key=lambda k: order.get(k, len(order))):
        rows = "|".join(str(r) for r in parts[key])
        lines.append(f"{key[0]},{key[1]},{len(parts[key])},{rows}")
    _write_output(out_path, "\n".join(lines) + "\n", force)


@cli.command()
@click.argument("spec", type=click.Path(exists=True, dir_okay=False))
@click.argument("data", type=click.Path(exists=True, dir_okay=False))
@click.option("--chain", "chain_spec", help="MLM,MLC[,OPERATED] node names.")
@click.option("--rules", "rules_path", type=click.Path(exists=True, dir_okay=False),
              help="Rule base file (default: ODDKIT_RULES or the packaged rules).")
@click.option("--format", "fmt_name", type=click.Choice(["text", "csv"]), default="text")
@click.option("--out", "out_path", help="Output path (default stdout).")
@click.option("--force", is_flag=True)
def analyze(spec, data, chain_spec, rules_path, fmt_name, out_path, force) -> None:
    """Attach ERLA records to the populated dataset partitions."""
    doc = _load_spec(spec)
    chain = _build_chain(doc, chain_spec)
    ds = _load_dataset(data, chain.mlm)
    if rules_path is None:
        rules_path = os.environ.get("ODDKIT_RULES") or None
    if rules_path:
        base, diags = analysis.parse_rules(Path(rules_path).read_text(encoding="utf-8"))
        _echo_diagnostics(diags)
        if any(d.severity == "error" for d in diags):
            raise click.ClickException(f"{rules_path}: rule base has errors")
        try:
            base.validate()
        except ValueError as exc:
            raise click.ClickException(str(exc)) from exc
    else:
        base = analysis.load_default_rules()
    report = analysis.analyze_partitions(ds.points, chain, base)
    content = report.render_csv() if fmt_name == "csv" else report.render_text()
    _write_output(out_path, content, force)


@cli.command()
@click.argument("spec", type=click.Path(exists=True, dir_okay=False))
@click.argument("data", type=click.Path(exists=True, dir_okay=False))
@click.option("--node", "node_name", required=True)
@click.option("--grid", default="20x20", show_default=True, help="Interior grid, e.g. 20x20.")
@click.option("--out", "out_path", help="Output path (default stdout).")
@click.option("--force", is_flag=True)
def coverage(spec, data, node_name, grid, out_path, force) -> None:
    """Report vertex/edge/interior coverage of a dataset against one node."""
    doc = _load_spec(spec)
    try:
        node = doc.node(node_name)
    except KeyError:
        raise click.ClickException(f"unknown node {node_name!r}")
    try:
        nx, ny = (int(part) for part in grid.lower().split("x"))
    except ValueError:
        raise click.UsageError(f"bad --grid {grid!r}; expected NxM")
    ds = _load_dataset(data, node)
    try:
        report = analysis.coverage_report(ds.points, node, grid=(nx, ny))
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    _write_output(out_path, report.render_text(), force)


@cli.command()
@click.argument("spec", type=click.Path(exists=True, dir_okay=False))
@click.option("--node", "node_name", required=True)
@click.option("--mode", required=True,
              type=click.Choice([*anomaly.MODES, "inlier", "novelty"]))
@click.option("-n", "count", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--transform", "transform_specs", multiple=True,
              help="Corruption for --mode inlier (KIND:PARAM:VALUE).")
@click.option("--out", "out_path", help="Output CSV path (default stdout).")
@click.option("--force", is_flag=True)
def generate(spec, node_name, mode, count, seed, transform_specs, out_path, force) -> None:
    """Draw reproducible points from a stratum of a node's region."""
    doc = _load_spec(spec)
    try:
        node = doc.node(node_name)
    except KeyError:
        raise click.ClickException(f"unknown node {node_name!r}")
    try:
        if mode == "inlier":
            if not transform_specs:
                raise click.UsageError("--mode inlier needs at least one --transform")
            transforms = tuple(_parse_transform(t) for t in transform_specs)
            points = []
            attempt_seed = seed
            while len(points) < count:
                for p in anomaly.sample_region(node, count, "nominal_interior", attempt_seed):
                    result: DataPoint | anomaly.Rejected = p
                    for t in transforms:
                        if isinstance(result, anomaly.Rejected):
                            break
                        result = anomaly.inject_inlier(result, t, node)
                    if not isinstance(result, anomaly.Rejected):
                        # keep the original (uncorrupted) values as provenance
                        result = DataPoint(result.values, provenance_raw=dict(p.values))
                        points.append(result)
                        if len(points) == count:
                            break
                attempt_seed += 1
                if attempt_seed - seed > 100:
                    raise click.ClickException("could not generate enough inlier points")
        elif mode == "novelty":
            chain = _build_chain(doc, None)
            if chain.extended is None:
                raise click.ClickException("specification has no extension node for novelty")
            ext = chain.extended
            rng = np.random.Generator(np.random.Philox(seed))
            points = []
            attempts = 0
            base_names = set(chain.mlm.parameter_names)
            while len(points) < count and attempts < 10000 * count:
                attempts += 1
                vals = {}
                for p in ext.parameters:
                    if p.name in base_names:
                        vals[p.name] = float(rng.uniform(p.lo, p.hi))
                    else:
                        # extension-only parameters must be able to leave the
                        # extension region, so draw from an inflated range
                        vals[p.name] = float(
                            rng.uniform(p.lo - 0.5 * p.span, p.hi + 0.5 * p.span)
                        )
                result = anomaly.make_novelty(DataPoint(vals), chain)
                if not isinstance(result, anomaly.Rejected):
                    points.append(result)
            if len(points) < count:
                raise click.ClickException("could not generate enough novelty points")
        else:
            points = anomaly.sample_region(node, count, mode, seed)
    except OddkitError as exc:
        raise click.ClickException(str(exc)) from exc
    _write_output(out_path, datasets.serialize_dataset(points, node, seed=seed), force)


@cli.command()
@click.argument("spec", type=click.Path(exists=True, dir_okay=False))
@click.argument("data", type=click.Path(exists=True, dir_okay=False))
@click.option("--scenario", required=True, help="monitorchain block name in the spec.")
@click.option("--chain", "chain_spec", help="MLM,MLC[,OPERATED] node names.")
@click.option("--transform", "transform_specs", multiple=True, help="Declared preprocessing.")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", help="Verdicts CSV path (default stdout).")
@click.option("--metrics", "metrics_path", help="Metrics key=value file path.")
@click.option("--force", is_flag=True)
def simulate(spec, data, scenario, chain_spec, transform_specs, seed, out_path, metrics_path, force) -> None:
    """Run a dataset through a monitorchain scenario."""
    doc = _load_spec(spec)
    transforms = tuple(_parse_transform(t) for t in transform_specs)
    chain = _build_chain(doc, chain_spec, transforms)
    decl = next((c for c in doc.monitor_chains if c.name == scenario), None)
    if decl is None:
        raise click.ClickException(f"unknown monitorchain {scenario!r}")
    if decl.stub is None:
        raise click.ClickException(f"monitorchain {scenario!r} declares no stub model")
    ds = _load_dataset(data, chain.mlm)
    try:
        chain_monitors = monitors.build_monitors(decl.monitors, doc)
        stub = monitors.build_stub(decl.stub, chain.mlm)
        result = monitors.run_monitor_chain(ds.points, chain, chain_monitors, stub, seed=seed)
    except (OddkitError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    _write_output(out_path, result.render_verdicts_csv(), force)
    if metrics_path:
        _write_output(metrics_path, result.render_metrics(), force)
    else:
        click.echo(result.render_metrics(), nl=False, err=True)


@cli.command("render")
@click.argument("spec", type=click.Path(exists=True, dir_okay=False))
@click.argument("data", type=click.Path(exists=True, dir_okay=False), required=False)
@click.option("--node", "node_names", multiple=True, help="Restrict to these nodes.")
@click.option("--chain", "chain_spec", help="MLM,MLC[,OPERATED] for point labeling.")
@click.option("--out", "out_path", help="Output SVG path (default stdout).")
@click.option("--force", is_flag=True)
def render_cmd(spec, data, node_names, chain_spec, out_path, force) -> None:
    """Render 2-parameter regions (and classified points) as SVG."""
    doc = _load_spec(spec)
    if node_names:
        try:
            nodes = [doc.node(n) for n in node_names]
        except KeyError as exc:
            raise click.ClickException(f"unknown node {exc}")
    else:
        nodes = [n for n in doc.nodes if len(n.parameters) == 2]
    labeled: list[tuple[DataPoint, str]] = []
    if data:
        chain = _build_chain(doc, chain_spec)
        ds = _load_dataset(data, chain.mlm)
        rows = classify.label_rows(ds.points, chain)
        labeled = [(p, r.category) for p, r in zip(ds.points, rows)]
    try:
        svg = render.render_svg(nodes, labeled)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    _write_output(out_path, svg, force)


def main() -> None:
    try:
        cli(standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        sys.exit(EXIT_USAGE)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_ERROR)
    except click.exceptions.Abort:
        sys.exit(EXIT_USAGE)
    except Exception as exc:  # pragma: no cover - defensive
        click.echo(f"internal error: {exc}", err=True)
        sys.exit(EXIT_INTERNAL)
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
