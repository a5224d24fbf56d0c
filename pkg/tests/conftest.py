from __future__ import annotations

from pathlib import Path

import pytest

import oddkit

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def base_spec_text() -> str:
    return (DATA / "flight_envelope.odd").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def extended_spec_text() -> str:
    return (DATA / "flight_envelope_extended.odd").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def base_doc(base_spec_text) -> oddkit.SpecDocument:
    doc = oddkit.parse_spec(base_spec_text)
    assert doc.ok, [str(d) for d in doc.errors]
    return doc


@pytest.fixture(scope="session")
def extended_doc(extended_spec_text) -> oddkit.SpecDocument:
    doc = oddkit.parse_spec(extended_spec_text)
    assert doc.ok, [str(d) for d in doc.errors]
    return doc


@pytest.fixture(scope="session")
def chain(extended_doc) -> oddkit.Chain:
    return oddkit.build_chain(extended_doc)


@pytest.fixture(scope="session")
def golden_text() -> str:
    return (DATA / "golden_points.csv").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def golden_dataset(golden_text, chain) -> oddkit.Dataset:
    ds = oddkit.parse_dataset(golden_text, chain.mlm)
    assert ds.ok, [str(d) for d in ds.diagnostics]
    return ds


@pytest.fixture(scope="session")
def golden_labels_text() -> str:
    return (DATA / "golden_labels.csv").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA
