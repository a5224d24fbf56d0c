from __future__ import annotations

import pytest

import oddkit
from oddkit import anomaly, geometry
from oddkit.model import Containment, DataPoint


@pytest.fixture()
def mlm(extended_doc):
    return extended_doc.node("MLMODD")


def test_transform_inverse_round_trip():
    vals = {"Alt": 2000.0, "Mach": 0.3}
    for t in (
        anomaly.Transform("scale", "Alt", factor=10.0),
        anomaly.Transform("offset", "Alt", offset=-500.0),
        anomaly.Transform("unit_swap", "Alt", factor=3.28084),
    ):
        out = t.inverse().apply(t.apply(vals))
        assert out["Alt"] == pytest.approx(vals["Alt"], rel=1e-12)
        assert out["Mach"] == vals["Mach"]
    with pytest.raises(ValueError):
        anomaly.Transform("scale", "Alt", factor=0.0)
    with pytest.raises(ValueError):
        anomaly.Transform("squash", "Alt")


def test_inject_inlier_accept_and_reject(mlm):
    t = anomaly.Transform("scale", "Alt", factor=0.1)
    p = DataPoint({"Mach": 0.35, "Alt": 12000.0})
    out = anomaly.inject_inlier(p, t, mlm)
    assert isinstance(out, DataPoint)
    assert out.values["Alt"] == pytest.approx(1200.0)
    assert out.provenance_raw == {"Mach": 0.35, "Alt": 12000.0}
    # identity corruption is rejected
    ident = anomaly.Transform("scale", "Alt", factor=1.0)
    assert isinstance(anomaly.inject_inlier(p, ident, mlm), anomaly.Rejected)
    # corruption that leaves the region is rejected
    out_of_region = anomaly.Transform("scale", "Alt", factor=10.0)
    assert isinstance(anomaly.inject_inlier(p, out_of_region, mlm), anomaly.Rejected)


def test_make_novelty_accept_and_reject(chain):
    inside_ext = DataPoint({"Mach": 0.3, "Alt": 14000.0, "Temp": 5.0})
    assert isinstance(anomaly.make_novelty(inside_ext, chain), anomaly.Rejected)
    hot = DataPoint({"Mach": 0.3, "Alt": 14000.0, "Temp": 20.0})
    out = anomaly.make_novelty(hot, chain)
    assert isinstance(out, DataPoint)
    assert out.hidden_values == {"Temp": 20.0}
    assert "Temp" not in out.values
    # projection outside the base is an outlier, not a novelty
    far = DataPoint({"Mach": 0.9, "Alt": 14000.0, "Temp": 20.0})
    assert isinstance(anomaly.make_novelty(far, chain), anomaly.Rejected)


def test_make_novelty_requires_extension(base_doc):
    chain = oddkit.build_chain(base_doc)
    assert chain.extended is None
    with pytest.raises(oddkit.MissingExtension):
        anomaly.make_novelty(DataPoint({"Mach": 0.3, "Alt": 14000.0, "Temp": 20.0}), chain)


@pytest.mark.parametrize("mode", anomaly.MODES)
def test_sampling_modes_land_in_their_stratum(mlm, mode):
    points = anomaly.sample_region(mlm, 50, mode, seed=3)
    assert len(points) == 50
    for p in points:
        inside = geometry.point_in_region(p, mlm) != Containment.OUTSIDE
        k = len(geometry.params_at_extreme(p, mlm))
        if mode == "nominal_interior":
            assert inside and k == 0
        elif mode == "edge":
            assert inside and k == 1
        elif mode == "feasible_corner":
            assert inside and k >= 2
        else:  # outlier_ring
            assert not inside and k < 2
            for v, param in zip(geometry.coords(p, mlm), mlm.parameters):
                assert param.lo - 0.2 * param.span <= v <= param.hi + 0.2 * param.span


def test_sampling_is_seed_deterministic(mlm):
    a = anomaly.sample_region(mlm, 20, "nominal_interior", seed=11)
    b = anomaly.sample_region(mlm, 20, "nominal_interior", seed=11)
    c = anomaly.sample_region(mlm, 20, "nominal_interior", seed=12)
    assert [p.values for p in a] == [p.values for p in b]
    assert [p.values for p in a] != [p.values for p in c]


def test_empty_stratum_raises():
    node = oddkit.OddNode(
        "tri",
        oddkit.Level.MLM_ODD,
        (oddkit.Parameter("x", "u", 0.0, 1.0), oddkit.Parameter("y", "u", 0.0, 1.0)),
        oddkit.Polygon2D(((0.3, 0.3), (0.7, 0.3), (0.5, 0.7))),
    )
    # the triangle touches no box bound: no edge or corner stratum exists
    with pytest.raises(oddkit.EmptyStratum):
        anomaly.sample_region(node, 5, "feasible_corner", seed=0)
    with pytest.raises(oddkit.EmptyStratum):
        anomaly.sample_region(node, 5, "edge", seed=0)


def test_sampling_rejects_bad_arguments(mlm):
    with pytest.raises(ValueError):
        anomaly.sample_region(mlm, -1, "edge", seed=0)
    with pytest.raises(ValueError):
        anomaly.sample_region(mlm, 5, "warp", seed=0)
    assert anomaly.sample_region(mlm, 0, "edge", seed=0) == []
