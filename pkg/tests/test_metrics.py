from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from archeval.alignment import MatchConfig, match_edges, match_nodes
from archeval.ged import compute_ged
from archeval.metrics import (
    EmptyBatch,
    MetricReport,
    NoMatchedNodes,
    PrfScore,
    edge_prf,
    ged_accuracy,
    layer_accuracy,
    node_prf,
    prf,
    syntactic_validity,
)
from archeval.alignment import MatchedPair, MatchMethod, NodeMatching
from archeval.model import ArchGraph, build_graph

from .oracles import naive_prf
from .strategies import diagram_graphs


def test_node_prf_hand_values():
    s = prf(3, 1, 2)
    assert s.precision == pytest.approx(0.75, abs=1e-9)
    assert s.recall == pytest.approx(0.6, abs=1e-9)
    assert s.f1 == pytest.approx(0.6667, abs=1e-4)
    assert (s.precision, s.recall, s.f1) == pytest.approx(naive_prf(3, 1, 2), abs=1e-12)


def test_edge_prf_hand_values():
    s = prf(1, 1, 1)
    assert (s.precision, s.recall, s.f1) == (0.5, 0.5, 0.5)


def test_zero_denominator_conventions():
    assert (prf(0, 0, 3).precision, prf(0, 0, 3).recall, prf(0, 0, 3).f1) == (0, 0, 0)
    assert (prf(0, 2, 0).precision, prf(0, 2, 0).recall, prf(0, 2, 0).f1) == (0, 0, 0)
    v = prf(0, 0, 0)
    assert v.vacuous and (v.precision, v.recall, v.f1) == (1, 1, 1)


def test_empty_prediction_against_reference():
    ref = build_graph(["UI", "DB"], [("UI", "DB")])
    m = match_nodes(ArchGraph(), ref)
    assert node_prf(m).f1 == 0.0
    assert edge_prf(match_edges(ArchGraph(), ref, m)).f1 == 0.0


def test_edgeless_graphs_are_vacuously_perfect():
    a = build_graph(["UI", "DB"])
    m = match_nodes(a, a)
    assert edge_prf(match_edges(a, a, m)).f1 == 1.0


def _pairs(flags):
    return NodeMatching(
        tuple(MatchedPair(f"p{i}", f"r{i}", 1.0, MatchMethod.EXACT, f) for i, f in enumerate(flags)), (), ()
    )


def test_layer_accuracy():
    assert layer_accuracy(_pairs([True, True, True, False])) == 0.75
    g = build_graph([("Application Layer", None, "package"), ("UI", "Application Layer"), "DB"])
    assert layer_accuracy(match_nodes(g, g)) == 1.0
    with pytest.raises(NoMatchedNodes):
        layer_accuracy(_pairs([]))


def test_ged_accuracy_examples():
    a = build_graph(["a", "b"], [("a", "b")])
    single = build_graph(["a"])
    assert ged_accuracy(compute_ged(a, a), a, a) == 100.0
    res = compute_ged(a, single)
    assert res.distance == 2
    assert ged_accuracy(res, a, single) == pytest.approx(33.33, abs=0.01)
    assert ged_accuracy(99, a, single) == 0.0
    assert ged_accuracy(0, ArchGraph(), ArchGraph()) == 100.0


def test_syntactic_validity():
    assert syntactic_validity([True] * 14 + [False] * 3) == pytest.approx(0.8235, abs=1e-4)
    assert syntactic_validity([True, True]) == 1.0
    with pytest.raises(EmptyBatch):
        syntactic_validity([])


def test_metric_report_round_trip():
    r = MetricReport(True, prf(1, 2, 3), prf(0, 0, 0), 0.5, 50.0, 4, False)
    assert MetricReport.from_dict(r.to_dict()) == r


@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
def test_prf_identities(tp, fp, fn):
    s = PrfScore(tp, fp, fn)
    for v in (s.precision, s.recall, s.f1):
        assert 0.0 <= v <= 1.0
    if s.precision + s.recall > 0:
        assert math.isclose(s.f1, 2 * s.precision * s.recall / (s.precision + s.recall), abs_tol=1e-12)
    else:
        assert s.f1 == 0.0
    assert (s.precision, s.recall, s.f1) == pytest.approx(naive_prf(tp, fp, fn), abs=1e-12)


@given(diagram_graphs(max_nodes=7), diagram_graphs(max_nodes=7), st.integers(0, 40))
def test_ged_accuracy_range(pred, ref, distance):
    assert 0.0 <= ged_accuracy(distance, pred, ref) <= 100.0


@given(diagram_graphs(max_nodes=7))
def test_ged_accuracy_self_is_100(g):
    assert ged_accuracy(compute_ged(g, g), g, g) == 100.0


def test_lexical_config_validation():
    with pytest.raises(ValueError):
        MatchConfig(similarity_threshold=1.5)
