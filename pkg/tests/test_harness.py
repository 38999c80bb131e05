from __future__ import annotations

import json
import shutil

import pytest
from hypothesis import given
from hypothesis import strategies as st

from archeval.harness import (
    CSV_COLUMNS,
    CaseResult,
    DatasetLayoutError,
    EmptyRatings,
    EmptyResults,
    EvalConfig,
    LengthMismatch,
    ModelSpec,
    RunManifest,
    aggregate,
    cohens_kappa,
    evaluate_case,
    graph_stats,
    load_dataset,
    load_results,
    run_benchmark,
)
from archeval.judge import Judge, JudgeConfig, JudgeScores, ScriptedJudgeResponder
from archeval.llm import ChatRequest, MockTransport, RetryableTransportError
from archeval.metrics import MetricReport, prf
from archeval.model import build_graph
from archeval.prd import ContextSetting

from .oracles import naive_kappa


@pytest.fixture
def small_dataset(tmp_path, dataset_root):
    root = tmp_path / "data"
    for name in ("dl_sharing_platform", "retool"):
        shutil.copytree(dataset_root / name, root / name)
    return root


def _write_identity_predictions(dataset, outputs, model="echo", settings=("full",)):
    for case in load_dataset(dataset):
        for s in settings:
            p = outputs / model / s / f"{case.case_id}.puml"
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(case.reference_text())


# -- dataset loading ------------------------------------------------------------


def test_load_fixture_dataset(dataset_root):
    cases = load_dataset(dataset_root)
    assert len(cases) == 17
    assert [c.case_id for c in cases] == sorted(c.case_id for c in cases)
    assert {c.language_tag for c in cases} == {"en", "zh"}


def test_missing_reference_names_the_case(small_dataset):
    (small_dataset / "retool" / "reference.puml").unlink()
    with pytest.raises(DatasetLayoutError) as info:
        load_dataset(small_dataset)
    assert "retool" in info.value.problems and "retool" in str(info.value)
    assert info.value.problems["retool"] == ["missing reference.puml"]


def test_unparseable_reference(small_dataset):
    (small_dataset / "retool" / "reference.puml").write_text("@startuml\npackage X {\n")
    with pytest.raises(DatasetLayoutError) as info:
        load_dataset(small_dataset)
    assert "does not parse" in info.value.problems["retool"][0]


def test_empty_root_warns(tmp_path):
    warnings: list[str] = []
    assert load_dataset(tmp_path, warnings) == []
    assert warnings


def test_missing_root(tmp_path):
    with pytest.raises(DatasetLayoutError):
        load_dataset(tmp_path / "nope")


# -- per-case evaluation ----------------------------------------------------------


def test_identity_case(dataset_root):
    case = load_dataset(dataset_root)[0]
    r = evaluate_case(case.reference_text(), case)
    v = r.values()
    assert v["sv"] == 1.0 and v["node_f1"] == 1.0 and v["edge_f1"] == 1.0
    assert v["layer_acc"] == 1.0 and v["ged_acc"] == 100.0
    assert r.judge is None and r.error is None


def test_absent_prediction(dataset_root):
    case = load_dataset(dataset_root)[0]
    for code in (None, "", "The model refused."):
        r = evaluate_case(code, case)
        assert r.metrics.sv_sample is False
        assert all(r.values()[k] is None for k in ("node_f1", "edge_f1", "layer_acc", "ged_acc"))


def test_extra_hallucinated_node(dataset_root):
    case = next(c for c in load_dataset(dataset_root) if c.case_id == "retool")
    text = case.reference_text().replace("@enduml", '[Quantum Teleporter] as qt_extra\n@enduml')
    r = evaluate_case(text, case)
    assert r.metrics.node.recall == 1.0 and r.metrics.node.fp == 1
    assert r.metrics.node.f1 < 1.0


def test_judge_scores_attached_and_failure_degrades(dataset_root, tmp_path):
    case = load_dataset(dataset_root)[0]
    judge = Judge(JudgeConfig("j"), MockTransport(ScriptedJudgeResponder()))
    r = evaluate_case(case.reference_text(), case, EvalConfig(judge=judge))
    assert r.judge == JudgeScores(4, 4, 4, 4, "scripted")

    def down(request: ChatRequest) -> str:
        raise RetryableTransportError("judge offline")

    broken = Judge(JudgeConfig("j", max_retries=0), MockTransport(down))
    r = evaluate_case(case.reference_text(), case, EvalConfig(judge=broken))
    assert r.judge is None and any("judge failed" in w for w in r.warnings)
    assert r.values()["node_f1"] == 1.0


def test_case_result_round_trip(dataset_root):
    case = load_dataset(dataset_root)[0]
    r = evaluate_case(case.reference_text(), case)
    assert CaseResult.from_dict(json.loads(json.dumps(r.to_dict()))) == r


# -- aggregation ------------------------------------------------------------------


def _result(case, node_f1_parts=None, layer=None, sv=True, model="m", setting="full"):
    node = prf(*node_f1_parts) if node_f1_parts else None
    return CaseResult(case, model, ContextSetting.parse(setting), MetricReport(sv, node=node, layer_accuracy=layer))


def test_mean_of_two_cases():
    # tp/fp/fn chosen so F1 is 0.4 and 0.6: (2,3,3) -> 0.4, (3,2,2) -> 0.6
    rows = [_result("a", (2, 3, 3)), _result("b", (3, 2, 2))]
    assert [r.values()["node_f1"] for r in rows] == pytest.approx([0.4, 0.6])
    assert aggregate(rows).group("m", "full").metrics["node_f1"].mean == pytest.approx(0.5, abs=1e-12)


def test_absent_metrics_are_skipped():
    rows = [_result("a", layer=0.5), _result("b", layer=None), _result("c", layer=1.0)]
    layer = aggregate(rows).group("m", "full").metrics["layer_acc"]
    assert layer.count == 2 and layer.mean == 0.75


def test_sv_over_group():
    rows = [_result("a"), _result("b"), _result("c", sv=False)]
    assert aggregate(rows).group("m", "full").sv == pytest.approx(0.6667, abs=1e-4)


def test_groups_are_separate_and_ordered():
    rows = [_result("a", setting="min"), _result("a", sv=False, setting="full"), _result("a", model="b")]
    report = aggregate(rows)
    assert [(g.model_name, g.setting.value) for g in report.groups] == [("b", "full"), ("m", "full"), ("m", "min")]
    assert report.group("m", "full").sv == 0.0 and report.group("m", "min").sv == 1.0


def test_empty_results():
    with pytest.raises(EmptyResults):
        aggregate([])


def test_report_formats():
    rows = [_result("a", (1, 0, 0), layer=1.0), _result("b", (0, 1, 1))]
    report = aggregate(rows)
    csv_lines = report.to_csv().splitlines()
    assert csv_lines[0].split(",") == list(CSV_COLUMNS)
    assert csv_lines[1].startswith("m,full,1.0000,0.5000,")
    md = report.to_markdown()
    assert md.splitlines()[0].endswith("| judge_avg |") and "n/a" in md
    assert type(report).from_dict(json.loads(report.to_json())) == report


@given(st.lists(st.floats(0, 1), min_size=1, max_size=12))
def test_mean_within_bounds(values):
    rows = [_result(f"c{i}", layer=v) for i, v in enumerate(values)]
    mean = aggregate(rows).group("m", "full").metrics["layer_acc"].mean
    assert min(values) - 1e-12 <= mean <= max(values) + 1e-12


# -- statistics -------------------------------------------------------------------


def test_stats_single_node():
    s = graph_stats(build_graph(["a"]))
    assert (s.node_count, s.max_depth, s.container_count, s.relation_count, s.top_layer_count) == (1, 1, 0, 0, 0)


def test_stats_package_with_two_children():
    s = graph_stats(build_graph([("P", None, "package"), ("a", "P"), ("b", "P")], [("a", "b")]))
    assert (s.node_count, s.max_depth, s.container_count, s.relation_count) == (3, 2, 1, 1)
    # an unrecognized top-level package counts as one layer under the default map
    assert s.top_layer_count == 1


def test_stats_layered_package():
    s = graph_stats(build_graph([("Application Layer", None, "package"), ("a", "Application Layer"), "b"]))
    assert s.top_layer_count == 1


# -- kappa ------------------------------------------------------------------------


def test_kappa_examples():
    assert cohens_kappa([1, 2, 3, 4], [1, 2, 3, 4]) == 1.0
    assert cohens_kappa([1, 1, 2, 2], [1, 2, 2, 1]) == 0.0
    assert cohens_kappa([1, 2], [2, 1]) == -1.0
    assert cohens_kappa([3, 3, 3], [3, 3, 3]) == 1.0


def test_kappa_errors():
    with pytest.raises(LengthMismatch):
        cohens_kappa([1], [1, 2])
    with pytest.raises(EmptyRatings):
        cohens_kappa([], [])
    with pytest.raises(ValueError):
        cohens_kappa([1], [1], weights="quadratic")


def test_linear_weighted_kappa():
    assert cohens_kappa([1, 2, 3], [1, 2, 3], weights="linear") == 1.0
    # one-step disagreements are penalized less than the unweighted statistic does
    a, b = [1, 2, 3, 4, 5, 1, 2], [2, 2, 3, 5, 5, 1, 3]
    assert cohens_kappa(a, b, weights="linear") > cohens_kappa(a, b)


@given(st.lists(st.tuples(st.integers(1, 5), st.integers(1, 5)), min_size=1, max_size=40))
def test_kappa_symmetric_and_matches_oracle(pairs):
    a, b = [x for x, _ in pairs], [y for _, y in pairs]
    k = cohens_kappa(a, b)
    assert k == cohens_kappa(b, a)
    assert k == pytest.approx(naive_kappa(a, b), abs=1e-9)
    assert -1.0 <= k <= 1.0


# -- benchmark runs ------------------------------------------------------------------


def _manifest(root, tmp_path, **kw):
    data = {
        "dataset": str(root), "models": ["echo"], "settings": ["full"], "outputs": str(tmp_path / "outputs"),
        "results": str(tmp_path / "results"), "run_id": "r1", "workers": 2, **kw,
    }
    return RunManifest.from_dict(data)


def test_identity_benchmark(small_dataset, tmp_path):
    _write_identity_predictions(small_dataset, tmp_path / "outputs")
    out = run_benchmark(_manifest(small_dataset, tmp_path))
    g = out.aggregate.group("echo", "full")
    assert g.sv == 1.0 and g.metrics["node_f1"].mean == 1.0 and g.case_count == 2
    run = tmp_path / "results" / "r1"
    assert {p.name for p in run.iterdir()} == {"cases.jsonl", "aggregate.json", "aggregate.csv", "aggregate.md"}
    assert load_results(run) == out.results


def test_missing_predictions_count_as_failures(small_dataset, tmp_path):
    out = run_benchmark(_manifest(small_dataset, tmp_path))
    assert out.aggregate.group("echo", "full").sv == 0.0
    assert all("no prediction file" in r.warnings[0] for r in out.results)


def test_judge_outage_in_one_cell(small_dataset, tmp_path):
    _write_identity_predictions(small_dataset, tmp_path / "outputs")
    retool_ref = (small_dataset / "retool" / "reference.puml").read_text()
    scripted = ScriptedJudgeResponder()

    def flaky(request: ChatRequest) -> str:
        if retool_ref.strip() in request.user_text:
            raise RetryableTransportError("timeout")
        return scripted(request)

    manifest = _manifest(small_dataset, tmp_path, judge={"model_name": "j", "max_retries": 0})
    out = run_benchmark(manifest, judge_transport=MockTransport(flaky))
    by_case = {r.case_id: r for r in out.results}
    assert by_case["retool"].judge is None and any("judge failed" in w for w in by_case["retool"].warnings)
    assert by_case["dl_sharing_platform"].judge is not None
    assert out.aggregate.group("echo", "full").metrics["comp"].count == 1


def test_warm_cache_rerun_makes_no_judge_calls(small_dataset, tmp_path):
    _write_identity_predictions(small_dataset, tmp_path / "outputs")
    judge = {"model_name": "j", "cache_dir": str(tmp_path / "cache")}
    first = MockTransport(ScriptedJudgeResponder())
    a = run_benchmark(_manifest(small_dataset, tmp_path, judge=judge), judge_transport=first)
    assert first.call_count == 2
    second = MockTransport(ScriptedJudgeResponder())
    b = run_benchmark(_manifest(small_dataset, tmp_path, judge=judge, run_id="r2"), judge_transport=second)
    assert second.call_count == 0
    assert a.aggregate.to_json() == b.aggregate.to_json()


def test_cell_crash_is_isolated(small_dataset, tmp_path, monkeypatch):
    _write_identity_predictions(small_dataset, tmp_path / "outputs")
    import archeval.harness as harness

    real = harness.evaluate_case

    def sometimes(code, case, *args, **kw):
        if case.case_id == "retool":
            raise RuntimeError("boom")
        return real(code, case, *args, **kw)

    monkeypatch.setattr(harness, "evaluate_case", sometimes)
    out = run_benchmark(_manifest(small_dataset, tmp_path))
    by_case = {r.case_id: r for r in out.results}
    assert by_case["retool"].error == "RuntimeError: boom"
    g = out.aggregate.group("echo", "full")
    assert g.metrics["sv"].count == 1 and g.sv == 1.0


def test_generation_path_persists_outputs(small_dataset, tmp_path):
    refs = {c.case_id: c.reference_text() for c in load_dataset(small_dataset)}
    gen = MockTransport(lambda req: f"```plantuml\n{refs['retool']}\n```")
    manifest = _manifest(small_dataset, tmp_path, workers=1)
    out = run_benchmark(manifest, gen_transport=gen)
    assert gen.call_count == 2
    assert (tmp_path / "outputs" / "echo" / "full" / "retool.json").is_file()
    by_case = {r.case_id: r for r in out.results}
    assert by_case["retool"].values()["node_f1"] == 1.0
    assert by_case["dl_sharing_platform"].values()["node_f1"] < 1.0


def test_manifest_loading(tmp_path, small_dataset):
    (tmp_path / "m.toml").write_text(
        'dataset = "data"\nsettings = ["full", "noarch"]\n[[models]]\nname = "a"\n'
        '[judge]\nenabled = false\nmodel_name = "x"\n'
    )
    m = RunManifest.load(tmp_path / "m.toml")
    assert m.dataset == tmp_path.resolve() / "data"
    assert m.settings == (ContextSetting.FULL, ContextSetting.NO_ARCH)
    assert m.models == (ModelSpec("a"),) and m.judge is None
    with pytest.raises(ValueError):
        RunManifest.from_dict({"dataset": "x", "models": []})


def test_parallel_width_does_not_change_outputs(small_dataset, tmp_path):
    _write_identity_predictions(small_dataset, tmp_path / "outputs", settings=("full", "min"))
    blobs = []
    for i, width in enumerate((1, 3)):
        m = _manifest(small_dataset, tmp_path, run_id=f"w{i}", settings=["full", "min"])
        out = run_benchmark(m, workers=width)
        blobs.append(((out.run_dir / "aggregate.json").read_bytes(), (out.run_dir / "cases.jsonl").read_bytes()))
    assert blobs[0] == blobs[1]
