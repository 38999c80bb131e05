"""Dataset loading, per-case evaluation, benchmark runs, aggregation,
corpus statistics and inter-rater agreement."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import threading
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Hashable, Iterable, Sequence

from .alignment import JudgeUnavailable, MatchConfig, MatchMode, match_edges, match_nodes
from .antipattern import AntiPatternReport, detect
from .genclient import (
    EmptyModelOutput,
    GenerationConfig,
    GenerationTransportError,
    generate_diagram,
    load_record,
    safe_dirname,
    write_atomic,
)
from .ged import compute_ged
from .judge import Judge, JudgeConfig, JudgeScores, JudgeTransportError, MalformedJudgeResponse
from .llm import Transport
from .metrics import MetricReport, NoMatchedNodes, edge_prf, ged_accuracy, layer_accuracy, node_prf
from .model import ArchGraph, LayerMap, layer_of, leaf_nodes, max_depth
from .plantuml import ParseMode, RendererConfig, RendererUnavailable, SyntaxMode, parse_with_diagnostics, validate
from .prd import ContextSetting, NoSectionsFound, apply_setting, parse_prd
from .synonyms import SynonymTable

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "model", "setting", "sv", "node_f1", "edge_f1", "layer_acc", "ged_acc",
    "comp", "acc", "rat", "read", "orphan_ratio", "god_ratio",
)
METRIC_KEYS = (
    "sv", "node_precision", "node_recall", "node_f1", "edge_precision", "edge_recall", "edge_f1",
    "layer_acc", "ged_acc", "comp", "acc", "rat", "read", "orphan_ratio", "god_ratio",
)
_SETTING_ORDER = {s: i for i, s in enumerate(ContextSetting)}


class DatasetLayoutError(ValueError):
    def __init__(self, message: str, problems: dict[str, list[str]] | None = None):
        self.problems = problems or {}
        detail = "".join(f"\n  {cid}: {'; '.join(p)}" for cid, p in sorted(self.problems.items()))
        super().__init__(message + detail)


class EmptyResults(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


class EmptyRatings(ValueError):
    pass


# -- dataset ------------------------------------------------------------------


@dataclass(frozen=True)
class ProjectCase:
    case_id: str
    prd_path: Path
    reference_path: Path
    language_tag: str | None = None

    def prd_text(self) -> str:
        return self.prd_path.read_text(encoding="utf-8")

    def reference_text(self) -> str:
        return self.reference_path.read_text(encoding="utf-8")

    def reference_graph(self) -> ArchGraph:
        result = parse_with_diagnostics(self.reference_text(), ParseMode.LENIENT)
        if result.graph is None:
            raise DatasetLayoutError(f"reference for {self.case_id} does not parse")
        return result.graph


def load_dataset(root: str | Path, warnings: list[str] | None = None) -> list[ProjectCase]:
    """Discover ``<root>/<case_id>/{prd.md, reference.puml}`` and check both parse."""
    root = Path(root)
    if not root.is_dir():
        raise DatasetLayoutError(f"dataset root {root} does not exist or is not a directory")
    cases, problems = [], {}
    for d in sorted(p for p in root.iterdir() if p.is_dir() and not p.name.startswith(".")):
        prd, ref = d / "prd.md", d / "reference.puml"
        issues = []
        if not prd.is_file():
            issues.append("missing prd.md")
        if not ref.is_file():
            issues.append("missing reference.puml")
        if not issues:
            result = parse_with_diagnostics(ref.read_bytes(), ParseMode.LENIENT)
            if result.graph is None:
                issues.append("reference.puml does not parse: " + result.errors[0].format(str(ref)))
            try:
                parse_prd(prd.read_text(encoding="utf-8"))
            except (NoSectionsFound, UnicodeDecodeError) as exc:
                issues.append(f"prd.md unusable: {exc}")
        if issues:
            problems[d.name] = issues
            continue
        tag = None
        meta = d / "meta.json"
        if meta.is_file():
            try:
                tag = json.loads(meta.read_text(encoding="utf-8")).get("language")
            except ValueError:
                problems[d.name] = ["meta.json is not valid JSON"]
                continue
        cases.append(ProjectCase(d.name, prd, ref, tag))
    if problems:
        raise DatasetLayoutError(f"dataset {root} has {len(problems)} malformed case(s)", problems)
    if not cases:
        msg = f"dataset root {root} contains no cases"
        log.warning(msg)
        if warnings is not None:
            warnings.append(msg)
    return cases


# -- per-case evaluation -------------------------------------------------------


@dataclass(frozen=True)
class EvalConfig:
    match: MatchConfig = field(default_factory=MatchConfig)
    syntax_mode: SyntaxMode = SyntaxMode.INTERNAL_STRICT
    renderer: RendererConfig | None = None
    ged_budget: float = 5.0
    ged_exact_cutoff: int = 8
    judge: Judge | None = None
    score_with_judge: bool = True
    judge_against: str = "prd"  # or "reference"
    orphan_inherit: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "syntax_mode", SyntaxMode(self.syntax_mode))
        if self.judge_against not in ("prd", "reference"):
            raise ValueError("judge_against must be 'prd' or 'reference'")


@dataclass(frozen=True)
class CaseResult:
    case_id: str
    model_name: str
    setting: ContextSetting
    metrics: MetricReport
    antipatterns: AntiPatternReport | None = None
    judge: JudgeScores | None = None
    warnings: tuple[str, ...] = ()
    error: str | None = None

    def sort_key(self) -> tuple:
        return (self.model_name, _SETTING_ORDER[self.setting], self.case_id)

    def values(self) -> dict[str, float | None]:
        """Flat numeric view used by aggregation; None marks an absent metric."""
        m, j, a = self.metrics, self.judge, self.antipatterns
        return {
            "sv": None if self.error else float(m.sv_sample),
            "node_precision": m.node.precision if m.node else None,
            "node_recall": m.node.recall if m.node else None,
            "node_f1": m.node.f1 if m.node else None,
            "edge_precision": m.edge.precision if m.edge else None,
            "edge_recall": m.edge.recall if m.edge else None,
            "edge_f1": m.edge.f1 if m.edge else None,
            "layer_acc": m.layer_accuracy,
            "ged_acc": m.ged_accuracy,
            "comp": float(j.completeness) if j else None,
            "acc": float(j.accuracy) if j else None,
            "rat": float(j.rationality) if j else None,
            "read": float(j.readability) if j else None,
            "orphan_ratio": a.orphan_ratio if a else None,
            "god_ratio": a.god_ratio if a else None,
        }

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "model_name": self.model_name,
            "setting": self.setting.value,
            "metrics": self.metrics.to_dict(),
            "antipatterns": self.antipatterns.to_dict() if self.antipatterns else None,
            "judge": self.judge.to_dict() if self.judge else None,
            "warnings": list(self.warnings),
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: dict) -> CaseResult:
        return cls(
            data["case_id"],
            data["model_name"],
            ContextSetting.parse(data["setting"]),
            MetricReport.from_dict(data["metrics"]),
            AntiPatternReport.from_dict(data["antipatterns"]) if data.get("antipatterns") else None,
            JudgeScores.from_dict(data["judge"]) if data.get("judge") else None,
            tuple(data.get("warnings", ())),
            data.get("error"),
        )


def evaluate_graphs(
    pred: ArchGraph, ref: ArchGraph, config: EvalConfig, warnings: list[str]
) -> tuple[MetricReport, AntiPatternReport]:
    match_cfg = config.match
    try:
        nodes = match_nodes(pred, ref, match_cfg, config.judge)
    except (JudgeUnavailable, JudgeTransportError) as exc:
        warnings.append(f"alignment judge failed ({exc}); fell back to lexical matching")
        match_cfg = MatchConfig(
            MatchMode.LEXICAL, match_cfg.similarity_threshold, match_cfg.synonyms,
            match_cfg.direction_sensitive, match_cfg.layer_map,
        )
        nodes = match_nodes(pred, ref, match_cfg)
    edges = match_edges(pred, ref, nodes, match_cfg)
    try:
        layer = layer_accuracy(nodes)
    except NoMatchedNodes:
        layer = None
        warnings.append("layer accuracy undefined: no matched leaf nodes")
    ged = compute_ged(pred, ref, config.ged_budget, synonyms=match_cfg.synonyms, exact_cutoff=config.ged_exact_cutoff)
    metrics = MetricReport(
        sv_sample=True,
        node=node_prf(nodes),
        edge=edge_prf(edges),
        layer_accuracy=layer,
        ged_accuracy=ged_accuracy(ged, pred, ref),
        ged_distance=ged.distance,
        ged_exact=ged.exact,
    )
    return metrics, detect(pred, inherit=config.orphan_inherit)


def evaluate_case(
    predicted_code: str | None,
    case: ProjectCase,
    config: EvalConfig | None = None,
    model_name: str = "unknown",
    setting: ContextSetting | str = ContextSetting.FULL,
    extra_warnings: Sequence[str] = (),
) -> CaseResult:
    """Score one prediction against a case. Never raises for model-side failures."""
    config = config or EvalConfig()
    setting = ContextSetting.parse(setting)
    warnings = list(extra_warnings)

    def result(metrics, anti=None, judge=None):
        return CaseResult(case.case_id, model_name, setting, metrics, anti, judge, tuple(warnings))

    if predicted_code is None or not predicted_code.strip():
        warnings.append("no predicted diagram")
        return result(MetricReport(sv_sample=False))
    try:
        report = validate(predicted_code, config.syntax_mode, config.renderer)
    except RendererUnavailable as exc:
        warnings.append(f"renderer unavailable: {exc}")
        return result(MetricReport(sv_sample=False))
    if not report.valid:
        first = next((d for d in report.diagnostics if d.severity.value == "error"), None)
        warnings.append("prediction is not valid PlantUML" + (f": {first.format('pred')}" if first else ""))
        return result(MetricReport(sv_sample=False))

    parsed = parse_with_diagnostics(predicted_code, ParseMode.LENIENT)
    if parsed.graph is None:
        warnings.append("renderer accepted the prediction but the internal parser could not build a graph")
        return result(MetricReport(sv_sample=True))
    metrics, anti = evaluate_graphs(parsed.graph, case.reference_graph(), config, warnings)

    scores = None
    if config.judge is not None and config.score_with_judge:
        basis = case.prd_text() if config.judge_against == "prd" else case.reference_text()
        try:
            scores = config.judge.score_diagram(basis, predicted_code)
        except (JudgeTransportError, MalformedJudgeResponse) as exc:
            warnings.append(f"judge failed: {exc}")
    return result(metrics, anti, scores)


# -- aggregation ---------------------------------------------------------------


@dataclass(frozen=True)
class MetricSummary:
    mean: float | None
    count: int


@dataclass(frozen=True)
class GroupAggregate:
    model_name: str
    setting: ContextSetting
    case_count: int
    metrics: dict[str, MetricSummary]

    @property
    def sv(self) -> float | None:
        return self.metrics["sv"].mean

    def judge_avg(self) -> float | None:
        vals = [self.metrics[k].mean for k in ("comp", "acc", "rat", "read")]
        return None if any(v is None for v in vals) else math.fsum(vals) / 4


@dataclass(frozen=True)
class AggregateReport:
    groups: tuple[GroupAggregate, ...]

    def group(self, model_name: str, setting: ContextSetting | str) -> GroupAggregate:
        setting = ContextSetting.parse(setting)
        for g in self.groups:
            if g.model_name == model_name and g.setting is setting:
                return g
        raise KeyError((model_name, setting))

    def to_dict(self) -> dict:
        return {
            "groups": [
                {
                    "model": g.model_name,
                    "setting": g.setting.value,
                    "case_count": g.case_count,
                    "metrics": {k: {"mean": s.mean, "count": s.count} for k, s in g.metrics.items()},
                }
                for g in self.groups
            ]
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> AggregateReport:
        return cls(tuple(
            GroupAggregate(
                g["model"], ContextSetting.parse(g["setting"]), g["case_count"],
                {k: MetricSummary(v["mean"], v["count"]) for k, v in g["metrics"].items()},
            )
            for g in data["groups"]
        ))

    def _row(self, g: GroupAggregate) -> list[str]:
        row = [g.model_name, g.setting.value]
        for col in CSV_COLUMNS[2:]:
            row.append(_fmt(g.metrics[col].mean))
        return row

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for g in self.groups:
            w.writerow(self._row(g))
        return buf.getvalue()

    def to_markdown(self) -> str:
        header = list(CSV_COLUMNS) + ["judge_avg"]
        lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
        for g in self.groups:
            cells = self._row(g) + [_fmt(g.judge_avg())]
            lines.append("| " + " | ".join(c if c else "n/a" for c in cells) + " |")
        return "\n".join(lines) + "\n"


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.4f}"


def aggregate(results: Iterable[CaseResult]) -> AggregateReport:
    """Unweighted mean of every metric within each (model, setting) group,
    skipping cases where the metric is absent."""
    results = sorted(results, key=CaseResult.sort_key)
    if not results:
        raise EmptyResults("no case results to aggregate")
    grouped: dict[tuple[str, ContextSetting], list[CaseResult]] = {}
    for r in results:
        grouped.setdefault((r.model_name, r.setting), []).append(r)
    groups = []
    for (model, setting), rows in grouped.items():
        summaries = {}
        for key in METRIC_KEYS:
            vals = [v for v in (r.values()[key] for r in rows) if v is not None]
            summaries[key] = MetricSummary(math.fsum(vals) / len(vals) if vals else None, len(vals))
        groups.append(GroupAggregate(model, setting, len(rows), summaries))
    return AggregateReport(tuple(groups))


# -- benchmark runs ------------------------------------------------------------


@dataclass(frozen=True)
class ModelSpec:
    name: str
    endpoint: str | None = None  # generation endpoint; None means predictions must exist
    predictions: Path | None = None  # overrides the manifest outputs root for this model


@dataclass(frozen=True)
class RunManifest:
    dataset: Path
    models: tuple[ModelSpec, ...]
    settings: tuple[ContextSetting, ...] = (ContextSetting.FULL,)
    run_id: str = "run"
    outputs: Path = Path("outputs")
    results: Path = Path("results")
    matcher: MatchMode = MatchMode.LEXICAL
    similarity_threshold: float = 0.5
    syntax_mode: SyntaxMode = SyntaxMode.INTERNAL_STRICT
    renderer: str | None = None
    ged_budget: float = 5.0
    judge: dict | None = None  # JudgeConfig fields; None disables the judge
    workers: int | None = None
    synonyms: Path | None = None

    @classmethod
    def from_dict(cls, data: dict, base: Path | None = None) -> RunManifest:
        base = base or Path.cwd()

        def path(v):
            if v is None:
                return None
            p = Path(v).expanduser()
            return p if p.is_absolute() else base / p

        if "dataset" not in data:
            raise ValueError("manifest needs a 'dataset' entry")
        models = []
        for m in data.get("models", []):
            if isinstance(m, str):
                m = {"name": m}
            models.append(ModelSpec(m["name"], m.get("endpoint"), path(m.get("predictions"))))
        if not models:
            raise ValueError("manifest lists no models")
        judge = data.get("judge")
        if judge is not None and judge.get("enabled", True) is False:
            judge = None
        if judge is not None:
            judge = {k: v for k, v in judge.items() if k != "enabled"}
            if judge.get("cache_dir") is not None:
                judge["cache_dir"] = path(judge["cache_dir"])
        return cls(
            dataset=path(data["dataset"]),
            models=tuple(models),
            settings=tuple(ContextSetting.parse(s) for s in data.get("settings", ["full"])),
            run_id=str(data.get("run_id", "run")),
            outputs=path(data.get("outputs", "outputs")),
            results=path(data.get("results", "results")),
            matcher=MatchMode(data.get("matcher", "lexical")),
            similarity_threshold=float(data.get("similarity_threshold", 0.5)),
            syntax_mode=SyntaxMode(data.get("syntax_mode", "internal_strict")),
            renderer=data.get("renderer"),
            ged_budget=float(data.get("ged_budget", 5.0)),
            judge=judge,
            workers=data.get("workers"),
            synonyms=path(data.get("synonyms")),
        )

    @classmethod
    def load(cls, path: str | Path, defaults: dict | None = None) -> RunManifest:
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        if path.suffix == ".toml":
            from ._toml import loads

            data = loads(text)
        else:
            data = json.loads(text)
        return cls.from_dict({**(defaults or {}), **data}, path.parent.resolve())

    @property
    def run_dir(self) -> Path:
        return self.results / self.run_id


@dataclass
class BenchmarkOutcome:
    aggregate: AggregateReport
    results: list[CaseResult]
    run_dir: Path


def find_prediction(outputs: Path, model: str, setting: ContextSetting, case_id: str) -> Path | None:
    base = outputs / safe_dirname(model) / setting.value
    for suffix in (".puml", ".json"):
        p = base / f"{case_id}{suffix}"
        if p.is_file():
            return p
    return None


TransportFactory = Callable[[str], Transport]


def run_benchmark(
    manifest: RunManifest,
    judge_transport: Transport | None = None,
    gen_transport: Transport | TransportFactory | None = None,
    workers: int | None = None,
) -> BenchmarkOutcome:
    """Evaluate every (case, model, setting) cell and write the run directory.

    ``cases.jsonl`` is appended as cells finish and rewritten in sorted order
    at the end, so the final artifacts do not depend on scheduling.
    """
    cases = load_dataset(manifest.dataset)
    synonyms = SynonymTable.load(manifest.synonyms) if manifest.synonyms else SynonymTable.default()
    judge = None
    if manifest.judge is not None or manifest.matcher is not MatchMode.LEXICAL:
        if manifest.judge is None:
            raise JudgeUnavailable(f"matcher {manifest.matcher.value!r} needs a [judge] section")
        judge = Judge(JudgeConfig(**manifest.judge), judge_transport)
    config = EvalConfig(
        match=MatchConfig(manifest.matcher, manifest.similarity_threshold, synonyms, layer_map=LayerMap.default()),
        syntax_mode=manifest.syntax_mode,
        renderer=RendererConfig(manifest.renderer) if manifest.renderer else None,
        ged_budget=manifest.ged_budget,
        judge=judge,
        score_with_judge=manifest.judge is not None,
    )
    if config.syntax_mode is SyntaxMode.EXTERNAL_RENDERER:
        if config.renderer is None:
            raise RendererUnavailable("external_renderer mode needs a renderer path in the manifest")
        config.renderer.command()  # fail fast on a missing executable

    run_dir = manifest.run_dir
    run_dir.mkdir(parents=True, exist_ok=True)
    journal = run_dir / "cases.jsonl"
    journal.write_text("", encoding="utf-8")
    lock = threading.Lock()

    def transport_for(model: ModelSpec) -> Transport | None:
        if gen_transport is None:
            return None
        return gen_transport if hasattr(gen_transport, "complete") else gen_transport(model.name)

    def cell(case: ProjectCase, model: ModelSpec, setting: ContextSetting) -> CaseResult:
        try:
            code, notes = _prediction(case, model, setting, manifest, transport_for(model))
            res = evaluate_case(code, case, config, model.name, setting, notes)
        except Exception as exc:  # isolate the cell, keep the run going
            log.exception("cell %s/%s/%s failed", model.name, setting.value, case.case_id)
            res = CaseResult(
                case.case_id, model.name, setting, MetricReport(sv_sample=False),
                warnings=(f"evaluation failed: {type(exc).__name__}: {exc}",),
                error=f"{type(exc).__name__}: {exc}",
            )
        line = json.dumps(res.to_dict(), ensure_ascii=False, sort_keys=True)
        with lock:
            with journal.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
        return res

    cells = [(c, m, s) for m in manifest.models for s in manifest.settings for c in cases]
    width = workers or manifest.workers or os.cpu_count() or 1
    with ThreadPoolExecutor(max_workers=max(1, width)) as pool:
        results = list(pool.map(lambda args: cell(*args), cells))
    results.sort(key=CaseResult.sort_key)
    write_atomic(journal, "".join(json.dumps(r.to_dict(), ensure_ascii=False, sort_keys=True) + "\n" for r in results))
    report = aggregate(results) if results else AggregateReport(())
    write_reports(report, run_dir)
    return BenchmarkOutcome(report, results, run_dir)


def _prediction(
    case: ProjectCase, model: ModelSpec, setting: ContextSetting, manifest: RunManifest, transport: Transport | None
) -> tuple[str | None, list[str]]:
    outputs = model.predictions or manifest.outputs
    notes: list[str] = []
    found = find_prediction(outputs, model.name, setting, case.case_id)
    if found is not None:
        if found.suffix == ".puml":
            return found.read_text(encoding="utf-8", errors="replace"), notes
        record = load_record(found)
        notes.extend(record.warnings)
        return record.extracted_code, notes
    if model.endpoint is None and transport is None:
        notes.append(f"no prediction file for {model.name}/{setting.value}/{case.case_id}")
        return None, notes
    prd_input = apply_setting(parse_prd(case.prd_text()), setting)
    gen = GenerationConfig(model_name=model.name, endpoint=model.endpoint)
    try:
        record = generate_diagram(prd_input, gen, case.case_id, setting, transport, outputs)
    except (GenerationTransportError, EmptyModelOutput) as exc:
        notes.append(f"generation failed: {exc}")
        return None, notes
    notes.extend(record.warnings)
    return record.extracted_code, notes


def write_reports(report: AggregateReport, run_dir: Path) -> None:
    write_atomic(run_dir / "aggregate.json", report.to_json())
    write_atomic(run_dir / "aggregate.csv", report.to_csv())
    write_atomic(run_dir / "aggregate.md", report.to_markdown())


def load_results(run_dir: str | Path) -> list[CaseResult]:
    path = Path(run_dir) / "cases.jsonl"
    with path.open(encoding="utf-8") as fh:
        return [CaseResult.from_dict(json.loads(line)) for line in fh if line.strip()]


# -- corpus statistics -----------------------------------------------------------


@dataclass(frozen=True)
class CaseStats:
    case_id: str
    node_count: int
    max_depth: int
    container_count: int
    relation_count: int
    top_layer_count: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def graph_stats(graph: ArchGraph, case_id: str = "", layer_map: LayerMap | None = None) -> CaseStats:
    layers = {layer_of(graph, nid, layer_map) for nid in leaf_nodes(graph)}
    layers.discard("unlayered")
    return CaseStats(
        case_id,
        len(graph.nodes),
        max_depth(graph),
        len(graph.containers()),
        len(graph.edges),
        len(layers),
    )


def dataset_stats(cases: Sequence[ProjectCase], layer_map: LayerMap | None = None) -> list[CaseStats]:
    return [graph_stats(c.reference_graph(), c.case_id, layer_map) for c in cases]


# -- agreement -------------------------------------------------------------------


def cohens_kappa(
    ratings_a: Sequence[Hashable], ratings_b: Sequence[Hashable], weights: str | None = None
) -> float:
    """Cohen's kappa between two raters; ``weights="linear"`` for ordinal numeric scales."""
    if len(ratings_a) != len(ratings_b):
        raise LengthMismatch(f"{len(ratings_a)} vs {len(ratings_b)} ratings")
    n = len(ratings_a)
    if n == 0:
        raise EmptyRatings("no ratings")
    if weights not in (None, "linear"):
        raise ValueError("weights must be None or 'linear'")
    ca, cb = Counter(ratings_a), Counter(ratings_b)
    if weights is None:
        p_o = Fraction(sum(a == b for a, b in zip(ratings_a, ratings_b)), n)
        p_e = sum(Fraction(ca[k] * cb[k], n * n) for k in ca.keys() & cb.keys())
        if p_e == 1:
            return 1.0
        return float((p_o - p_e) / (1 - p_e))
    cats = sorted(set(ca) | set(cb))
    if len(cats) == 1:
        return 1.0
    pos = {c: i for i, c in enumerate(cats)}
    span = len(cats) - 1
    obs = sum(Fraction(abs(pos[a] - pos[b]), span) for a, b in zip(ratings_a, ratings_b)) / n
    exp = sum(Fraction(ca[x] * cb[y], n * n) * Fraction(abs(pos[x] - pos[y]), span) for x in ca for y in cb)
    if exp == 0:
        return 1.0
    return float(1 - obs / exp)

