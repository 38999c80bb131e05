"""Command-line entry point."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path
from typing import Mapping, Sequence

from . import genclient, judge as judge_mod
from .alignment import JudgeUnavailable, MatchConfig, MatchMode
from .harness import (
    DatasetLayoutError,
    EmptyRatings,
    EmptyResults,
    EvalConfig,
    LengthMismatch,
    ProjectCase,
    RunManifest,
    aggregate,
    cohens_kappa,
    dataset_stats,
    evaluate_case,
    load_dataset,
    load_results,
    run_benchmark,
)
from .llm import HttpChatTransport, TransportError
from .model import canonical_serialize
from .plantuml import (
    ParseMode,
    RendererConfig,
    RendererUnavailable,
    SyntaxMode,
    parse_with_diagnostics,
    validate,
)
from .prd import ContextSetting, MissingRequiredSection, NoSectionsFound, apply_setting, parse_prd

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_ENV = 0, 1, 2, 3
CONFIG_NAME = "archeval.toml"

_SYNTAX_MODES = {
    "strict": SyntaxMode.INTERNAL_STRICT,
    "lenient": SyntaxMode.INTERNAL_LENIENT,
    "renderer": SyntaxMode.EXTERNAL_RENDERER,
}


class ConfigError(Exception):
    """Environment or configuration problem (exit 3)."""


def _emit_json(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, ensure_ascii=False, sort_keys=True) + "\n")


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8", errors="replace")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _graph_json(graph) -> dict:
    return {
        "nodes": [
            {
                "id": n.id, "display_name": n.display_name, "kind": n.kind.value, "alias": n.alias,
                "stereotype": n.stereotype, "parent": n.parent,
            }
            for n in graph.nodes
        ],
        "edges": [
            {
                "source": e.source, "target": e.target, "label": e.label, "style": e.style.value,
                "direction_hint": e.direction_hint.value if e.direction_hint else None,
            }
            for e in graph.edges
        ],
        "source_digest": graph.source_digest,
    }


# -- subcommands ---------------------------------------------------------------


def cmd_validate(args, env) -> int:
    text = _read(args.file)
    mode = _SYNTAX_MODES[args.mode]
    renderer = RendererConfig(args.renderer, timeout=args.render_timeout) if args.renderer else None
    try:
        report = validate(text, mode, renderer)
    except RendererUnavailable as exc:
        raise ConfigError(str(exc)) from exc
    if args.json:
        _emit_json({"file": args.file, **report.to_dict()})
    else:
        print("valid" if report.valid else "invalid")
        for d in report.diagnostics:
            print(d.format(args.file), file=sys.stderr)
    return EXIT_OK if report.valid else EXIT_FAIL


def cmd_parse(args, env) -> int:
    text = _read(args.file)
    result = parse_with_diagnostics(text, ParseMode.LENIENT if args.lenient else ParseMode.STRICT)
    for d in result.diagnostics:
        print(d.format(args.file), file=sys.stderr)
    if result.graph is None:
        return EXIT_FAIL
    if args.emit == "json":
        _emit_json(_graph_json(result.graph))
    else:
        sys.stdout.write(canonical_serialize(result.graph) + "\n")
    return EXIT_OK


def _judge(args, env, required: bool):
    endpoint = args.judge_endpoint
    if not endpoint:
        if required:
            raise ConfigError(f"--matcher {args.matcher} needs --judge-endpoint")
        return None
    if not args.judge_model:
        raise ConfigError("--judge-model is required when a judge endpoint is given")
    cfg = judge_mod.JudgeConfig(model_name=args.judge_model, endpoint=endpoint, cache_dir=args.judge_cache)
    transport = HttpChatTransport(endpoint, env.get(judge_mod.API_KEY_ENV), cfg.request_timeout)
    return judge_mod.Judge(cfg, transport)


def cmd_eval(args, env) -> int:
    matcher = MatchMode(args.matcher)
    judge = _judge(args, env, required=matcher is not MatchMode.LEXICAL)
    pred_text = _read(args.pred)
    ref_path = Path(args.ref)
    if not ref_path.is_file():
        raise ConfigError(f"reference not found: {args.ref}")
    ref_result = parse_with_diagnostics(_read(args.ref), ParseMode.LENIENT)
    if ref_result.graph is None:
        raise ConfigError("reference does not parse: " + ref_result.errors[0].format(args.ref))
    prd_path = Path(args.prd) if args.prd else ref_path
    case = ProjectCase(ref_path.stem, prd_path, ref_path)
    config = EvalConfig(
        match=MatchConfig(matcher, args.threshold),
        syntax_mode=_SYNTAX_MODES[args.syntax_mode],
        renderer=RendererConfig(args.renderer) if args.renderer else None,
        ged_budget=args.ged_budget_ms / 1000.0,
        judge=judge,
        score_with_judge=judge is not None,
        judge_against="prd" if args.prd else "reference",
    )
    res = evaluate_case(pred_text, case, config, model_name=args.model_label)
    values = res.values()
    if args.json:
        _emit_json({**res.to_dict(), "summary": values})
    else:
        print(f"case     {res.case_id}")
        for key, val in values.items():
            print(f"{key:<15}{'n/a' if val is None else f'{val:.4f}'}")
        for w in res.warnings:
            print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK if res.metrics.sv_sample else EXIT_FAIL


def cmd_generate(args, env) -> int:
    try:
        doc = parse_prd(_read(args.prd))
        prd_input = apply_setting(doc, ContextSetting.parse(args.setting))
    except (NoSectionsFound, MissingRequiredSection) as exc:
        raise ConfigError(str(exc)) from exc
    cfg = genclient.GenerationConfig(model_name=args.model, endpoint=args.endpoint)
    transport = HttpChatTransport(args.endpoint, env.get(genclient.API_KEY_ENV), cfg.request_timeout)
    case_id = args.case_id or Path(args.prd).resolve().parent.name
    try:
        record = genclient.generate_diagram(prd_input, cfg, case_id, args.setting, transport, args.output_root)
    except (genclient.GenerationTransportError, genclient.EmptyModelOutput) as exc:
        raise ConfigError(str(exc)) from exc
    if args.json:
        _emit_json(record.to_dict())
    else:
        path = genclient.record_path(Path(args.output_root), cfg.model_name, record.setting, case_id)
        print(f"wrote {path}")
        print("diagram extracted" if record.extracted_code else "no diagram block in output")
    return EXIT_OK if record.extracted_code else EXIT_FAIL


def cmd_bench(args, env) -> int:
    cases = load_dataset(args.dataset)  # fail early with the layout error
    if args.manifest:
        try:
            manifest = RunManifest.load(args.manifest, {"dataset": str(Path(args.dataset).resolve())})
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigError(f"bad manifest {args.manifest}: {exc}") from exc
    else:
        if not args.model:
            raise ConfigError("bench needs --manifest or at least one --model")
        manifest = RunManifest.from_dict(
            {
                "dataset": args.dataset,
                "models": args.model,
                "settings": args.setting or ["full"],
                "outputs": args.outputs or "outputs",
                "results": args.results or "results",
            },
            Path.cwd(),
        )
    if args.dataset and Path(args.dataset).resolve() != manifest.dataset.resolve():
        manifest = dataclasses.replace(manifest, dataset=Path(args.dataset))
    if args.run_id:
        manifest = dataclasses.replace(manifest, run_id=args.run_id)
    judge_transport = None
    if manifest.judge is not None and manifest.judge.get("endpoint"):
        judge_transport = HttpChatTransport(manifest.judge["endpoint"], env.get(judge_mod.API_KEY_ENV))

    def gen_factory(name: str):
        spec = next(m for m in manifest.models if m.name == name)
        return HttpChatTransport(spec.endpoint, env.get(genclient.API_KEY_ENV)) if spec.endpoint else None

    outcome = run_benchmark(
        manifest,
        judge_transport=judge_transport,
        gen_transport=gen_factory if any(m.endpoint for m in manifest.models) else None,
        workers=args.workers,
    )
    failed = [r for r in outcome.results if r.error]
    if args.json:
        _emit_json({
            "run_dir": str(outcome.run_dir),
            "cases": len(cases),
            "cells": len(outcome.results),
            "failed_cells": len(failed),
            "aggregate": outcome.aggregate.to_dict(),
        })
    else:
        sys.stdout.write(outcome.aggregate.to_markdown())
        print(f"\n{len(outcome.results)} cells written to {outcome.run_dir}")
        for r in failed:
            print(f"failed: {r.model_name}/{r.setting.value}/{r.case_id}: {r.error}", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_stats(args, env) -> int:
    stats = dataset_stats(load_dataset(args.dataset))
    if args.json:
        _emit_json([s.to_dict() for s in stats])
        return EXIT_OK
    cols = ("case_id", "node_count", "max_depth", "container_count", "relation_count", "top_layer_count")
    width = max([len(cols[0])] + [len(s.case_id) for s in stats])
    print(f"{cols[0]:<{width}}  " + "  ".join(f"{c:>15}" for c in cols[1:]))
    for s in stats:
        d = s.to_dict()
        print(f"{s.case_id:<{width}}  " + "  ".join(f"{d[c]:>15}" for c in cols[1:]))
    return EXIT_OK


def _ratings(path: str) -> list:
    text = _read(path).strip()
    if text.startswith("["):
        values = json.loads(text)
    else:
        values = [v.strip() for v in text.replace(",", "\n").splitlines() if v.strip()]

    def coerce(v):
        if isinstance(v, str):
            try:
                return int(v)
            except ValueError:
                return v
        return v

    return [coerce(v) for v in values]


def cmd_kappa(args, env) -> int:
    a, b = _ratings(args.a), _ratings(args.b)
    try:
        kappa = cohens_kappa(a, b, args.weights)
    except (LengthMismatch, EmptyRatings) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.json:
        _emit_json({"kappa": kappa, "n": len(a), "weights": args.weights or "none"})
    else:
        print(f"{kappa:.4f}")
    return EXIT_OK


def cmd_report(args, env) -> int:
    run_dir = Path(args.run)
    if not (run_dir / "cases.jsonl").is_file():
        raise ConfigError(f"{run_dir} has no cases.jsonl")
    try:
        report = aggregate(load_results(run_dir))
    except EmptyResults as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    out = {"csv": report.to_csv, "md": report.to_markdown, "json": report.to_json}[args.format]()
    sys.stdout.write(out)
    return EXIT_OK


# -- argument parsing ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="archeval", description="Evaluate generated PlantUML architecture diagrams.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    s = sub.add_parser("validate", help="check PlantUML syntax")
    s.add_argument("file")
    s.add_argument("--mode", choices=sorted(_SYNTAX_MODES), default="strict")
    s.add_argument("--renderer", help="plantuml executable or .jar for --mode renderer")
    s.add_argument("--render-timeout", type=float, default=30.0)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("parse", help="parse a diagram and print its graph")
    s.add_argument("file")
    s.add_argument("--emit", choices=("canonical", "json"), default="canonical")
    s.add_argument("--lenient", action="store_true")
    s.set_defaults(func=cmd_parse)

    s = sub.add_parser("eval", help="score one prediction against a reference")
    s.add_argument("--pred", required=True)
    s.add_argument("--ref", required=True)
    s.add_argument("--prd", help="PRD used as the judge's basis (defaults to the reference)")
    s.add_argument("--matcher", choices=[m.value for m in MatchMode], default="lexical")
    s.add_argument("--threshold", type=float, default=0.5)
    s.add_argument("--judge-endpoint")
    s.add_argument("--judge-model")
    s.add_argument("--judge-cache", type=Path)
    s.add_argument("--ged-budget-ms", type=int, default=5000)
    s.add_argument("--syntax-mode", choices=sorted(_SYNTAX_MODES), default="strict")
    s.add_argument("--renderer")
    s.add_argument("--model-label", default="cli")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("generate", help="ask a model for a diagram")
    s.add_argument("--prd", required=True)
    s.add_argument("--setting", choices=("full", "noarch", "no_arch", "min"), required=True)
    s.add_argument("--endpoint", required=True)
    s.add_argument("--model", required=True)
    s.add_argument("--case-id")
    s.add_argument("--output-root", default="outputs")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("bench", help="run a benchmark over a dataset")
    s.add_argument("--dataset", required=True)
    s.add_argument("--manifest")
    s.add_argument("--model", action="append", help="model name with predictions under --outputs")
    s.add_argument("--setting", action="append")
    s.add_argument("--outputs")
    s.add_argument("--results")
    s.add_argument("--run-id")
    s.add_argument("--workers", type=int)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("stats", help="structural statistics of dataset references")
    s.add_argument("--dataset", required=True)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("kappa", help="Cohen's kappa between two rating files")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--weights", choices=("linear",))
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_kappa)

    s = sub.add_parser("report", help="re-render aggregate tables from a run directory")
    s.add_argument("--run", required=True)
    s.add_argument("--format", choices=("csv", "md", "json"), default="md")
    s.set_defaults(func=cmd_report)
    return p


def _explicit_dests(parser: argparse.ArgumentParser, argv: Sequence[str]) -> set[str]:
    """Destinations the user set on the command line (so config presets don't override them)."""
    seen = set()
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for name, sp in sub.choices.items():
        if name in argv:
            for action in sp._actions:
                if any(opt in argv or any(a.startswith(opt + "=") for a in argv) for opt in action.option_strings):
                    seen.add(action.dest)
    return seen


def apply_config(args: argparse.Namespace, explicit: set[str]) -> None:
    """Preset flags from ``archeval.toml`` at the dataset root; explicit flags win."""
    dataset = getattr(args, "dataset", None)
    if not dataset:
        return
    path = Path(dataset) / CONFIG_NAME
    if not path.is_file():
        return
    from ._toml import TOMLDecodeError, loads

    try:
        data = loads(path.read_text(encoding="utf-8"))
    except TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    presets = {k: v for k, v in data.items() if not isinstance(v, dict)}
    presets.update(data.get(args.command, {}))
    for key, value in presets.items():
        dest = key.replace("-", "_")
        if dest in explicit or not hasattr(args, dest) or dest in ("command", "func", "dataset"):
            continue
        if dest == "model" or dest == "setting":
            value = [value] if isinstance(value, str) else list(value)
        elif dest == "manifest" and value:
            value = str(path.parent / value) if not Path(value).is_absolute() else value
        setattr(args, dest, value)


def run_cli(argv: Sequence[str] | None = None, env: Mapping[str, str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    env = os.environ if env is None else env
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.ERROR,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        apply_config(args, _explicit_dests(parser, argv))
        return args.func(args, env)
    except (ConfigError, DatasetLayoutError, RendererUnavailable, JudgeUnavailable, TransportError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ENV
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ENV


def main() -> None:
    sys.exit(run_cli())
