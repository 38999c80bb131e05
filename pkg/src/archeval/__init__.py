"""Evaluation toolkit for generated PlantUML architecture diagrams."""

from .alignment import MatchConfig, MatchMode, match_edges, match_nodes, normalize_label
from .antipattern import AntiPatternReport, DegreeStats, detect, god_ratio, orphan_ratio
from .ged import CostModel, GedResult, compute_ged
from .harness import (
    AggregateReport,
    CaseResult,
    EvalConfig,
    ProjectCase,
    RunManifest,
    aggregate,
    cohens_kappa,
    dataset_stats,
    evaluate_case,
    load_dataset,
    run_benchmark,
)
from .metrics import MetricReport, PrfScore, ged_accuracy, layer_accuracy, syntactic_validity
from .model import ArchEdge, ArchGraph, ArchNode, EdgeStyle, NodeKind, canonical_serialize
from .plantuml import ParseMode, SyntaxMode, extract_plantuml_block, parse, parse_with_diagnostics, validate
from .prd import ContextSetting, SectionKind, apply_setting, parse_prd

__version__ = "0.1.0"
