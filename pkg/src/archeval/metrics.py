"""Structural graph metrics: validity, node/edge P-R-F1, layer accuracy, GED accuracy."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable

from .alignment import EdgeMatching, NodeMatching
from .ged import GedResult, compute_ged  # noqa: F401  (re-exported)
from .model import ArchGraph


class NoMatchedNodes(ValueError):
    """Layer accuracy is undefined without matched nodes."""


class EmptyBatch(ValueError):
    pass


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


@dataclass(frozen=True)
class PrfScore:
    tp: int
    fp: int
    fn: int

    @property
    def vacuous(self) -> bool:
        return self.tp == self.fp == self.fn == 0

    @property
    def precision(self) -> float:
        return 1.0 if self.vacuous else _ratio(self.tp, self.tp + self.fp)

    @property
    def recall(self) -> float:
        return 1.0 if self.vacuous else _ratio(self.tp, self.tp + self.fn)

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r > 0 else 0.0

    def to_dict(self) -> dict:
        return {**asdict(self), "precision": self.precision, "recall": self.recall, "f1": self.f1}

    @classmethod
    def from_dict(cls, data: dict) -> PrfScore:
        return cls(data["tp"], data["fp"], data["fn"])


def prf(tp: int, fp: int, fn: int) -> PrfScore:
    return PrfScore(tp, fp, fn)


def node_prf(matching: NodeMatching) -> PrfScore:
    return PrfScore(len(matching.pairs), len(matching.unmatched_pred), len(matching.unmatched_ref))


def edge_prf(matching: EdgeMatching) -> PrfScore:
    return PrfScore(len(matching.tp), len(matching.fp), len(matching.fn))


def layer_accuracy(matching: NodeMatching) -> float:
    """Share of matched leaf pairs whose layers agree."""
    if not matching.pairs:
        raise NoMatchedNodes("no matched node pairs")
    return sum(p.layer_correct for p in matching.pairs) / len(matching.pairs)


def ged_accuracy(ged: GedResult | int, pred: ArchGraph, ref: ArchGraph) -> float:
    """100 * max(0, 1 - GED / max(|V_p|+|E_p|, |V_t|+|E_t|)); 100 when both graphs are empty."""
    distance = ged.distance if isinstance(ged, GedResult) else ged
    size = max(len(pred.nodes) + len(pred.edges), len(ref.nodes) + len(ref.edges))
    if size == 0:
        return 100.0
    return 100.0 * max(0.0, 1.0 - distance / size)


def syntactic_validity(outcomes: Iterable[bool]) -> float:
    """Fraction of first-round samples that rendered."""
    outcomes = list(outcomes)
    if not outcomes:
        raise EmptyBatch("no samples")
    return sum(bool(o) for o in outcomes) / len(outcomes)


@dataclass(frozen=True)
class MetricReport:
    sv_sample: bool
    node: PrfScore | None = None
    edge: PrfScore | None = None
    layer_accuracy: float | None = None
    ged_accuracy: float | None = None
    ged_distance: int | None = None
    ged_exact: bool | None = None

    def to_dict(self) -> dict:
        return {
            "sv_sample": self.sv_sample,
            "node": self.node.to_dict() if self.node else None,
            "edge": self.edge.to_dict() if self.edge else None,
            "layer_accuracy": self.layer_accuracy,
            "ged_accuracy": self.ged_accuracy,
            "ged_distance": self.ged_distance,
            "ged_exact": self.ged_exact,
        }

    @classmethod
    def from_dict(cls, data: dict) -> MetricReport:
        return cls(
            sv_sample=data["sv_sample"],
            node=PrfScore.from_dict(data["node"]) if data.get("node") else None,
            edge=PrfScore.from_dict(data["edge"]) if data.get("edge") else None,
            layer_accuracy=data.get("layer_accuracy"),
            ged_accuracy=data.get("ged_accuracy"),
            ged_distance=data.get("ged_distance"),
            ged_exact=data.get("ged_exact"),
        )
