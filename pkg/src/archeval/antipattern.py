"""Orphan and god-component detection on a predicted diagram."""

from __future__ import annotations

import statistics
from dataclasses import dataclass

from .model import ArchGraph, degrees


@dataclass(frozen=True)
class DegreeStats:
    mean: float
    stddev: float

    @property
    def threshold(self) -> float:
        return self.mean + 2 * self.stddev


@dataclass(frozen=True)
class AntiPatternReport:
    orphan_ratio: float
    orphans: tuple[str, ...]
    god_ratio: float
    gods: tuple[str, ...]
    stats: DegreeStats

    def to_dict(self) -> dict:
        return {
            "orphan_ratio": self.orphan_ratio,
            "orphans": list(self.orphans),
            "god_ratio": self.god_ratio,
            "gods": list(self.gods),
            "degree_mean": self.stats.mean,
            "degree_stddev": self.stats.stddev,
            "degree_threshold": self.stats.threshold,
        }

    @classmethod
    def from_dict(cls, data: dict) -> AntiPatternReport:
        return cls(
            data["orphan_ratio"], tuple(data["orphans"]), data["god_ratio"], tuple(data["gods"]),
            DegreeStats(data["degree_mean"], data["degree_stddev"]),
        )


def orphan_ratio(graph: ArchGraph, inherit: bool = True) -> tuple[float, tuple[str, ...]]:
    """Nodes with no relation edges, over all nodes.

    With ``inherit`` a container counts as connected when any descendant is.
    """
    if not graph.nodes:
        return 0.0, ()
    deg = degrees(graph)
    connected = {nid for nid, d in deg.items() if d > 0}
    if inherit:
        for nid in list(connected):
            connected.update(graph.ancestors(nid))
    orphans = tuple(n.id for n in graph.nodes if n.id not in connected)
    return len(orphans) / len(graph.nodes), orphans


def god_ratio(graph: ArchGraph) -> tuple[float, tuple[str, ...], DegreeStats]:
    """Nodes whose total degree strictly exceeds mean + 2 * population stddev."""
    if not graph.nodes:
        return 0.0, (), DegreeStats(0.0, 0.0)
    deg = degrees(graph)
    values = [deg[n.id] for n in graph.nodes]
    mean = statistics.fmean(values)
    sd = statistics.pstdev(values) if len(values) > 1 else 0.0
    stats = DegreeStats(mean, sd)
    if len(values) < 2 or sd == 0:
        return 0.0, (), stats
    gods = tuple(n.id for n in graph.nodes if deg[n.id] > stats.threshold)
    return len(gods) / len(graph.nodes), gods, stats


def detect(graph: ArchGraph, inherit: bool = True) -> AntiPatternReport:
    o_ratio, orphans = orphan_ratio(graph, inherit=inherit)
    g_ratio, gods, stats = god_ratio(graph)
    return AntiPatternReport(o_ratio, orphans, g_ratio, gods, stats)
