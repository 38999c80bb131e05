"""Deterministic stand-ins for the model under test and the judge.

These let a full benchmark run without network access: the stand-in model
answers each PRD with a perturbed copy of that case's reference diagram,
and the stand-in judge derives scores from the prediction text alone.
Output depends only on the request, never on call order or timing.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import random
from typing import Iterable, Sequence

from .harness import ProjectCase
from .llm import ChatRequest
from .model import ArchEdge, ArchGraph, ArchNode, canonical_serialize
from .prd import ContextSetting, apply_setting, parse_prd

# fraction of edges dropped and leaves renamed/removed per setting
_DAMAGE = {
    ContextSetting.FULL: (0.10, 0.05, 1),
    ContextSetting.NO_ARCH: (0.25, 0.10, 2),
    ContextSetting.MIN: (0.45, 0.20, 3),
}
_HALLUCINATED = ("Analytics Service", "Audit Logger", "Feature Flags", "Search Index", "Payment Gateway")
_BROKEN_KINDS = ("prose", "arrow", "unterminated")


def _seed(*parts: str) -> int:
    return int.from_bytes(hashlib.sha256("\x1f".join(parts).encode("utf-8")).digest()[:8], "big")


def perturb(graph: ArchGraph, setting: ContextSetting, seed: int) -> ArchGraph:
    """Drop some edges and leaves, rename a few, add hallucinated nodes;
    ``min`` also flattens the deepest containers."""
    rng = random.Random(seed)
    edge_drop, leaf_drop, extra = _DAMAGE[setting]
    leaves = [n for n in graph.nodes if not graph.children(n.id)]
    dropped = {n.id for n in leaves if rng.random() < leaf_drop}
    nodes = []
    parent_of = {n.id: n.parent for n in graph.nodes}
    if setting is ContextSetting.MIN:
        # lift children of containers nested three or more levels deep
        for n in graph.nodes:
            while parent_of[n.id] is not None and graph.depth(parent_of[n.id]) >= 3:
                parent_of[n.id] = graph.node(parent_of[n.id]).parent
    keep_containers = {p for nid, p in parent_of.items() if p is not None and nid not in dropped}
    for n in graph.nodes:
        if n.id in dropped or (graph.children(n.id) and n.id not in keep_containers):
            continue
        name = n.display_name
        if not graph.children(n.id) and rng.random() < 0.1:
            name = f"{name} Module"
        nodes.append(dataclasses.replace(n, display_name=name, parent=parent_of[n.id]))
    kept = {n.id for n in nodes}
    edges = [e for e in graph.edges if e.source in kept and e.target in kept and rng.random() >= edge_drop]
    tops = [n.id for n in nodes if n.parent is None and graph.children(n.id)]
    for i in range(extra):
        nid = f"halluc_{i}"
        nodes.append(ArchNode(nid, _HALLUCINATED[i % len(_HALLUCINATED)], parent=rng.choice(tops) if tops else None))
        if len(kept) > 0:
            edges.append(ArchEdge(nid, sorted(kept)[rng.randrange(len(kept))]))
    return ArchGraph(tuple(nodes), tuple(edges))


def _broken(kind: str, text: str) -> str:
    if kind == "prose":
        return "Here is an overview of the architecture: the frontend talks to the backend, which owns the data."
    if kind == "arrow":
        lines = text.splitlines()
        lines.insert(len(lines) - 1, "n1 -->")
        return "\n".join(lines)
    return text.replace("@enduml", "").rstrip() + "\n"


class ReferenceEchoModel:
    """A fake model-under-test keyed on cases.

    Requests are recognized by the exact PRD text each setting produces, so
    the answer is a pure function of (model, case, setting). Cases listed in
    ``broken`` answer with syntactically unusable output.
    """

    def __init__(self, model_name: str, cases: Iterable[ProjectCase], broken: Sequence[str] = ()):
        self.model_name = model_name
        self.broken = {cid: _BROKEN_KINDS[i % len(_BROKEN_KINDS)] for i, cid in enumerate(sorted(broken))}
        self._index: dict[str, tuple[ProjectCase, ContextSetting]] = {}
        for case in cases:
            doc = parse_prd(case.prd_text())
            for setting in ContextSetting:
                self._index[apply_setting(doc, setting)] = (case, setting)

    def __call__(self, request: ChatRequest) -> str:
        hit = self._index.get(request.user_text)
        if hit is None:
            return "I could not find a requirements document in your message."
        case, setting = hit
        graph = perturb(case.reference_graph(), setting, _seed(self.model_name, case.case_id, setting.value))
        text = canonical_serialize(graph)
        if case.case_id in self.broken:
            return _broken(self.broken[case.case_id], text)
        return f"Below is the component diagram.\n\n```plantuml\n{text}\n```\n"


def scripted_judge(request: ChatRequest) -> str:
    """Judge stand-in: scores are a hash of the predicted diagram; alignment
    batches are answered 'unrelated' except for identical names."""
    text = request.user_text
    if "<PREDICTED_DIAGRAM>" in text:
        body = text.split("<PREDICTED_DIAGRAM>", 1)[1]
        h = hashlib.sha256(body.encode("utf-8")).digest()
        scores = {d: 1 + b % 5 for d, b in zip(("completeness", "accuracy", "rationality", "readability"), h)}
        return json.dumps({"rationale": "hermetic", "scores": scores})
    verdicts = []
    for line in text.splitlines():
        head, sep, _ = line.partition(". predicted: ")
        if sep and head.strip().isdigit():
            verdicts.append({"id": int(head), "relation": "unrelated"})
    return "```json\n" + json.dumps({"verdicts": verdicts}) + "\n```"
